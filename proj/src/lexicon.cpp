#include "improbe/lexicon.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "improbe/errors.hpp"
#include "improbe/hashing.hpp"
#include "improbe/text.hpp"

namespace improbe::lexicon {
namespace {

std::optional<Dictionary> parse_dictionary(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "sociability") return Dictionary::sociability;
  if (v == "morality") return Dictionary::morality;
  if (v == "ability") return Dictionary::ability;
  if (v == "agency") return Dictionary::agency;
  return std::nullopt;
}

bool by_term(const TraitEntry& a, const TraitEntry& b) { return a.term < b.term; }

}  // namespace

std::string_view to_string(Dictionary d) noexcept {
  switch (d) {
    case Dictionary::sociability: return "sociability";
    case Dictionary::morality: return "morality";
    case Dictionary::ability: return "ability";
    case Dictionary::agency: return "agency";
  }
  return "sociability";
}

Dimension dimension_of(Dictionary d) noexcept {
  return (d == Dictionary::sociability || d == Dictionary::morality) ? Dimension::warmth
                                                                     : Dimension::competence;
}

std::vector<TraitEntry> LexiconLoad::of(Dimension d) const {
  std::vector<TraitEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [d](const TraitEntry& e) { return e.dimension == d; });
  return out;
}

LexiconLoad load_lexicon(const CsvTable& rows) {
  const std::size_t term_col = rows.require("term");
  const std::size_t dict_col = rows.require("dictionary");
  const std::size_t dir_col = rows.require("direction");

  LexiconLoad load;
  std::set<std::string> seen;
  for (const auto& row : rows.rows) {
    const std::string term(trim(row[term_col]));
    if (term.empty()) fail(ErrorKind::format, "lexicon row with empty term");
    const auto dict = parse_dictionary(row[dict_col]);
    if (!dict) {
      load.dropped.push_back({term, std::string(trim(row[dict_col]))});
      continue;
    }
    const Direction dir = parse_direction(row[dir_col]);
    if (!seen.insert(ascii_lower(term)).second) {
      fail(ErrorKind::format, "duplicate lexicon term '" + term + "'");
    }
    load.entries.push_back({term, *dict, dimension_of(*dict), dir});
  }
  if (load.entries.empty()) {
    fail(ErrorKind::invalid_argument, "lexicon has no sociability/morality/ability/agency rows");
  }
  return load;
}

LexiconLoad read_lexicon(const std::filesystem::path& path) {
  return load_lexicon(read_csv(path));
}

std::string_view to_string(SpecOrder o) noexcept {
  switch (o) {
    case SpecOrder::warmth_first: return "warmth_first";
    case SpecOrder::competence_first: return "competence_first";
    case SpecOrder::single: return "single";
  }
  return "single";
}

SpecOrder parse_order(std::string_view s) {
  const auto v = trim(s);
  if (v == "warmth_first") return SpecOrder::warmth_first;
  if (v == "competence_first") return SpecOrder::competence_first;
  if (v == "single") return SpecOrder::single;
  fail(ErrorKind::format, "unknown spec order '" + std::string(s) + "'");
}

std::vector<std::string> ImpressionSpec::terms() const {
  std::vector<std::string> out;
  if (order == SpecOrder::competence_first) {
    out = {competence_trait->term, warmth_trait->term};
  } else if (order == SpecOrder::warmth_first) {
    out = {warmth_trait->term, competence_trait->term};
  } else {
    out = {warmth_trait ? warmth_trait->term : competence_trait->term};
  }
  return out;
}

std::string make_spec_id(const std::optional<TraitEntry>& warmth,
                         const std::optional<TraitEntry>& competence, SpecOrder order) {
  std::string key = "w=";
  if (warmth) key += warmth->term;
  key += ";c=";
  if (competence) key += competence->term;
  key += ";order=";
  key += to_string(order);
  return sha256_hex(key).substr(0, 16);
}

ImpressionSpec make_spec(std::optional<TraitEntry> warmth, std::optional<TraitEntry> competence,
                         SpecOrder order) {
  const int present = int(warmth.has_value()) + int(competence.has_value());
  if (present == 0) fail(ErrorKind::invalid_argument, "impression spec without traits");
  if ((order == SpecOrder::single) != (present == 1)) {
    fail(ErrorKind::invalid_argument, "spec order inconsistent with trait count");
  }
  if (warmth && warmth->dimension != Dimension::warmth) {
    fail(ErrorKind::invalid_argument, "'" + warmth->term + "' is not a warmth trait");
  }
  if (competence && competence->dimension != Dimension::competence) {
    fail(ErrorKind::invalid_argument, "'" + competence->term + "' is not a competence trait");
  }
  ImpressionSpec spec{make_spec_id(warmth, competence, order), std::move(warmth),
                      std::move(competence), order};
  return spec;
}

SpecEnumeration enumerate_specs(std::vector<TraitEntry> warmth,
                                std::vector<TraitEntry> competence, int samples_per_spec) {
  if (samples_per_spec < 1) fail(ErrorKind::invalid_argument, "samples_per_spec must be >= 1");
  std::sort(warmth.begin(), warmth.end(), by_term);
  std::sort(competence.begin(), competence.end(), by_term);
  {
    std::set<std::string> terms;
    for (const auto& t : warmth) terms.insert(ascii_lower(t.term));
    for (const auto& t : competence) {
      if (terms.count(ascii_lower(t.term))) {
        fail(ErrorKind::invalid_argument, "trait '" + t.term + "' is in both lists");
      }
    }
  }

  SpecEnumeration out;
  out.specs.reserve(2 * warmth.size() * competence.size() + warmth.size() + competence.size());
  for (const auto& w : warmth) {
    for (const auto& c : competence) out.specs.push_back(make_spec(w, c, SpecOrder::warmth_first));
  }
  for (const auto& c : competence) {
    for (const auto& w : warmth) {
      out.specs.push_back(make_spec(w, c, SpecOrder::competence_first));
    }
  }
  for (const auto& w : warmth) out.specs.push_back(make_spec(w, std::nullopt, SpecOrder::single));
  for (const auto& c : competence) {
    out.specs.push_back(make_spec(std::nullopt, c, SpecOrder::single));
  }
  out.slot_count = out.specs.size() * static_cast<std::uint64_t>(samples_per_spec);
  return out;
}

std::string render_generation_prompt(const ImpressionSpec& spec) {
  std::vector<std::string> terms = spec.terms();
  for (auto& t : terms) t = ascii_lower(t);
  return "Generate a sample message from a user that is " + join(terms, " and ") +
         " talking to a helpful chatbot assistant. Respond only with a single sample message "
         "surrounded by double quotes and nothing else.";
}

SpecLabels labels_of_spec(const ImpressionSpec& spec) {
  SpecLabels labels;
  if (spec.warmth_trait) labels.warmth = spec.warmth_trait->direction;
  if (spec.competence_trait) labels.competence = spec.competence_trait->direction;
  return labels;
}

void write_spec_manifest(std::ostream& out, const std::vector<ImpressionSpec>& specs) {
  CsvWriter csv(out);
  csv.row({"spec_id", "warmth_term", "competence_term", "order", "prompt_text"});
  for (const auto& s : specs) {
    csv.row({s.spec_id, s.warmth_trait ? s.warmth_trait->term : "",
             s.competence_trait ? s.competence_trait->term : "", std::string(to_string(s.order)),
             render_generation_prompt(s)});
  }
}

void write_spec_labels(std::ostream& out, const std::vector<ImpressionSpec>& specs) {
  CsvWriter csv(out);
  csv.row({"spec_id", "warmth", "competence"});
  for (const auto& s : specs) {
    const SpecLabels l = labels_of_spec(s);
    csv.row({s.spec_id, l.warmth ? std::string(to_string(*l.warmth)) : "",
             l.competence ? std::string(to_string(*l.competence)) : ""});
  }
}

}  // namespace improbe::lexicon
