#include "improbe/textstats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "improbe/bow.hpp"
#include "improbe/csv.hpp"
#include "improbe/errors.hpp"
#include "improbe/text.hpp"

namespace improbe::textstats {

CorpusCounts count_tokens(const std::vector<std::vector<std::string>>& docs, std::string label) {
  CorpusCounts c;
  c.label = std::move(label);
  for (const auto& doc : docs) {
    for (const auto& t : doc) c.counts[t] += 1.0;
    c.total += static_cast<double>(doc.size());
  }
  return c;
}

CorpusCounts count_texts(std::span<const std::string> texts, std::string label) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(texts.size());
  for (const auto& t : texts) docs.push_back(bow::preprocess_tokenize(t));
  return count_tokens(docs, std::move(label));
}

std::vector<IdpResult> idp_log_odds(const CorpusCounts& s1, const CorpusCounts& s2,
                                    const CorpusCounts& background, double prior_strength) {
  if (!(prior_strength > 0.0) || !std::isfinite(prior_strength)) {
    fail(ErrorKind::invalid_argument, "prior_strength must be positive");
  }
  if (!(s1.total > 0.0) || !(s2.total > 0.0)) {
    fail(ErrorKind::invalid_argument, "IDP subsets must be nonempty");
  }

  std::set<std::string> terms;
  for (const auto& [t, c] : s1.counts) terms.insert(t);
  for (const auto& [t, c] : s2.counts) terms.insert(t);

  std::map<std::string, double> bg = background.counts;
  for (const auto& t : terms) {
    auto& c = bg[t];
    if (!(c > 0.0)) c = kUnseenBackgroundCount;
  }
  double bg_total = 0.0;
  for (const auto& [t, c] : bg) bg_total += c;

  const double a0 = prior_strength;
  const double n1 = s1.total, n2 = s2.total;
  auto count_in = [](const CorpusCounts& s, const std::string& t) {
    const auto it = s.counts.find(t);
    return it == s.counts.end() ? 0.0 : it->second;
  };

  std::vector<IdpResult> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    const double aw = a0 * bg.at(t) / bg_total;
    const double y1 = count_in(s1, t), y2 = count_in(s2, t);
    const double delta = std::log((y1 + aw) / (n1 + a0 - y1 - aw)) -
                         std::log((y2 + aw) / (n2 + a0 - y2 - aw));
    const double var = 1.0 / (y1 + aw) + 1.0 / (y2 + aw);
    out.push_back({t, delta / std::sqrt(var), delta, (y1 + y2) / (n1 + n2)});
  }
  std::sort(out.begin(), out.end(), [](const IdpResult& a, const IdpResult& b) {
    return a.z != b.z ? a.z > b.z : a.term < b.term;
  });
  return out;
}

void write_idp_csv(std::ostream& out, const std::vector<IdpResult>& results) {
  CsvWriter csv(out);
  csv.row({"term", "z", "delta", "freq"});
  for (const auto& r : results) {
    csv.row({r.term, format_double(r.z), format_double(r.delta), format_double(r.freq)});
  }
}

Pattern parse_pattern(std::string_view raw) {
  std::string_view s = trim(raw);
  Pattern p;
  if (!s.empty() && s.back() == '*') {
    p.prefix = true;
    s.remove_suffix(1);
  }
  if (s.find('*') != std::string_view::npos) {
    fail(ErrorKind::format, "wildcard must be terminal in pattern '" + std::string(raw) + "'");
  }
  p.tokens = bow::preprocess_tokenize(s);
  if (p.tokens.empty()) fail(ErrorKind::format, "empty pattern '" + std::string(raw) + "'");
  return p;
}

CategoryLexicon parse_category_lexicon(std::string_view content) {
  CategoryLexicon lex;
  std::size_t line_no = 0;
  for (const auto& line : split(content, '\n')) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::format, "category lexicon line " + std::to_string(line_no) + " has no tab");
    }
    const std::string category(trim(std::string_view(line).substr(0, tab)));
    if (category.empty()) {
      fail(ErrorKind::format, "empty category on lexicon line " + std::to_string(line_no));
    }
    lex.categories[category].push_back(parse_pattern(std::string_view(line).substr(tab + 1)));
  }
  return lex;
}

CategoryLexicon read_category_lexicon(const std::filesystem::path& path) {
  return parse_category_lexicon(read_file(path));
}

namespace {

std::size_t match_length(const Pattern& p, const std::vector<std::string>& tokens, std::size_t at) {
  const std::size_t len = p.tokens.size();
  if (at + len > tokens.size()) return 0;
  for (std::size_t j = 0; j < len; ++j) {
    const auto& want = p.tokens[j];
    const auto& got = tokens[at + j];
    const bool last = j + 1 == len;
    if (last && p.prefix) {
      if (got.compare(0, want.size(), want) != 0) return 0;
    } else if (got != want) {
      return 0;
    }
  }
  return len;
}

}  // namespace

std::map<std::string, std::size_t> dictionary_count_tokens(const std::vector<std::string>& tokens,
                                                           const CategoryLexicon& lexicon) {
  std::map<std::string, std::size_t> out;
  for (const auto& [category, patterns] : lexicon.categories) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < tokens.size()) {
      std::size_t best = 0;
      for (const auto& p : patterns) best = std::max(best, match_length(p, tokens, i));
      if (best > 0) {
        ++count;
        i += best;
      } else {
        ++i;
      }
    }
    out[category] = count;
  }
  return out;
}

std::map<std::string, std::size_t> dictionary_count(std::string_view text,
                                                    const CategoryLexicon& lexicon) {
  return dictionary_count_tokens(bow::preprocess_tokenize(text), lexicon);
}

std::size_t total_matches(std::string_view text, const CategoryLexicon& lexicon) {
  std::size_t total = 0;
  for (const auto& [c, n] : dictionary_count(text, lexicon)) total += n;
  return total;
}

CorpusCounts count_categories(std::span<const std::string> texts, const CategoryLexicon& lexicon,
                              std::string label) {
  CorpusCounts c;
  c.label = std::move(label);
  for (const auto& text : texts) {
    const auto tokens = bow::preprocess_tokenize(text);
    c.total += static_cast<double>(tokens.size());
    for (const auto& [category, n] : dictionary_count_tokens(tokens, lexicon)) {
      if (n > 0) c.counts[category] += static_cast<double>(n);
    }
  }
  return c;
}

ReportedAnswer parse_reported_answer(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "positive") return ReportedAnswer::positive;
  if (v == "negative") return ReportedAnswer::negative;
  if (v == "unparsed" || v.empty()) return ReportedAnswer::unparsed;
  fail(ErrorKind::format, "unknown reported answer '" + std::string(s) + "'");
}

ConsistencyReport consistency_report(std::span<const Direction> provided,
                                     std::span<const ReportedAnswer> reported,
                                     std::span<const double> positive_scores,
                                     std::span<const double> negative_scores) {
  if (provided.size() != reported.size()) {
    fail(ErrorKind::invalid_argument, "provided and reported labels differ in length");
  }
  if (positive_scores.size() != negative_scores.size() ||
      (!positive_scores.empty() && positive_scores.size() != provided.size())) {
    fail(ErrorKind::invalid_argument, "probability scores must be paired with every item");
  }
  if (provided.empty()) fail(ErrorKind::invalid_argument, "no items to score");
  ConsistencyReport r;
  r.n = provided.size();
  std::size_t match = 0, positive = 0;
  for (std::size_t i = 0; i < provided.size(); ++i) {
    const bool pos = reported[i] == ReportedAnswer::positive;
    const bool neg = reported[i] == ReportedAnswer::negative;
    positive += pos;
    match += (provided[i] == Direction::high && pos) || (provided[i] == Direction::low && neg);
  }
  r.accuracy = static_cast<double>(match) / static_cast<double>(r.n);
  r.positive_rate = static_cast<double>(positive) / static_cast<double>(r.n);
  if (!positive_scores.empty()) {
    double gap = 0.0;
    for (std::size_t i = 0; i < r.n; ++i) gap += positive_scores[i] - negative_scores[i];
    r.mean_prob_gap = gap / static_cast<double>(r.n);
  }
  return r;
}

}  // namespace improbe::textstats
