#include <set>

#include "doctest.h"
#include "improbe/csv.hpp"
#include "improbe/errors.hpp"
#include "improbe/lexicon.hpp"

using namespace improbe;
using namespace improbe::lexicon;

namespace {

std::vector<TraitEntry> traits(Dimension dim, int high, int low, const std::string& prefix) {
  std::vector<TraitEntry> out;
  const Dictionary dict = dim == Dimension::warmth ? Dictionary::sociability : Dictionary::ability;
  for (int i = 0; i < high + low; ++i) {
    out.push_back({prefix + std::to_string(1000 + i), dict, dim, i < high ? Direction::high : Direction::low});
  }
  return out;
}

TraitEntry entry(const std::string& term, Dictionary d, Direction dir) {
  return {term, d, dimension_of(d), dir};
}

}  // namespace

TEST_SUITE("lexicon") {
  TEST_CASE("rows map to dimensions and out-of-model dictionaries drop") {
    const auto load = load_lexicon(parse_csv(
        "term,dictionary,direction\nHospitable,sociability,high\nUnintelligent,ability,low\n"
        "Devout,religion,high\n"));
    REQUIRE(load.entries.size() == 2);
    CHECK(load.entries[0].dimension == Dimension::warmth);
    CHECK(load.entries[0].direction == Direction::high);
    CHECK(load.entries[1].dimension == Dimension::competence);
    CHECK(load.entries[1].direction == Direction::low);
    REQUIRE(load.dropped.size() == 1);
    CHECK(load.dropped[0].term == "Devout");
  }

  TEST_CASE("lexicon errors") {
    CHECK_THROWS_AS(load_lexicon(parse_csv("term,dictionary,direction\nKind,morality,sideways\n")), Error);
    CHECK_THROWS_AS(load_lexicon(parse_csv("term,dictionary,direction\nDevout,religion,high\n")), Error);
    CHECK_THROWS_AS(load_lexicon(parse_csv("term,dictionary\nKind,morality\n")), Error);
  }

  TEST_CASE("bundled toy lexicon") {
    const auto load = read_lexicon(IMPROBE_DATA_DIR "/toy_lexicon.csv");
    CHECK(load.entries.size() == 20);
    CHECK(load.of(Dimension::warmth).size() == 10);
    CHECK(load.of(Dimension::competence).size() == 10);
  }

  TEST_CASE("closed-form slot counts") {
    CHECK(slot_count(131, 104, 10) == 274830);
    CHECK(enumerate_specs({}, {}, 10).specs.empty());
    const auto e = enumerate_specs({entry("Kind", Dictionary::morality, Direction::high)},
                                   {entry("Able", Dictionary::ability, Direction::high)}, 1);
    REQUIRE(e.specs.size() == 4);
    CHECK(e.specs[0].order == SpecOrder::warmth_first);
    CHECK(e.specs[1].order == SpecOrder::competence_first);
    CHECK(e.specs[2].order == SpecOrder::single);
    CHECK(e.specs[3].order == SpecOrder::single);
    for (int w = 0; w <= 5; ++w) {
      for (int c = 0; c <= 5; ++c) {
        const auto en = enumerate_specs(traits(Dimension::warmth, w, 0, "w"),
                                        traits(Dimension::competence, c, 0, "c"), 3);
        CHECK(en.slot_count == slot_count(w, c, 3));
        CHECK(en.specs.size() * 3 == en.slot_count);
      }
    }
  }

  TEST_CASE("direction counts implied by the reported lexicon") {
    // 63/68 high/low warmth and 54/50 high/low competence traits, 10 samples.
    const auto e = enumerate_specs(traits(Dimension::warmth, 63, 68, "w"),
                                   traits(Dimension::competence, 54, 50, "c"), 10);
    CHECK(e.slot_count == 274830);
    std::uint64_t wh = 0, wl = 0, ch = 0, cl = 0;
    for (const auto& s : e.specs) {
      const auto l = labels_of_spec(s);
      if (l.warmth) (*l.warmth == Direction::high ? wh : wl) += 10;
      if (l.competence) (*l.competence == Direction::high ? ch : cl) += 10;
    }
    CHECK(wh == 131670);
    CHECK(wl == 142120);
    CHECK(ch == 142020);
    CHECK(cl == 131500);
  }

  TEST_CASE("enumeration is ordered, unique and validated") {
    const auto w = traits(Dimension::warmth, 2, 2, "w");
    const auto c = traits(Dimension::competence, 1, 2, "c");
    const auto e = enumerate_specs(w, c, 2);
    std::set<std::string> ids;
    for (const auto& s : e.specs) ids.insert(s.spec_id);
    CHECK(ids.size() == e.specs.size());
    CHECK(enumerate_specs(w, c, 2).specs[5].spec_id == e.specs[5].spec_id);
    auto overlap = c;
    overlap.push_back(w[0]);
    CHECK_THROWS_AS(enumerate_specs(w, overlap, 1), Error);
    CHECK_THROWS_AS(enumerate_specs(w, c, 0), Error);
  }

  TEST_CASE("generation prompt template") {
    const auto friendly = entry("Friendly", Dictionary::sociability, Direction::high);
    const auto meticulous = entry("Meticulous", Dictionary::agency, Direction::high);
    const auto illogical = entry("Illogical", Dictionary::ability, Direction::low);
    CHECK(render_generation_prompt(make_spec(friendly, meticulous, SpecOrder::warmth_first)) ==
          "Generate a sample message from a user that is friendly and meticulous talking to a helpful "
          "chatbot assistant. Respond only with a single sample message surrounded by double quotes "
          "and nothing else.");
    const auto single = render_generation_prompt(make_spec(std::nullopt, illogical, SpecOrder::single));
    CHECK(single.find("a user that is illogical talking to") != std::string::npos);
    const auto flipped = render_generation_prompt(make_spec(friendly, meticulous, SpecOrder::competence_first));
    CHECK(flipped.find("meticulous and friendly") != std::string::npos);
    CHECK_THROWS_AS(make_spec(std::nullopt, std::nullopt, SpecOrder::single), Error);
    CHECK_THROWS_AS(make_spec(friendly, std::nullopt, SpecOrder::warmth_first), Error);
  }

  TEST_CASE("labels follow the traits") {
    const auto under = entry("Understanding", Dictionary::morality, Direction::high);
    const auto motiv = entry("Motivated", Dictionary::agency, Direction::high);
    const auto vicious = entry("Vicious", Dictionary::morality, Direction::low);
    const auto leth = entry("Lethargic", Dictionary::agency, Direction::low);
    const auto hosp = entry("Hospitable", Dictionary::sociability, Direction::high);
    CHECK(labels_of_spec(make_spec(under, motiv, SpecOrder::warmth_first)) ==
          SpecLabels{Direction::high, Direction::high});
    CHECK(labels_of_spec(make_spec(vicious, leth, SpecOrder::competence_first)) ==
          SpecLabels{Direction::low, Direction::low});
    CHECK(labels_of_spec(make_spec(hosp, std::nullopt, SpecOrder::single)) ==
          SpecLabels{Direction::high, std::nullopt});
  }

  TEST_CASE("prompt rendering is injective over the toy enumeration") {
    const auto load = read_lexicon(IMPROBE_DATA_DIR "/toy_lexicon.csv");
    const auto e = enumerate_specs(load.of(Dimension::warmth), load.of(Dimension::competence), 1);
    std::set<std::string> prompts;
    for (const auto& s : e.specs) prompts.insert(render_generation_prompt(s));
    CHECK(prompts.size() == e.specs.size());
  }

  TEST_CASE("spec manifest layout") {
    const auto e = enumerate_specs({entry("Kind", Dictionary::morality, Direction::high)},
                                   {entry("Able", Dictionary::ability, Direction::low)}, 1);
    std::ostringstream out;
    write_spec_manifest(out, e.specs);
    const auto t = parse_csv(out.str());
    CHECK(t.header == std::vector<std::string>{"spec_id", "warmth_term", "competence_term", "order",
                                               "prompt_text"});
    CHECK(t.rows.size() == 4);
    CHECK(t.rows[2][2].empty());
  }
}
