#include <random>

#include "doctest.h"
#include "improbe/errors.hpp"
#include "improbe/bow.hpp"
#include "improbe/textstats.hpp"

using namespace improbe;
using namespace improbe::textstats;

namespace {

CorpusCounts counts(std::map<std::string, double> c) {
  CorpusCounts out;
  for (const auto& [t, v] : c) out.total += v;
  out.counts = std::move(c);
  return out;
}

const IdpResult& find(const std::vector<IdpResult>& r, const std::string& term) {
  for (const auto& x : r) {
    if (x.term == term) return x;
  }
  FAIL("term missing: " << term);
  return r.front();
}

}  // namespace

TEST_SUITE("textstats") {
  TEST_CASE("IDP hand computation") {
    const std::vector<std::string> t1{"a a b"}, t2{"a b b"};
    const auto s1 = count_texts(t1), s2 = count_texts(t2);
    const auto bg = counts({{"a", 1}, {"b", 1}});
    const auto r = idp_log_odds(s1, s2, bg, 2.0);
    REQUIRE(r.size() == 2);
    // alpha_w = 1, alpha_0 = 2, n = 3 on both sides.
    const double delta_a = std::log(3.0 / 2.0) - std::log(2.0 / 3.0);
    const double z_a = delta_a / std::sqrt(1.0 / 3.0 + 1.0 / 2.0);
    CHECK(r[0].term == "a");
    CHECK(std::abs(r[0].delta - delta_a) <= 1e-12);
    CHECK(std::abs(r[0].z - z_a) <= 1e-12);
    CHECK(r[0].freq == 0.5);
    CHECK(std::abs(r[1].z + z_a) <= 1e-12);
  }

  TEST_CASE("IDP symmetry properties") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      std::map<std::string, double> a, b, g;
      for (int t = 0; t < 12; ++t) {
        const std::string term = "t" + std::to_string(t);
        if (rng() % 4) a[term] = 1 + static_cast<double>(rng() % 20);
        if (rng() % 4) b[term] = 1 + static_cast<double>(rng() % 20);
        if (rng() % 3) g[term] = 1 + static_cast<double>(rng() % 50);
      }
      a["anchor"] = b["anchor"] = 1;
      const auto s1 = counts(a), s2 = counts(b), bg = counts(g);
      const auto fwd = idp_log_odds(s1, s2, bg, 50.0);
      const auto rev = idp_log_odds(s2, s1, bg, 50.0);
      for (const auto& r : fwd) {
        const auto& q = find(rev, r.term);
        CHECK(q.z == -r.z);
        CHECK(q.delta == -r.delta);
        CHECK((r.z > 0) == (r.delta > 0));
      }
      for (const auto& r : idp_log_odds(s1, s1, bg, 50.0)) CHECK(r.z == 0.0);
      for (std::size_t i = 1; i < fwd.size(); ++i) CHECK(fwd[i - 1].z >= fwd[i].z);
    }
  }

  TEST_CASE("IDP unseen background terms get the floor count") {
    const auto s1 = counts({{"x", 3}, {"y", 1}}), s2 = counts({{"x", 1}, {"y", 3}});
    const auto bg = counts({{"x", 10}});
    const auto r = idp_log_odds(s1, s2, bg, 10.0);
    const double ay = 10.0 * kUnseenBackgroundCount / (10.0 + kUnseenBackgroundCount);
    const double dy = std::log((1 + ay) / (4 + 10 - 1 - ay)) - std::log((3 + ay) / (4 + 10 - 3 - ay));
    CHECK(find(r, "y").delta == doctest::Approx(dy).epsilon(1e-12));
    CHECK_THROWS_AS(idp_log_odds(s1, s2, bg, 0.0), Error);
    CHECK_THROWS_AS(idp_log_odds(s1, CorpusCounts{}, bg, 1.0), Error);
  }

  TEST_CASE("token counts sum to the total") {
    const std::vector<std::string> texts{"The cat, the hat.", "A cat!"};
    const auto c = count_texts(texts, "x");
    double sum = 0;
    for (const auto& [t, v] : c.counts) sum += v;
    CHECK(sum == c.total);
    CHECK(c.counts.at("cat") == 2);
    CHECK(c.counts.at("the") == 2);
  }

  TEST_CASE("dictionary counting") {
    const auto lex = parse_category_lexicon(
        "# comment\nhedge\tmay\nhedge\tperhaps\ntentative\twonder*\nweasel\tsome people\nweasel\tsome\n");
    CHECK(dictionary_count("it may perhaps help", lex).at("hedge") == 2);
    CHECK(dictionary_count("I was wondering", lex).at("tentative") == 1);
    const auto empty = dictionary_count("", lex);
    REQUIRE(empty.size() == 3);
    for (const auto& [cat, n] : empty) CHECK(n == 0);
    // Longest match consumes "some people"; the lone "some" counts separately.
    CHECK(dictionary_count("Some people say some things", lex).at("weasel") == 2);
    CHECK(dictionary_count("MAY, Perhaps!", lex).at("hedge") == 2);
    CHECK(dictionary_count("wonder wonderful wander", lex).at("tentative") == 2);
    CHECK(total_matches("may wonder some people", lex) == 3);
  }

  TEST_CASE("dictionary counts add over separated concatenation") {
    const auto lex = parse_category_lexicon("w\tsome people\nh\tmay\nt\tseem*\n");
    const std::vector<std::string> parts{"we may see some", "people who seem fine", "MAY may"};
    std::map<std::string, std::size_t> sum;
    for (const auto& p : parts) {
      for (const auto& [c, n] : dictionary_count(p, lex)) sum[c] += n;
    }
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) tokens.push_back("");  // separator token no pattern can match
      for (auto& t : bow::preprocess_tokenize(parts[i])) tokens.push_back(t);
    }
    CHECK(dictionary_count_tokens(tokens, lex) == sum);
  }

  TEST_CASE("lexicon file errors") {
    CHECK_THROWS_AS(parse_category_lexicon("hedge may\n"), Error);
    CHECK_THROWS_AS(parse_category_lexicon("hedge\two*rd\n"), Error);
    CHECK_THROWS_AS(parse_category_lexicon("hedge\t*\n"), Error);
  }

  TEST_CASE("bundled hedge list") {
    const auto lex = read_category_lexicon(IMPROBE_DATA_DIR "/hedges.tsv");
    std::size_t n = 0;
    for (const auto& [c, p] : lex.categories) n += p.size();
    CHECK(n == 30);
    CHECK(lex.categories.size() == 3);
  }

  TEST_CASE("consistency report") {
    using D = Direction;
    using A = ReportedAnswer;
    const std::vector<D> prov{D::high, D::low};
    const std::vector<A> rep{A::positive, A::negative};
    CHECK(consistency_report(prov, rep).accuracy == 1.0);
    const std::vector<A> allpos{A::positive, A::positive};
    const auto r = consistency_report(prov, allpos);
    CHECK(r.accuracy == 0.5);
    CHECK(r.positive_rate == 1.0);
    CHECK_FALSE(r.mean_prob_gap.has_value());
    const std::vector<double> ps{0.9, 0.2}, ns{0.1, 0.7};
    CHECK(*consistency_report(prov, rep, ps, ns).mean_prob_gap == doctest::Approx(0.15));
    const std::vector<A> unp{A::unparsed, A::negative};
    CHECK(consistency_report(prov, unp).accuracy == 0.5);
    const std::vector<D> one{D::high};
    CHECK_THROWS_AS(consistency_report(one, rep), Error);
    // Swap high/low together with positive/negative.
    std::mt19937_64 rng(1);
    std::vector<D> p;
    std::vector<A> a;
    for (int i = 0; i < 50; ++i) {
      p.push_back(rng() % 2 ? D::high : D::low);
      a.push_back(rng() % 3 == 0 ? A::unparsed : (rng() % 2 ? A::positive : A::negative));
    }
    std::vector<D> ps2;
    std::vector<A> as2;
    for (auto d : p) ps2.push_back(d == D::high ? D::low : D::high);
    for (auto x : a) as2.push_back(x == A::positive ? A::negative : x == A::negative ? A::positive : x);
    CHECK(consistency_report(p, a).accuracy == consistency_report(ps2, as2).accuracy);
    CHECK(parse_reported_answer(" Positive ") == A::positive);
    CHECK(parse_reported_answer("") == A::unparsed);
    CHECK_THROWS_AS(parse_reported_answer("maybe"), Error);
  }
}
