#include <random>

#include "doctest.h"
#include "improbe/agreement.hpp"
#include "improbe/errors.hpp"
#include "oracles.hpp"

using namespace improbe;
using namespace improbe::textstats;

TEST_SUITE("agreement") {
  TEST_CASE("kappa fixtures") {
    const std::vector<int> a{1, 1, 0, 0}, b{1, 0, 0, 1};
    CHECK(cohen_kappa(a, a) == 1.0);
    CHECK(cohen_kappa(a, b) == 0.0);
    const std::vector<std::string> s1{"x", "y", "x"}, s2{"x", "y", "y"};
    CHECK(cohen_kappa(s1, s1) == 1.0);
    CHECK(cohen_kappa(s1, s2) <= 1.0);
    const std::vector<int> same{2, 2, 2};
    CHECK_THROWS_AS(cohen_kappa(same, same), Error);
    const std::vector<int> shorter{1};
    CHECK_THROWS_AS(cohen_kappa(a, shorter), Error);
  }

  TEST_CASE("kappa never exceeds one") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
      std::vector<int> a(12), b(12);
      for (auto& v : a) v = static_cast<int>(rng() % 3);
      for (auto& v : b) v = static_cast<int>(rng() % 3);
      a[0] = 0;
      a[1] = 1;
      CHECK(cohen_kappa(a, b) <= 1.0 + 1e-15);
    }
  }

  TEST_CASE("alpha is one on perfect agreement at every level") {
    const RatingTable t{{1, 1, 1}, {3, 3, std::nullopt}, {2, 2, 2}, {4, std::nullopt, 4}};
    for (auto level : {AlphaLevel::nominal, AlphaLevel::ordinal, AlphaLevel::interval}) {
      CHECK(krippendorff_alpha(t, level) == 1.0);
    }
  }

  TEST_CASE("alpha two-by-two nominal fixture") {
    const RatingTable t{{1, 2}, {2, 1}};
    // Every pair disagrees: D_o = 1, D_e = 8/12, alpha = 1 - 1.5.
    const double got = krippendorff_alpha(t, AlphaLevel::nominal);
    CHECK(got == doctest::Approx(testing::alpha_bruteforce(t, AlphaLevel::nominal)).epsilon(1e-12));
    CHECK(got == doctest::Approx(-0.5));
  }

  TEST_CASE("alpha matches the brute-force oracle") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 60; ++trial) {
      const auto t = testing::random_rating_table(rng, 3 + static_cast<int>(rng() % 6), 2 + static_cast<int>(rng() % 3));
      for (auto level : {AlphaLevel::nominal, AlphaLevel::ordinal, AlphaLevel::interval}) {
        const double expect = testing::alpha_bruteforce(t, level);
        if (!std::isfinite(expect)) continue;
        CHECK(std::abs(krippendorff_alpha(t, level) - expect) <= 1e-9);
      }
    }
  }

  TEST_CASE("alpha needs pairable data") {
    const RatingTable t{{1, std::nullopt}, {2, 2}};
    CHECK_THROWS_AS(krippendorff_alpha(t, AlphaLevel::nominal), Error);
    CHECK_THROWS_AS(parse_alpha_level("ratio"), Error);
  }

  TEST_CASE("binarize") {
    const std::vector<int> one{1}, four{4}, mix{2, 3, 3};
    CHECK(binarize_ratings(one) == std::vector<Choice>{Choice::first});
    CHECK(binarize_ratings(four) == std::vector<Choice>{Choice::second});
    CHECK(binarize_ratings(mix) == std::vector<Choice>{Choice::first, Choice::second, Choice::second});
    const std::vector<int> bad{0};
    CHECK_THROWS_AS(binarize_ratings(bad), Error);
  }

  TEST_CASE("agreement report") {
    const RatingTable t{{1, 2, 1}, {4, 4, 3}, {2, 1, std::nullopt}, {3, 4, 4}, {1, 3, 2}};
    const auto r = agreement_report(t, AlphaLevel::ordinal);
    CHECK(r.n_items == 5);
    CHECK(r.cohen_kappa <= 1.0);
    CHECK(r.krippendorff_alpha == doctest::Approx(testing::alpha_bruteforce(t, AlphaLevel::ordinal)));
    CHECK(r.spearman_raw <= 1.0);
    const RatingTable perfect{{1, 1}, {4, 4}, {2, 2}, {3, 3}};
    const auto p = agreement_report(perfect, AlphaLevel::nominal);
    CHECK(p.cohen_kappa == 1.0);
    CHECK(p.krippendorff_alpha == 1.0);
    CHECK(p.krippendorff_alpha_binarized == 1.0);
    CHECK(p.spearman_raw == doctest::Approx(1.0));
  }
}
