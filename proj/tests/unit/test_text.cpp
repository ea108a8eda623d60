#include <random>

#include "doctest.h"
#include "improbe/errors.hpp"
#include "improbe/hashing.hpp"
#include "improbe/stats.hpp"
#include "improbe/text.hpp"
#include "improbe/types.hpp"

using namespace improbe;

TEST_SUITE("text") {
  TEST_CASE("whitespace word counts") {
    CHECK(word_count("") == 0);
    CHECK(word_count("  one ") == 1);
    CHECK(word_count("a\tb\nc  d") == 4);
    CHECK(split_whitespace(" x  y ") == std::vector<std::string>{"x", "y"});
  }

  TEST_CASE("utf8 length counts code points") {
    CHECK(utf8_length("abc") == 3);
    CHECK(utf8_length("caf\xc3\xa9") == 4);
  }

  TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
      CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
  }

  TEST_CASE("numeric parsing is strict") {
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
    CHECK_THROWS_AS(parse_int("12.0"), Error);
    CHECK(parse_int(" 42 ") == 42);
  }

  TEST_CASE("enum parsing") {
    CHECK(parse_dimension("Warmth") == Dimension::warmth);
    CHECK(parse_kind("residual") == ActivationKind::residual);
    CHECK(parse_direction("LOW") == Direction::low);
    CHECK_FALSE(parse_optional_direction("").has_value());
    CHECK_THROWS_AS(parse_kind("attn"), Error);
  }

  TEST_CASE("sha256 known vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    Sha256 h;
    h.update(std::string_view("a"));
    h.update(std::string_view("bc"));
    CHECK(h.hex_digest() == sha256_hex("abc"));
  }

  TEST_CASE("derived seeds differ by coordinate") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  }

  TEST_CASE("t quantile and confidence half width") {
    CHECK(stats::t_quantile(0.975, 4) == doctest::Approx(2.776445).epsilon(1e-6));
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(stats::ci95_half_width(v) == doctest::Approx(2.776445 * std::sqrt(2.5) / std::sqrt(5.0)).epsilon(1e-6));
    const std::vector<double> c{0.7, 0.7, 0.7};
    CHECK(stats::ci95_half_width(c) == 0.0);
    CHECK(stats::normal_two_sided_p(1.959964) == doctest::Approx(0.05).epsilon(1e-5));
  }

  TEST_CASE("average ranks share ties") {
    const std::vector<double> v{10, 20, 20, 5};
    CHECK(stats::average_ranks(v) == std::vector<double>{2, 3.5, 3.5, 1});
  }
}
