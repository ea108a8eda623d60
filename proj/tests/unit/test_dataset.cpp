#include <fstream>
#include <random>

#include "doctest.h"
#include "improbe/dataset.hpp"
#include "improbe/errors.hpp"
#include "support.hpp"

using namespace improbe;
using namespace improbe::dataset;
using improbe::testing::TempDir;

namespace {

DatasetManifest small_manifest(int layers, int dim) {
  DatasetManifest m;
  m.model_name = "toy";
  m.num_layers = layers;
  m.hidden_dim[ActivationKind::mlp] = dim;
  m.samples_per_spec = 10;
  return m;
}

std::vector<PromptRecord> two_prompts() {
  return {PromptRecord::make("a", "s1", "hello there", "m", 0),
          PromptRecord::make("b", "s1", "one two three", "m", 1)};
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("two prompts, one layer, dim 4 is a 32-byte matrix") {
    TempDir dir("ds");
    const std::vector<ActivationRecord> acts{{"a", 0, ActivationKind::mlp, {1, 2, 3, 4}},
                                             {"b", 0, ActivationKind::mlp, {5, 6, 7, 8}}};
    write_dataset(small_manifest(1, 4), two_prompts(), {}, acts, dir / "d");
    CHECK(std::filesystem::file_size(dir / "d" / "acts_L0_mlp.f32") == 32);
    const auto bytes = testing::slurp(dir / "d" / "acts_L0_mlp.f32");
    float first = 0;
    std::memcpy(&first, bytes.data(), 4);
    CHECK(first == 1.0f);
    CHECK(static_cast<unsigned char>(bytes[3]) == 0x3f);  // 1.0f little-endian
  }

  TEST_CASE("empty prompt list is a valid dataset") {
    TempDir dir("ds");
    write_dataset(small_manifest(1, 4), {}, {}, {}, dir / "d");
    const auto d = Dataset::open(dir / "d");
    CHECK(d.manifest().record_count == 0);
    CHECK(d.matrix(0, ActivationKind::mlp).rows() == 0);
  }

  TEST_CASE("round trip preserves manifest, prompts, labels and bits") {
    TempDir dir("ds");
    testing::SyntheticSpec spec;
    spec.kinds = {ActivationKind::mlp, ActivationKind::z};
    const auto data = testing::make_synthetic(spec);
    const auto sum = write_dataset(data.manifest, data.prompts, data.labels, data.activations, dir / "d");
    const auto d = Dataset::open(dir / "d");
    CHECK(d.manifest().checksum == sum);
    auto expected = data.manifest;
    expected.record_count = data.prompts.size();
    expected.checksum = sum;
    expected.tables_checksum = d.manifest().tables_checksum;
    CHECK(expected.tables_checksum.size() == 64);
    CHECK(d.manifest() == expected);
    CHECK(d.label_table() == data.labels);
    REQUIRE(d.prompts().size() == data.prompts.size());
    for (std::size_t i = 0; i < data.prompts.size(); ++i) {
      CHECK(d.prompts()[i].text == data.prompts[i].text);
      CHECK(d.prompts()[i].word_count == data.prompts[i].word_count);
    }
    for (const auto& a : data.activations) {
      const auto m = d.matrix(a.layer, a.kind);
      const auto row = std::stoul(a.prompt_id.substr(1));
      for (std::size_t j = 0; j < a.vector.size(); ++j) {
        CHECK(std::memcmp(&m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)), &a.vector[j], 4) == 0);
      }
    }
  }

  TEST_CASE("layer selection shape") {
    TempDir dir("ds");
    testing::SyntheticSpec spec;
    spec.n = 20;
    spec.num_layers = 16;
    spec.dim = 5;
    testing::write_synthetic(dir / "d", spec);
    const auto d = Dataset::open(dir / "d");
    const auto m = d.matrix(3, ActivationKind::mlp);
    CHECK(m.rows() == 20);
    CHECK(m.cols() == 5);
    CHECK_THROWS_AS(d.matrix(16, ActivationKind::mlp), Error);
    CHECK_THROWS_AS(d.matrix(0, ActivationKind::residual), Error);
  }

  TEST_CASE("writer rejects bad records") {
    TempDir dir("ds");
    DatasetWriter w(dir / "d", small_manifest(1, 2), two_prompts(), {});
    CHECK_THROWS_AS(w.add({"zz", 0, ActivationKind::mlp, {1, 2}}), Error);
    CHECK_THROWS_AS(w.add({"a", 0, ActivationKind::mlp, {1, 2, 3}}), Error);
    CHECK_THROWS_AS(w.add({"a", 1, ActivationKind::mlp, {1, 2}}), Error);
    CHECK_THROWS_AS(w.add({"a", 0, ActivationKind::z, {1, 2}}), Error);
    CHECK_THROWS_AS(w.add({"a", 0, ActivationKind::mlp, {1, std::nanf("")}}), Error);
    w.add({"a", 0, ActivationKind::mlp, {1, 2}});
    CHECK_THROWS_AS(w.add({"a", 0, ActivationKind::mlp, {1, 2}}), Error);
    CHECK_THROWS_AS(w.finish(), Error);  // "b" missing
    CHECK_FALSE(std::filesystem::exists(dir / "d"));
  }

  TEST_CASE("prompt invariants") {
    TempDir dir("ds");
    auto dup = two_prompts();
    dup[1].prompt_id = "a";
    CHECK_THROWS_AS(DatasetWriter(dir / "d", small_manifest(1, 2), dup, {}), Error);
    auto idx = two_prompts();
    idx[0].sample_index = 10;
    CHECK_THROWS_AS(DatasetWriter(dir / "d", small_manifest(1, 2), idx, {}), Error);
  }

  TEST_CASE("corruption is rejected") {
    TempDir dir("ds");
    testing::write_synthetic(dir / "d", {});
    const auto f = dir / "d" / "acts_L1_mlp.f32";
    const auto original = testing::slurp(f);

    SUBCASE("truncated") {
      testing::write_text(f, original.substr(0, original.size() - 4));
      CHECK_THROWS_WITH_AS(Dataset::open(dir / "d"), doctest::Contains("checksum mismatch"), Error);
    }
    SUBCASE("flipped bit") {
      auto bad = original;
      bad[7] ^= 0x01;
      testing::write_text(f, bad);
      CHECK_THROWS_WITH_AS(Dataset::open(dir / "d"), doctest::Contains("checksum mismatch"), Error);
    }
    SUBCASE("edited prompt table") {
      auto p = testing::slurp(dir / "d" / "prompts.csv");
      p[p.size() - 2] ^= 0x20;
      testing::write_text(dir / "d" / "prompts.csv", p);
      CHECK_THROWS_WITH_AS(Dataset::open(dir / "d"), doctest::Contains("checksum mismatch"), Error);
    }
    SUBCASE("missing layer file") {
      std::filesystem::remove(f);
      CHECK_THROWS_AS(Dataset::open(dir / "d"), Error);
    }
    SUBCASE("unsupported version") {
      auto m = testing::slurp(dir / "d" / "manifest.json");
      const auto pos = m.find("\"format_version\": 1");
      REQUIRE(pos != std::string::npos);
      m.replace(pos, 19, "\"format_version\": 9");
      testing::write_text(dir / "d" / "manifest.json", m);
      CHECK_THROWS_AS(Dataset::open(dir / "d"), Error);
    }
  }

  TEST_CASE("writer does not clobber foreign directories") {
    TempDir dir("ds");
    std::filesystem::create_directories(dir / "d");
    testing::write_text(dir / "d" / "notes.txt", "keep me");
    CHECK_THROWS_AS(testing::write_synthetic(dir / "d", {}), Error);
    CHECK(testing::slurp(dir / "d" / "notes.txt") == "keep me");
  }

  TEST_CASE("stratified folds: exact balance") {
    std::vector<Direction> y(100, Direction::high);
    std::fill(y.begin() + 50, y.end(), Direction::low);
    const auto f = stratified_folds(y, 5, 7);
    CHECK(f == stratified_folds(y, 5, 7));
    for (int k = 0; k < 5; ++k) {
      int hi = 0, lo = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (f[i] == k) (y[i] == Direction::high ? hi : lo)++;
      }
      CHECK(hi == 10);
      CHECK(lo == 10);
    }
  }

  TEST_CASE("stratified folds: 60/40 gives 12/8 per fold") {
    std::vector<Direction> y(100, Direction::high);
    std::fill(y.begin() + 60, y.end(), Direction::low);
    const auto f = stratified_folds(y, 5, 123);
    for (int k = 0; k < 5; ++k) {
      int hi = 0, lo = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (f[i] == k) (y[i] == Direction::high ? hi : lo)++;
      }
      CHECK(hi == 12);
      CHECK(lo == 8);
    }
  }

  TEST_CASE("stratified folds: partition and ratio property") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 250 + static_cast<int>(rng() % 500);
      const int k = 2 + static_cast<int>(rng() % 4);
      std::vector<Direction> y;
      const double p = 0.2 + 0.6 * static_cast<double>(rng() % 1000) / 1000.0;
      for (int i = 0; i < n; ++i) {
        y.push_back(static_cast<double>(rng() % 1000) / 1000.0 < p ? Direction::high : Direction::low);
      }
      const auto f = stratified_folds(y, k, rng());
      const double global =
          static_cast<double>(std::count(y.begin(), y.end(), Direction::high)) / static_cast<double>(n);
      std::vector<int> size(k, 0), high(k, 0);
      for (int i = 0; i < n; ++i) {
        REQUIRE(f[i] >= 0);
        REQUIRE(f[i] < k);
        ++size[f[i]];
        high[f[i]] += y[i] == Direction::high;
      }
      for (int j = 0; j < k; ++j) {
        CHECK(std::abs(size[j] - n / k) <= 1);
        CHECK(std::abs(static_cast<double>(high[j]) / size[j] - global) <= 0.02);
      }
    }
  }

  TEST_CASE("stratified folds: errors") {
    const std::vector<Direction> y{Direction::high, Direction::high, Direction::low};
    CHECK_THROWS_AS(stratified_folds(y, 2, 0), Error);
    CHECK_THROWS_AS(stratified_folds(y, 1, 0), Error);
    const std::vector<Direction> one{Direction::high, Direction::high};
    CHECK_THROWS_AS(stratified_folds(one, 2, 0), Error);
  }

  TEST_CASE("assign_folds covers exactly the labeled subset") {
    const auto data = testing::make_synthetic({});
    auto labels = std::vector<std::optional<Direction>>(data.prompts.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i % 3) labels[i] = i < labels.size() / 2 ? Direction::high : Direction::low;
    }
    const auto a = assign_folds(data.prompts, labels, Dimension::warmth, 5, 1);
    CHECK(a.size() == static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                             [](const auto& l) { return l.has_value(); })));
  }

  TEST_CASE("summarize") {
    const std::vector<PromptRecord> one{PromptRecord::make("a", "s", "one two three four five", "m", 0)};
    const auto s = summarize(one, {Direction::high});
    CHECK(s.high.count == 1);
    CHECK(s.high.mean_len == 5.0);
    CHECK(s.high.sd_len == 0.0);
    CHECK(s.low.count == 0);
    CHECK_THROWS_AS(summarize(one, {std::nullopt}), Error);

    const std::vector<PromptRecord> three{PromptRecord::make("a", "s", "a b", "m", 0),
                                          PromptRecord::make("b", "s", "a b c d", "m", 1),
                                          PromptRecord::make("c", "s", "a", "m", 2)};
    const auto t = summarize(three, {Direction::low, Direction::low, std::nullopt});
    CHECK(t.low.count == 2);
    CHECK(t.low.mean_len == 3.0);
    CHECK(t.low.sd_len == doctest::Approx(std::sqrt(2.0)));
  }
}
