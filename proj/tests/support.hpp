#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "improbe/dataset.hpp"

namespace improbe::testing {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, const std::string& content);
std::string slurp(const fs::path& path);

// Calls the CLI entry point in process; argv[0] is supplied.
int run_cli(std::vector<std::string> args);

struct SyntheticSpec {
  int n = 40;            // prompts; first half warmth-high, second half warmth-low
  int num_layers = 2;
  int dim = 3;
  std::vector<ActivationKind> kinds{ActivationKind::mlp};
  int informative_layer = 1;  // warmth label shifts feature 0 on this layer; -1 for none
  double separation = 4.0;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  dataset::DatasetManifest manifest;
  std::vector<dataset::PromptRecord> prompts;
  dataset::LabelTable labels;
  std::vector<dataset::ActivationRecord> activations;
};

// Gaussian activations; competence labels alternate so both dimensions are usable.
SyntheticData make_synthetic(const SyntheticSpec& spec);

// Writes make_synthetic(spec) to dir and returns the checksum.
std::string write_synthetic(const fs::path& dir, const SyntheticSpec& spec);

// Small input files for every CLI subcommand, written into dir:
// lexicon.csv, corpus.csv, hedges.tsv, ratings.csv, consistency.csv, and the
// ingest trio prompts.csv / labels.csv / acts.csv.
void write_cli_fixtures(const fs::path& dir, std::uint64_t seed = 1);

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double sd = 1.0);

}  // namespace improbe::testing
