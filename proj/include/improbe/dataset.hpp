#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "improbe/lexicon.hpp"
#include "improbe/types.hpp"

namespace improbe::dataset {

inline constexpr int kFormatVersion = 1;

enum class TokenPolicy { final_token, mean_pool };
std::string_view to_string(TokenPolicy p) noexcept;
TokenPolicy parse_token_policy(std::string_view s);

struct PromptRecord {
  std::string prompt_id;
  std::string spec_id;
  std::string text;
  std::string model_id;
  int sample_index = 0;
  std::size_t word_count = 0;  // whitespace tokens of text

  static PromptRecord make(std::string prompt_id, std::string spec_id, std::string text,
                           std::string model_id, int sample_index);
};

struct ActivationRecord {
  std::string prompt_id;
  int layer = 0;
  ActivationKind kind = ActivationKind::mlp;
  std::vector<float> vector;
};

struct DatasetManifest {
  std::string model_name;
  int num_layers = 0;
  std::map<ActivationKind, int> hidden_dim;  // declared kinds and their widths
  TokenPolicy token_policy = TokenPolicy::final_token;
  int samples_per_spec = 1;
  std::size_t record_count = 0;
  int format_version = kFormatVersion;
  std::string checksum;         // SHA-256 over the activation binaries; filled by the writer
  std::string tables_checksum;  // SHA-256 over prompts.csv then labels.csv; optional on read

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

using LabelTable = std::map<std::string, lexicon::SpecLabels>;  // keyed by spec_id

// File name of one activation matrix, e.g. acts_L3_mlp.f32.
std::string activation_file_name(int layer, ActivationKind kind);

// Buffers one matrix per (layer, kind) and commits the directory on finish().
// Nothing is visible at `dir` until finish() succeeds.
class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path dir, DatasetManifest manifest,
                std::vector<PromptRecord> prompts, LabelTable labels);

  void add(const ActivationRecord& record);
  std::string finish();  // returns the content checksum

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
  std::vector<PromptRecord> prompts_;
  LabelTable labels_;
  std::map<std::string, std::size_t> row_of_;
  std::map<std::pair<int, ActivationKind>, std::vector<float>> matrices_;
  std::map<std::pair<int, ActivationKind>, std::vector<bool>> filled_;
};

std::string write_dataset(const DatasetManifest& manifest, const std::vector<PromptRecord>& prompts,
                          const LabelTable& labels, std::span<const ActivationRecord> activations,
                          const std::filesystem::path& dir);

// Read-only handle. open() verifies the manifest, prompt table and checksum;
// activation matrices are loaded on demand by each matrix() call.
class Dataset {
 public:
  static Dataset open(const std::filesystem::path& dir);

  const DatasetManifest& manifest() const { return manifest_; }
  const std::vector<PromptRecord>& prompts() const { return prompts_; }
  const LabelTable& label_table() const { return labels_; }
  const std::filesystem::path& dir() const { return dir_; }

  // One row per prompt, in prompt order.
  Eigen::MatrixXf matrix(int layer, ActivationKind kind) const;
  // Label of every prompt on one dimension; nullopt when absent.
  std::vector<std::optional<Direction>> labels(Dimension dimension) const;

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
  std::vector<PromptRecord> prompts_;
  LabelTable labels_;
};

struct FoldAssignment {
  std::string prompt_id;
  int fold = 0;
  Dimension dimension = Dimension::warmth;
};

// Fold index per item. Each class is shuffled with `seed` and dealt
// round-robin, continuing the deal across classes, so fold sizes and
// per-fold class counts differ by at most one.
std::vector<int> stratified_folds(std::span<const Direction> labels, int k, std::uint64_t seed);

// Folds over the labeled subset of a prompt list.
std::vector<FoldAssignment> assign_folds(const std::vector<PromptRecord>& prompts,
                                         const std::vector<std::optional<Direction>>& labels,
                                         Dimension dimension, int k, std::uint64_t seed);

struct LengthStats {
  std::size_t count = 0;
  double mean_len = 0.0;
  double sd_len = 0.0;  // sample standard deviation; 0 for a single record
};

struct DimensionSummary {
  LengthStats high;
  LengthStats low;
};

DimensionSummary summarize(const std::vector<PromptRecord>& prompts,
                           const std::vector<std::optional<Direction>>& labels);
DimensionSummary summarize(const Dataset& data, Dimension dimension);

}  // namespace improbe::dataset
