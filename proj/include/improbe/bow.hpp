#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "improbe/probes.hpp"

namespace improbe::bow {

// Lowercases, deletes every Unicode punctuation character (general category
// P*), then splits on Unicode whitespace. "don't" becomes "dont".
std::vector<std::string> preprocess_tokenize(std::string_view text);

class Vocab {
 public:
  Vocab() = default;
  // Terms must be unique; order is preserved as the feature index order.
  explicit Vocab(std::vector<std::string> terms, std::vector<std::size_t> freqs = {});

  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::size_t>& freqs() const noexcept { return freqs_; }
  // -1 when the term is out of vocabulary.
  long index_of(const std::string& term) const;

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> freqs_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Keeps the max_size most frequent terms: frequency descending, then
// lexicographic.
Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t max_size = 10000);

Eigen::SparseVector<double> featurize(std::string_view text, const Vocab& vocab);
Eigen::SparseVector<double> featurize_tokens(const std::vector<std::string>& tokens,
                                             const Vocab& vocab);
// Dense n x |V| count matrix for the trainer.
Eigen::MatrixXd featurize_dense(std::span<const std::string> texts, const Vocab& vocab);

// One term per line in rank order.
void write_vocab(const std::filesystem::path& path, const Vocab& vocab);
Vocab read_vocab(const std::filesystem::path& path);

struct BowBaseline {
  Vocab vocab;
  probes::CvResult result;
};

// Unigram-count logistic classifier evaluated with the probe CV protocol.
// The vocabulary is built from all texts (it uses no labels).
BowBaseline bow_cross_validate(std::span<const std::string> texts, std::span<const Direction> labels,
                               const probes::CvOptions& options, std::size_t max_vocab = 10000);

}  // namespace improbe::bow
