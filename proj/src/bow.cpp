#include "improbe/bow.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "improbe/csv.hpp"
#include "improbe/errors.hpp"

namespace improbe::bow {

std::vector<std::string> preprocess_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    if (c < 0) continue;  // malformed byte sequence
    if (u_isUWhiteSpace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (U_GET_GC_MASK(c) & U_GC_P_MASK) continue;
    const UChar32 lower = u_tolower(c);
    std::uint8_t buf[U8_MAX_LENGTH];
    std::int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, lower, error);
    if (error) continue;
    current.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocab::Vocab(std::vector<std::string> terms, std::vector<std::size_t> freqs)
    : terms_(std::move(terms)), freqs_(std::move(freqs)) {
  if (freqs_.empty()) freqs_.assign(terms_.size(), 0);
  if (freqs_.size() != terms_.size()) {
    fail(ErrorKind::invalid_argument, "vocab terms and frequencies differ in length");
  }
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) {
      fail(ErrorKind::invalid_argument, "duplicate vocab term '" + terms_[i] + "'");
    }
  }
}

long Vocab::index_of(const std::string& term) const {
  const auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t max_size) {
  if (max_size < 1) fail(ErrorKind::invalid_argument, "max vocabulary size must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& t : doc) ++counts[t];
  }
  if (counts.empty()) fail(ErrorKind::invalid_argument, "cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& [t, c] : ranked) {
    terms.push_back(t);
    freqs.push_back(c);
  }
  return Vocab(std::move(terms), std::move(freqs));
}

Eigen::SparseVector<double> featurize_tokens(const std::vector<std::string>& tokens,
                                             const Vocab& vocab) {
  std::map<long, double> counts;
  for (const auto& t : tokens) {
    const long idx = vocab.index_of(t);
    if (idx >= 0) counts[idx] += 1.0;
  }
  Eigen::SparseVector<double> v(static_cast<Eigen::Index>(vocab.size()));
  v.reserve(static_cast<Eigen::Index>(counts.size()));
  for (const auto& [idx, c] : counts) v.insertBack(idx) = c;
  return v;
}

Eigen::SparseVector<double> featurize(std::string_view text, const Vocab& vocab) {
  return featurize_tokens(preprocess_tokenize(text), vocab);
}

Eigen::MatrixXd featurize_dense(std::span<const std::string> texts, const Vocab& vocab) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(texts.size()),
                                            static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const Eigen::SparseVector<double> row = featurize(texts[i], vocab);
    for (Eigen::SparseVector<double>::InnerIterator it(row); it; ++it) {
      X(static_cast<Eigen::Index>(i), it.index()) = it.value();
    }
  }
  return X;
}

void write_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  std::string out;
  for (const auto& t : vocab.terms()) {
    out += t;
    out += '\n';
  }
  write_file_atomic(path, out);
}

Vocab read_vocab(const std::filesystem::path& path) {
  std::vector<std::string> terms;
  const std::string content = read_file(path);
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    if (end > start) terms.emplace_back(content.substr(start, end - start));
    start = end + 1;
  }
  return Vocab(std::move(terms));
}

BowBaseline bow_cross_validate(std::span<const std::string> texts, std::span<const Direction> labels,
                               const probes::CvOptions& options, std::size_t max_vocab) {
  if (texts.size() != labels.size()) {
    fail(ErrorKind::invalid_argument, "texts and labels differ in length");
  }
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(texts.size());
  for (const auto& t : texts) corpus.push_back(preprocess_tokenize(t));
  BowBaseline out;
  out.vocab = build_vocab(corpus, max_vocab);
  const Eigen::MatrixXd X = featurize_dense(texts, out.vocab);
  out.result = probes::cross_validate(X, labels, options);
  return out;
}

}  // namespace improbe::bow
