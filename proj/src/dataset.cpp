#include "improbe/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <random>
#include <set>
#include <sstream>

#include "improbe/csv.hpp"
#include "improbe/errors.hpp"
#include "improbe/hashing.hpp"
#include "improbe/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace improbe::dataset {
namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kPromptsName = "prompts.csv";
constexpr const char* kLabelsName = "labels.csv";

std::vector<ActivationKind> declared_kinds(const DatasetManifest& m) {
  std::vector<ActivationKind> kinds;
  for (ActivationKind k : kAllKinds) {
    if (m.hidden_dim.count(k)) kinds.push_back(k);
  }
  return kinds;
}

std::string encode_le(const std::vector<float>& values) {
  std::string bytes(values.size() * sizeof(float), '\0');
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(bytes.data(), values.data(), bytes.size());
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto u = std::bit_cast<std::uint32_t>(values[i]);
      for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
    }
  }
  return bytes;
}

void decode_le(std::string_view bytes, float* out) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out, bytes.data(), bytes.size());
  } else {
    for (std::size_t i = 0; i < bytes.size() / 4; ++i) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) {
        u |= std::uint32_t(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
      }
      out[i] = std::bit_cast<float>(u);
    }
  }
}

json manifest_to_json(const DatasetManifest& m) {
  json dims = json::object();
  for (const auto& [kind, d] : m.hidden_dim) dims[std::string(to_string(kind))] = d;
  return json{{"format_version", m.format_version},
              {"model_name", m.model_name},
              {"num_layers", m.num_layers},
              {"hidden_dim", dims},
              {"token_policy", std::string(to_string(m.token_policy))},
              {"samples_per_spec", m.samples_per_spec},
              {"record_count", m.record_count},
              {"checksum", m.checksum},
              {"tables_checksum", m.tables_checksum}};
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kFormatVersion) {
      fail(ErrorKind::format,
           "unsupported dataset format_version " + std::to_string(m.format_version));
    }
    m.model_name = j.at("model_name").get<std::string>();
    m.num_layers = j.at("num_layers").get<int>();
    for (const auto& [name, d] : j.at("hidden_dim").items()) {
      m.hidden_dim[parse_kind(name)] = d.get<int>();
    }
    m.token_policy = parse_token_policy(j.at("token_policy").get<std::string>());
    m.samples_per_spec = j.at("samples_per_spec").get<int>();
    m.record_count = j.at("record_count").get<std::size_t>();
    m.checksum = j.at("checksum").get<std::string>();
    if (j.contains("tables_checksum")) m.tables_checksum = j.at("tables_checksum").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("malformed manifest: ") + e.what());
  }
  if (m.num_layers < 1) fail(ErrorKind::format, "manifest num_layers must be >= 1");
  if (m.hidden_dim.empty()) fail(ErrorKind::format, "manifest declares no activation kinds");
  for (const auto& [kind, d] : m.hidden_dim) {
    if (d < 1) fail(ErrorKind::format, "manifest hidden_dim must be >= 1");
  }
  return m;
}

void validate_manifest(const DatasetManifest& m) {
  if (m.num_layers < 1) fail(ErrorKind::invalid_argument, "num_layers must be >= 1");
  if (m.hidden_dim.empty()) fail(ErrorKind::invalid_argument, "no activation kinds declared");
  for (const auto& [kind, d] : m.hidden_dim) {
    if (d < 1) fail(ErrorKind::invalid_argument, "hidden_dim must be >= 1");
  }
  if (m.samples_per_spec < 1) fail(ErrorKind::invalid_argument, "samples_per_spec must be >= 1");
}

void validate_prompts(const std::vector<PromptRecord>& prompts, int samples_per_spec) {
  std::set<std::string> ids;
  for (const auto& p : prompts) {
    if (!ids.insert(p.prompt_id).second) {
      fail(ErrorKind::invalid_argument, "duplicate prompt_id '" + p.prompt_id + "'");
    }
    if (p.sample_index < 0 || p.sample_index >= samples_per_spec) {
      fail(ErrorKind::invalid_argument, "sample_index out of range for '" + p.prompt_id + "'");
    }
    if (p.word_count != word_count(p.text)) {
      fail(ErrorKind::invalid_argument, "word_count disagrees with text for '" + p.prompt_id + "'");
    }
  }
}

std::string prompts_csv(const std::vector<PromptRecord>& prompts) {
  std::ostringstream out;
  CsvWriter csv(out);
  csv.row({"prompt_id", "spec_id", "model_id", "sample_index", "text"});
  for (const auto& p : prompts) {
    csv.row({p.prompt_id, p.spec_id, p.model_id, std::to_string(p.sample_index), p.text});
  }
  return out.str();
}

std::string labels_csv(const LabelTable& labels) {
  std::ostringstream out;
  CsvWriter csv(out);
  csv.row({"spec_id", "warmth", "competence"});
  for (const auto& [spec_id, l] : labels) {
    csv.row({spec_id, l.warmth ? std::string(to_string(*l.warmth)) : "",
             l.competence ? std::string(to_string(*l.competence)) : ""});
  }
  return out.str();
}

std::vector<PromptRecord> parse_prompts(const CsvTable& t) {
  const std::vector<std::string> expected = {"prompt_id", "spec_id", "model_id", "sample_index",
                                             "text"};
  if (t.header != expected) fail(ErrorKind::format, "prompts.csv has an unexpected header");
  std::vector<PromptRecord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    out.push_back(PromptRecord::make(r[0], r[1], r[4], r[2], static_cast<int>(parse_int(r[3]))));
  }
  return out;
}

LabelTable parse_labels(const CsvTable& t) {
  LabelTable out;
  const auto id = t.require("spec_id");
  const auto w = t.require("warmth");
  const auto c = t.require("competence");
  for (const auto& r : t.rows) {
    out[r[id]] = {parse_optional_direction(r[w]), parse_optional_direction(r[c])};
  }
  return out;
}

// Replaces `dir` with `staging`. Refuses to clobber a directory that is not
// an earlier dataset.
void commit_directory(const fs::path& staging, const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir) || (!fs::is_empty(dir) && !fs::exists(dir / kManifestName))) {
      fs::remove_all(staging, ec);
      fail(ErrorKind::io, "refusing to overwrite non-dataset path '" + dir.string() + "'");
    }
    fs::remove_all(dir, ec);
  }
  fs::rename(staging, dir, ec);
  if (ec) {
    fs::remove_all(staging, ec);
    fail(ErrorKind::io, "cannot commit dataset to '" + dir.string() + "'");
  }
}

}  // namespace

std::string_view to_string(TokenPolicy p) noexcept {
  return p == TokenPolicy::final_token ? "final_token" : "mean_pool";
}

TokenPolicy parse_token_policy(std::string_view s) {
  const auto v = trim(s);
  if (v == "final_token") return TokenPolicy::final_token;
  if (v == "mean_pool") return TokenPolicy::mean_pool;
  fail(ErrorKind::format, "unknown token_policy '" + std::string(s) + "'");
}

PromptRecord PromptRecord::make(std::string prompt_id, std::string spec_id, std::string text,
                                std::string model_id, int sample_index) {
  PromptRecord p{std::move(prompt_id), std::move(spec_id), std::move(text), std::move(model_id),
                 sample_index, 0};
  p.word_count = improbe::word_count(p.text);
  return p;
}

std::string activation_file_name(int layer, ActivationKind kind) {
  return "acts_L" + std::to_string(layer) + "_" + std::string(to_string(kind)) + ".f32";
}

DatasetWriter::DatasetWriter(fs::path dir, DatasetManifest manifest,
                             std::vector<PromptRecord> prompts, LabelTable labels)
    : dir_(std::move(dir)),
      manifest_(std::move(manifest)),
      prompts_(std::move(prompts)),
      labels_(std::move(labels)) {
  validate_manifest(manifest_);
  validate_prompts(prompts_, manifest_.samples_per_spec);
  manifest_.record_count = prompts_.size();
  manifest_.format_version = kFormatVersion;
  for (std::size_t i = 0; i < prompts_.size(); ++i) row_of_[prompts_[i].prompt_id] = i;
  for (int layer = 0; layer < manifest_.num_layers; ++layer) {
    for (const auto& [kind, d] : manifest_.hidden_dim) {
      matrices_[{layer, kind}].assign(prompts_.size() * static_cast<std::size_t>(d), 0.0f);
      filled_[{layer, kind}].assign(prompts_.size(), false);
    }
  }
}

void DatasetWriter::add(const ActivationRecord& r) {
  const auto row = row_of_.find(r.prompt_id);
  if (row == row_of_.end()) {
    fail(ErrorKind::invalid_argument, "activation for unknown prompt '" + r.prompt_id + "'");
  }
  const auto dim = manifest_.hidden_dim.find(r.kind);
  if (dim == manifest_.hidden_dim.end()) {
    fail(ErrorKind::invalid_argument,
         "activation kind '" + std::string(to_string(r.kind)) + "' not declared in manifest");
  }
  if (r.layer < 0 || r.layer >= manifest_.num_layers) {
    fail(ErrorKind::invalid_argument, "layer " + std::to_string(r.layer) + " out of range");
  }
  const auto d = static_cast<std::size_t>(dim->second);
  if (r.vector.size() != d) {
    fail(ErrorKind::invalid_argument, "dimension mismatch for '" + r.prompt_id + "': got " +
                                          std::to_string(r.vector.size()) + ", expected " +
                                          std::to_string(d));
  }
  if (!std::all_of(r.vector.begin(), r.vector.end(), [](float v) { return std::isfinite(v); })) {
    fail(ErrorKind::invalid_argument, "non-finite activation for '" + r.prompt_id + "'");
  }
  auto& filled = filled_[{r.layer, r.kind}];
  if (filled[row->second]) {
    fail(ErrorKind::invalid_argument, "duplicate activation for (" + r.prompt_id + ", " +
                                          std::to_string(r.layer) + ", " +
                                          std::string(to_string(r.kind)) + ")");
  }
  filled[row->second] = true;
  std::copy(r.vector.begin(), r.vector.end(),
            matrices_[{r.layer, r.kind}].begin() + static_cast<std::ptrdiff_t>(row->second * d));
}

std::string DatasetWriter::finish() {
  for (const auto& [key, filled] : filled_) {
    const auto missing = std::find(filled.begin(), filled.end(), false);
    if (missing != filled.end()) {
      const auto& p = prompts_[static_cast<std::size_t>(missing - filled.begin())];
      fail(ErrorKind::invalid_argument, "missing activation for (" + p.prompt_id + ", " +
                                            std::to_string(key.first) + ", " +
                                            std::string(to_string(key.second)) + ")");
    }
  }

  fs::path staging = dir_;
  staging += ".partial";
  std::error_code ec;
  fs::remove_all(staging, ec);
  if (!fs::create_directories(staging, ec) || ec) {
    fail(ErrorKind::io, "cannot create '" + staging.string() + "'");
  }

  Sha256 checksum;
  for (int layer = 0; layer < manifest_.num_layers; ++layer) {
    for (ActivationKind kind : declared_kinds(manifest_)) {
      const std::string bytes = encode_le(matrices_.at({layer, kind}));
      checksum.update(bytes);
      write_file_atomic(staging / activation_file_name(layer, kind), bytes);
    }
  }
  manifest_.checksum = checksum.hex_digest();
  const std::string prompts_text = prompts_csv(prompts_);
  const std::string labels_text = labels_csv(labels_);
  Sha256 tables;
  tables.update(prompts_text);
  tables.update(labels_text);
  manifest_.tables_checksum = tables.hex_digest();
  write_file_atomic(staging / kPromptsName, prompts_text);
  write_file_atomic(staging / kLabelsName, labels_text);
  write_file_atomic(staging / kManifestName, manifest_to_json(manifest_).dump(2) + "\n");
  commit_directory(staging, dir_);
  return manifest_.checksum;
}

std::string write_dataset(const DatasetManifest& manifest, const std::vector<PromptRecord>& prompts,
                          const LabelTable& labels, std::span<const ActivationRecord> activations,
                          const fs::path& dir) {
  DatasetWriter writer(dir, manifest, prompts, labels);
  for (const auto& a : activations) writer.add(a);
  return writer.finish();
}

Dataset Dataset::open(const fs::path& dir) {
  if (!fs::exists(dir / kManifestName)) {
    fail(ErrorKind::io, "no manifest.json in '" + dir.string() + "'");
  }
  Dataset data;
  data.dir_ = dir;
  json j;
  try {
    j = json::parse(read_file(dir / kManifestName));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::format, std::string("manifest.json is not valid JSON: ") + e.what());
  }
  data.manifest_ = manifest_from_json(j);
  if (!data.manifest_.tables_checksum.empty()) {
    Sha256 tables;
    tables.update(read_file(dir / kPromptsName));
    if (!fs::exists(dir / kLabelsName)) fail(ErrorKind::io, "missing labels.csv in '" + dir.string() + "'");
    tables.update(read_file(dir / kLabelsName));
    if (tables.hex_digest() != data.manifest_.tables_checksum) {
      fail(ErrorKind::format, "checksum mismatch in prompts.csv/labels.csv of '" + dir.string() + "'");
    }
  }
  data.prompts_ = parse_prompts(read_csv(dir / kPromptsName));
  if (data.prompts_.size() != data.manifest_.record_count) {
    fail(ErrorKind::format, "record_count does not match prompts.csv");
  }
  validate_prompts(data.prompts_, data.manifest_.samples_per_spec);
  if (fs::exists(dir / kLabelsName)) data.labels_ = parse_labels(read_csv(dir / kLabelsName));

  Sha256 checksum;
  const auto n = data.prompts_.size();
  for (int layer = 0; layer < data.manifest_.num_layers; ++layer) {
    for (ActivationKind kind : declared_kinds(data.manifest_)) {
      const fs::path file = dir / activation_file_name(layer, kind);
      if (!fs::exists(file)) fail(ErrorKind::io, "missing layer file '" + file.string() + "'");
      const auto expected = n * static_cast<std::size_t>(data.manifest_.hidden_dim.at(kind)) * 4;
      if (fs::file_size(file) != expected) {
        fail(ErrorKind::format, "checksum mismatch: '" + file.filename().string() + "' has " +
                                    std::to_string(fs::file_size(file)) + " bytes, expected " +
                                    std::to_string(expected));
      }
      std::ifstream in(file, std::ios::binary);
      std::vector<char> buf(1 << 16);
      while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        checksum.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
      }
    }
  }
  if (checksum.hex_digest() != data.manifest_.checksum) {
    fail(ErrorKind::format, "checksum mismatch in '" + dir.string() + "'");
  }
  return data;
}

Eigen::MatrixXf Dataset::matrix(int layer, ActivationKind kind) const {
  const auto dim = manifest_.hidden_dim.find(kind);
  if (dim == manifest_.hidden_dim.end()) {
    fail(ErrorKind::invalid_argument,
         "kind '" + std::string(to_string(kind)) + "' not present in dataset");
  }
  if (layer < 0 || layer >= manifest_.num_layers) {
    fail(ErrorKind::invalid_argument, "layer " + std::to_string(layer) + " out of range");
  }
  const fs::path file = dir_ / activation_file_name(layer, kind);
  const std::string bytes = read_file(file);
  const auto n = static_cast<Eigen::Index>(prompts_.size());
  const auto d = static_cast<Eigen::Index>(dim->second);
  if (bytes.size() != static_cast<std::size_t>(n * d) * 4) {
    fail(ErrorKind::format, "'" + file.filename().string() + "' changed size since open");
  }
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, d);
  decode_le(bytes, rows.data());
  return rows;
}

std::vector<std::optional<Direction>> Dataset::labels(Dimension dimension) const {
  std::vector<std::optional<Direction>> out;
  out.reserve(prompts_.size());
  for (const auto& p : prompts_) {
    const auto it = labels_.find(p.spec_id);
    out.push_back(it == labels_.end() ? std::nullopt : it->second.of(dimension));
  }
  return out;
}

std::vector<int> stratified_folds(std::span<const Direction> labels, int k, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::invalid_argument, "k must be >= 2");
  std::vector<std::size_t> high, low;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == Direction::high ? high : low).push_back(i);
  }
  if (high.empty() || low.empty()) {
    fail(ErrorKind::invalid_argument, "stratified folds need both classes present");
  }
  if (static_cast<std::size_t>(k) > std::min(high.size(), low.size())) {
    fail(ErrorKind::invalid_argument, "k=" + std::to_string(k) +
                                          " exceeds the minority-class count " +
                                          std::to_string(std::min(high.size(), low.size())));
  }
  std::mt19937_64 rng(seed);
  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      // Lemire's multiply-shift reduction; platform independent unlike
      // std::uniform_int_distribution.
      const auto j = static_cast<std::size_t>(
          (static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(i)) >> 64);
      std::swap(v[i - 1], v[j]);
    }
  };
  shuffle(high);
  shuffle(low);

  std::vector<int> folds(labels.size(), 0);
  std::size_t deal = 0;
  for (const auto* cls : {&high, &low}) {
    for (std::size_t idx : *cls) folds[idx] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
  }
  return folds;
}

std::vector<FoldAssignment> assign_folds(const std::vector<PromptRecord>& prompts,
                                         const std::vector<std::optional<Direction>>& labels,
                                         Dimension dimension, int k, std::uint64_t seed) {
  if (prompts.size() != labels.size()) {
    fail(ErrorKind::invalid_argument, "prompts and labels differ in length");
  }
  std::vector<Direction> present;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      present.push_back(*labels[i]);
      index.push_back(i);
    }
  }
  const auto folds = stratified_folds(present, k, seed);
  std::vector<FoldAssignment> out;
  out.reserve(index.size());
  for (std::size_t j = 0; j < index.size(); ++j) {
    out.push_back({prompts[index[j]].prompt_id, folds[j], dimension});
  }
  return out;
}

namespace {

LengthStats length_stats(const std::vector<double>& lens) {
  LengthStats s;
  s.count = lens.size();
  if (lens.empty()) return s;
  double sum = 0.0;
  for (double v : lens) sum += v;
  s.mean_len = sum / static_cast<double>(lens.size());
  if (lens.size() > 1) {
    double ss = 0.0;
    for (double v : lens) ss += (v - s.mean_len) * (v - s.mean_len);
    s.sd_len = std::sqrt(ss / static_cast<double>(lens.size() - 1));
  }
  return s;
}

}  // namespace

DimensionSummary summarize(const std::vector<PromptRecord>& prompts,
                           const std::vector<std::optional<Direction>>& labels) {
  if (prompts.size() != labels.size()) {
    fail(ErrorKind::invalid_argument, "prompts and labels differ in length");
  }
  std::vector<double> high, low;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (!labels[i]) continue;
    (*labels[i] == Direction::high ? high : low)
        .push_back(static_cast<double>(prompts[i].word_count));
  }
  if (high.empty() && low.empty()) fail(ErrorKind::invalid_argument, "no labeled records");
  return {length_stats(high), length_stats(low)};
}

DimensionSummary summarize(const Dataset& data, Dimension dimension) {
  return summarize(data.prompts(), data.labels(dimension));
}

}  // namespace improbe::dataset
