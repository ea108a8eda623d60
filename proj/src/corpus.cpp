#include "improbe/corpus.hpp"

#include <ostream>
#include <set>

#include "improbe/csv.hpp"
#include "improbe/errors.hpp"
#include "improbe/text.hpp"
#include "json.hpp"

using nlohmann::json;

namespace improbe::dataset {
namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> f = {"doc_id",        "text",
                                          "response_text", "quality_score",
                                          "dialect_posterior", "group_tag"};
  return f;
}

void set_field(CorpusDocument& doc, const std::string& key, const std::string& value) {
  if (key == "doc_id") {
    doc.doc_id = value;
  } else if (key == "text") {
    doc.text = value;
  } else if (value.empty()) {
    return;
  } else if (key == "response_text") {
    doc.response_text = value;
  } else if (key == "quality_score") {
    doc.quality_score = static_cast<int>(parse_int(value));
  } else if (key == "dialect_posterior") {
    doc.dialect_posterior = parse_double(value);
  } else if (key == "group_tag") {
    doc.group_tag = value;
  } else {
    doc.extra[key] = value;
  }
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace

void validate(const CorpusDocument& doc) {
  if (doc.doc_id.empty()) fail(ErrorKind::format, "corpus document without doc_id");
  if (doc.quality_score && (*doc.quality_score < 1 || *doc.quality_score > 9)) {
    fail(ErrorKind::format, "quality_score outside 1..9 for '" + doc.doc_id + "'");
  }
  if (doc.dialect_posterior && !(*doc.dialect_posterior >= 0.0 && *doc.dialect_posterior <= 1.0)) {
    fail(ErrorKind::format, "dialect_posterior outside [0,1] for '" + doc.doc_id + "'");
  }
}

std::vector<CorpusDocument> parse_corpus_csv(std::string_view content) {
  const CsvTable t = parse_csv(content);
  t.require("doc_id");
  t.require("text");
  std::vector<CorpusDocument> docs;
  docs.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    CorpusDocument doc;
    for (std::size_t i = 0; i < t.header.size(); ++i) set_field(doc, t.header[i], row[i]);
    validate(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<CorpusDocument> parse_corpus_jsonl(std::string_view content) {
  std::vector<CorpusDocument> docs;
  std::size_t line_no = 0;
  for (const auto& line : split(content, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      fail(ErrorKind::format, "invalid JSON on corpus line " + std::to_string(line_no));
    }
    if (!j.is_object()) fail(ErrorKind::format, "corpus line " + std::to_string(line_no) +
                                                    " is not an object");
    if (!j.contains("doc_id") || !j.contains("text")) {
      fail(ErrorKind::format, "corpus line " + std::to_string(line_no) + " lacks doc_id/text");
    }
    CorpusDocument doc;
    for (const auto& [key, value] : j.items()) set_field(doc, key, json_scalar(value));
    validate(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<CorpusDocument> read_corpus(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  const auto ext = path.extension();
  if (ext == ".jsonl" || ext == ".json") return parse_corpus_jsonl(content);
  return parse_corpus_csv(content);
}

void write_corpus_jsonl(std::ostream& out, const std::vector<CorpusDocument>& docs) {
  for (const auto& d : docs) {
    // ordered_json keeps a fixed field order so output is byte-stable.
    nlohmann::ordered_json j;
    j["doc_id"] = d.doc_id;
    j["text"] = d.text;
    if (d.response_text) j["response_text"] = *d.response_text;
    if (d.quality_score) j["quality_score"] = *d.quality_score;
    if (d.dialect_posterior) j["dialect_posterior"] = *d.dialect_posterior;
    if (d.group_tag) j["group_tag"] = *d.group_tag;
    for (const auto& [k, v] : d.extra) {
      if (!known_fields().count(k)) j[k] = v;
    }
    out << j.dump() << '\n';
  }
}

}  // namespace improbe::dataset
