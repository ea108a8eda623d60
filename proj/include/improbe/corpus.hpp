#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace improbe::dataset {

struct CorpusDocument {
  std::string doc_id;
  std::string text;
  std::optional<std::string> response_text;
  std::optional<int> quality_score;         // 1..9
  std::optional<double> dialect_posterior;  // [0,1]
  std::optional<std::string> group_tag;
  // Any further columns, kept verbatim (e.g. probe outputs joined upstream).
  std::map<std::string, std::string> extra;
};

// Throws a format error when quality_score or dialect_posterior is out of range.
void validate(const CorpusDocument& doc);

// CSV (header row naming the fields) or JSONL, chosen by extension
// (.jsonl/.json → JSONL, anything else → CSV). Empty cells are absent fields.
std::vector<CorpusDocument> read_corpus(const std::filesystem::path& path);
std::vector<CorpusDocument> parse_corpus_csv(std::string_view content);
std::vector<CorpusDocument> parse_corpus_jsonl(std::string_view content);

void write_corpus_jsonl(std::ostream& out, const std::vector<CorpusDocument>& docs);

}  // namespace improbe::dataset
