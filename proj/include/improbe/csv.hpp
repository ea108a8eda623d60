#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace improbe {

// RFC 4180 reader. Lines starting with '#' outside a quoted field are
// treated as comments, which is how reports carry their run header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a column, or nullopt; matching is exact.
  std::optional<std::size_t> find(std::string_view column) const;
  // Same, but throws a format error naming the missing column.
  std::size_t require(std::string_view column) const;
};

CsvTable parse_csv(std::string_view content);
CsvTable read_csv(const std::filesystem::path& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(std::string_view line);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

std::string csv_escape(std::string_view field);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never observe
// a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace improbe
