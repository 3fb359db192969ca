#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mixl::io {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict parse of a full field; returns false on trailing junk or empty input.
bool parse_double(std::string_view text, double& out);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, or npos.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string csv_field(std::string_view field);

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mixl::io
