#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ggmc::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t num_cols() const { return header.size(); }
  std::size_t num_rows() const { return rows.size(); }
  /// Index of a header name, -1 if absent.
  long find_column(const std::string& name) const;
};

/// Reads a comma-separated file with a header row. Cells are kept verbatim
/// (trimmed of surrounding whitespace and trailing CR); no quoting support.
Table read_table(const std::filesystem::path& file);

/// Strict locale-independent numeric parse ('.' decimal). Throws
/// ValidationError naming `context` on failure.
double parse_number(const std::string& cell, const std::string& context);

/// Formats with 12 significant digits ("%.12g"), the fixed precision used by
/// every numeric output file.
std::string format_number(double x);

}  // namespace ggmc::csv
