#pragma once

// Plain-text tables: "# " comment header, one line of column names, then
// comma-separated rows rendered with 9 significant digits. Missing values
// are written as "nan".

#include <string>
#include <string_view>
#include <vector>

namespace qfb {

struct CsvTable {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws DomainError on a column-count mismatch.
  void add_row(std::vector<double> row);
  std::string render() const;
  /// Written to a sibling temporary and renamed into place, so a failed run
  /// never leaves a partial table behind. Throws IoError.
  void write(const std::string& path) const;

  static CsvTable parse(std::string_view text);
  static CsvTable read(const std::string& path);
};

/// Nine significant digits, as in every table body.
std::string format_value(double v);

/// Shortest text that parses back to exactly v; used for parameter echoes.
std::string format_exact(double v);

}  // namespace qfb
