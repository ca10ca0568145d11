#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fuzzloc/errors.hpp"

namespace fuzzloc::store {

// In-memory CSV table. Row id is the 0-based data-row index (header
// excluded). Extra columns beyond the documented schema are preserved.
class CsvTable {
 public:
  CsvTable() = default;
  CsvTable(std::vector<std::string> header,
           std::vector<std::vector<std::string>> rows);

  static CsvTable parse(const std::string& content);
  static CsvTable load(const std::string& path);
  std::string to_csv() const;
  void save(const std::string& path) const;

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return header_.size(); }

  // Case-insensitive lookup; a trailing '#' on the requested name is ignored,
  // so the dialect's `imei#` binds to column `imei`.
  std::optional<std::size_t> column_index(const std::string& name) const;

  const std::string& cell(std::size_t row, std::size_t col) const {
    return rows_[row][col];
  }

  bool is_numeric_column(std::size_t col) const;
  static std::optional<double> parse_number(const std::string& text);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Normalizes a column name for matching: lowercase, trailing '#' stripped.
std::string normalize_column_name(const std::string& name);

}  // namespace fuzzloc::store
