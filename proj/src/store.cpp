#include "fuzzloc/store.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "fuzzloc/io.hpp"

namespace fuzzloc::store {

namespace {

// RFC-4180-style field splitting: quoted fields may contain commas and
// doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty())
        throw ParseError("unexpected quote inside unquoted field", line_no,
                         static_cast<int>(i) + 1);
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (in_quotes)
    throw ParseError("unterminated quoted field", line_no,
                     static_cast<int>(line.size()));
  fields.push_back(std::move(field));
  return fields;
}

std::string escape_csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header,
                   std::vector<std::vector<std::string>> rows)
    : header_(std::move(header)), rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (rows_[i].size() != header_.size())
      throw ParseError("row has " + std::to_string(rows_[i].size()) +
                           " fields, header has " +
                           std::to_string(header_.size()),
                       static_cast<int>(i) + 2);
}

CsvTable CsvTable::parse(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    auto fields = split_csv_line(line, line_no);
    if (line_no == 1) {
      header = std::move(fields);
    } else {
      if (fields.size() != header.size())
        throw ParseError("row has " + std::to_string(fields.size()) +
                             " fields, header has " +
                             std::to_string(header.size()),
                         line_no);
      rows.push_back(std::move(fields));
    }
  }
  if (header.empty()) throw ParseError("missing header");
  return CsvTable(std::move(header), std::move(rows));
}

CsvTable CsvTable::load(const std::string& path) {
  try {
    return parse(io::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string CsvTable::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i > 0) out << ',';
    out << escape_csv_field(header_[i]);
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << escape_csv_field(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

void CsvTable::save(const std::string& path) const {
  io::write_file_atomic(path, to_csv());
}

std::string normalize_column_name(const std::string& name) {
  std::string out = name;
  if (!out.empty() && out.back() == '#') out.pop_back();
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<std::size_t> CsvTable::column_index(
    const std::string& name) const {
  const std::string wanted = normalize_column_name(name);
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (normalize_column_name(header_[i]) == wanted) return i;
  return std::nullopt;
}

std::optional<double> CsvTable::parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t begin = text.find_first_not_of(" \t");
  std::size_t end = text.find_last_not_of(" \t");
  if (begin == std::string::npos) return std::nullopt;
  const std::string trimmed = text.substr(begin, end - begin + 1);
  try {
    std::size_t consumed = 0;
    const double value = std::stod(trimmed, &consumed);
    if (consumed != trimmed.size()) return std::nullopt;
    return value;
  } catch (...) {
    return std::nullopt;
  }
}

bool CsvTable::is_numeric_column(std::size_t col) const {
  bool any = false;
  for (const auto& row : rows_) {
    const std::string& v = row[col];
    if (v.empty()) continue;
    if (!parse_number(v)) return false;
    any = true;
  }
  return any;
}

}  // namespace fuzzloc::store
