#include "msda/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "msda/error.hpp"

namespace msda::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw Error(Errc::invalid_argument, "csv", "no column named '" + std::string(name) + "'");
}

std::vector<double> Table::numeric_column(std::string_view name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(parse_number(row[c], "csv"));
  return out;
}

std::string read_file(const std::filesystem::path& path, std::string_view operation) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::io, operation, "file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, operation, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content,
                std::string_view operation) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, operation, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::io, operation, "write failed for " + path.string());
}

std::vector<std::vector<std::string>> split_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    if (!line.empty()) {
      std::vector<std::string> cells;
      std::size_t cpos = 0;
      while (true) {
        const auto comma = line.find(',', cpos);
        const auto cell = line.substr(cpos, comma == std::string_view::npos ? line.size() - cpos
                                                                           : comma - cpos);
        cells.emplace_back(trim(cell));
        if (comma == std::string_view::npos) break;
        cpos = comma + 1;
      }
      rows.push_back(std::move(cells));
    }
    pos = end + 1;
  }
  return rows;
}

double parse_number(std::string_view cell, std::string_view operation) {
  cell = trim(cell);
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw Error(Errc::parse, operation, "not a number: '" + std::string(cell) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(Errc::parse, operation, "non-finite value: '" + std::string(cell) + "'");
  }
  return value;
}

std::vector<std::vector<double>> parse_numeric_rows(std::string_view text, std::size_t columns,
                                                    std::string_view operation) {
  std::vector<std::vector<double>> out;
  std::size_t line_no = 0;
  for (const auto& row : split_rows(text)) {
    ++line_no;
    if (row.size() != columns) {
      throw Error(Errc::parse, operation,
                  "row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(columns));
    }
    std::vector<double> values;
    values.reserve(columns);
    for (const auto& cell : row) values.push_back(parse_number(cell, operation));
    out.push_back(std::move(values));
  }
  return out;
}

Table parse_table(std::string_view text, const std::vector<std::string>& expected_header,
                  std::string_view operation) {
  auto rows = split_rows(text);
  if (rows.empty() || rows.front() != expected_header) {
    std::string want;
    for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
    throw Error(Errc::parse, operation, "expected header '" + want + "'");
  }
  Table table;
  table.header = std::move(rows.front());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != table.header.size()) {
      throw Error(Errc::parse, operation, "row " + std::to_string(r + 1) + " has wrong width");
    }
    table.rows.push_back(std::move(rows[r]));
  }
  return table;
}

Table read_table(const std::filesystem::path& path,
                 const std::vector<std::string>& expected_header, std::string_view operation) {
  return parse_table(read_file(path, operation), expected_header, operation);
}

std::string format(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace msda::csv
