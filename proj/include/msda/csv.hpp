#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace msda::csv {

// Comma-separated text table. Cells are kept as text; numeric() converts.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(std::string_view name) const;
  std::vector<double> numeric_column(std::string_view name) const;
};

std::string read_file(const std::filesystem::path& path, std::string_view operation);
void write_file(const std::filesystem::path& path, std::string_view content,
                std::string_view operation);

// Splits text into rows of trimmed cells. Blank lines are skipped.
std::vector<std::vector<std::string>> split_rows(std::string_view text);

// Rows of exactly `columns` numeric cells, no header.
std::vector<std::vector<double>> parse_numeric_rows(std::string_view text, std::size_t columns,
                                                    std::string_view operation);

// Table whose first row must equal `expected_header`.
Table parse_table(std::string_view text, const std::vector<std::string>& expected_header,
                  std::string_view operation);
Table read_table(const std::filesystem::path& path,
                 const std::vector<std::string>& expected_header, std::string_view operation);

double parse_number(std::string_view cell, std::string_view operation);

// Shortest representation that parses back to the same double.
std::string format(double value);

}  // namespace msda::csv
