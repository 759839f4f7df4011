#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dapm {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed. Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string_view> split_csv_line(std::string_view line);

/// Throw FormatError naming `field` and `row` when the cell is not a number.
int parse_int(std::string_view cell, std::string_view field, std::size_t row);
double parse_double(std::string_view cell, std::string_view field, std::size_t row);

/// Iterates lines of a buffer, stripping a trailing '\r'. Rows are 1-based.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    bool next(std::string_view& line, std::size_t& row);

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t row_ = 0;
};

} // namespace dapm
