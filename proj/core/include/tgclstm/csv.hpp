#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgclstm/matrix.hpp"

namespace tgclstm::csv {

/// Splits on commas and trims surrounding whitespace. No quoting support;
/// none of the formats we read need it.
std::vector<std::string> split(std::string_view line);

std::string_view trim(std::string_view s);

/// Strict decimal parse; throws FormatError mentioning `context` on junk.
double parse_double(std::string_view token, std::string_view context);
long long parse_int(std::string_view token, std::string_view context);

/// Reads all lines, stripping trailing '\r'. Blank lines are dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes doubles with round-trip precision.
std::string format_double(double v);

/// N rows of comma-separated values under a header of column labels. When
/// `row_labels` is non-empty each row is prefixed with its label and the
/// header gets a leading `corner` cell.
void write_matrix(std::ostream& os, const Matrix& m, std::span<const std::string> header,
                  std::span<const std::string> row_labels = {},
                  std::string_view corner = "node");
void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  std::span<const std::string> header,
                  std::span<const std::string> row_labels = {},
                  std::string_view corner = "node");

Matrix read_matrix(const std::filesystem::path& path, bool has_row_labels = false);

}  // namespace tgclstm::csv
