#include "tgclstm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tgclstm/errors.hpp"

namespace tgclstm::csv {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = line.substr(start, comma == std::string_view::npos ? line.npos
                                                                          : comma - start);
    out.emplace_back(trim(field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view token, std::string_view context) {
  token = trim(token);
  double v = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw FormatError(std::string(context) + ": not a number: '" + std::string(token) + "'");
  }
  return v;
}

long long parse_int(std::string_view token, std::string_view context) {
  token = trim(token);
  long long v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw FormatError(std::string(context) + ": not an integer: '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_matrix(std::ostream& os, const Matrix& m, std::span<const std::string> header,
                  std::span<const std::string> row_labels, std::string_view corner) {
  if (header.size() != m.cols()) throw ShapeError("write_matrix: header/column count mismatch");
  if (!row_labels.empty() && row_labels.size() != m.rows()) {
    throw ShapeError("write_matrix: row label count mismatch");
  }
  if (!row_labels.empty()) os << corner << ',';
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!row_labels.empty()) os << row_labels[i] << ',';
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  std::span<const std::string> header, std::span<const std::string> row_labels,
                  std::string_view corner) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_matrix(out, m, header, row_labels, corner);
}

Matrix read_matrix(const std::filesystem::path& path, bool has_row_labels) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty matrix file");
  const std::size_t skip = has_row_labels ? 1 : 0;
  const std::size_t cols = split(lines.front()).size() - skip;
  std::vector<double> values;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r]);
    if (fields.size() != cols + skip) {
      throw FormatError(path.string() + ": ragged row " + std::to_string(r + 1));
    }
    for (std::size_t c = skip; c < fields.size(); ++c) {
      if (fields[c] == "inf") {
        values.push_back(std::numeric_limits<double>::infinity());
      } else {
        values.push_back(parse_double(fields[c], path.string()));
      }
    }
  }
  return Matrix(lines.size() - 1, cols, std::move(values));
}

}  // namespace tgclstm::csv
