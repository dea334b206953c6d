#include "tkmerge/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace tkmerge {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_cell(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);  // from_chars rejects a leading '+'
  const char* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

std::vector<std::string_view> split_row(const std::string& line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.emplace_back(line.data() + start, line.size() - start);
      break;
    }
    cells.emplace_back(line.data() + start, pos - start);
    start = pos + 1;
  }
  return cells;
}

[[noreturn]] void fail(const std::string& name, std::size_t line, std::size_t col,
                       const std::string& what) {
  std::ostringstream msg;
  msg << name << ":" << line << ":" << col << ": " << what;
  throw CsvParseError(msg.str());
}

}  // namespace

DataMatrix parse_csv(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_content_row = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);

    if (first_content_row) {
      // Header iff any cell is non-numeric.
      bool all_numeric = true;
      double v;
      for (const auto& cell : cells) all_numeric &= parse_cell(cell, v);
      first_content_row = false;
      width = cells.size();
      if (!all_numeric) continue;
    }

    if (cells.size() != width) {
      fail(name, line_no, 1, "expected " + std::to_string(width) + " columns, found " +
                                 std::to_string(cells.size()));
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_cell(cells[c], row[c])) {
        fail(name, line_no, c + 1, "expected a number, got '" + std::string(trim(cells[c])) + "'");
      }
    }
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw CsvParseError(name + ": no numeric rows found");
  DataMatrix data;
  data.values = Matrix(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) data.values(i, j) = rows[i][j];
  }
  return data;
}

DataMatrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvParseError("cannot open input file '" + path + "'");
  return parse_csv(in, path);
}

void write_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvParseError("cannot open label file '" + path + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cell = trim(line);
    if (cell.empty()) continue;
    int v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
      if (line_no == 1) continue;  // optional header
      fail(path, line_no, 1, "expected an integer label, got '" + std::string(cell) + "'");
    } else {
      labels.push_back(v);
    }
  }
  if (labels.empty()) throw CsvParseError(path + ": no labels found");
  return labels;
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (int l : labels) out << l << '\n';
}

void write_dendrogram(const std::string& path, const Dendrogram& dend) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const auto& m : dend.merges) {
    out << m.left << ' ' << m.right << ' ' << format_double(m.height) << '\n';
  }
}

}  // namespace tkmerge
