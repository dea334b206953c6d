#ifndef TKMERGE_CSV_HPP
#define TKMERGE_CSV_HPP

#include "tkmerge/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tkmerge {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// Comma-separated numeric matrix. A single header row is skipped when any
/// cell of the first row is non-numeric. Throws CsvParseError with
/// file:line:column diagnostics.
DataMatrix read_csv(const std::string& path);
DataMatrix parse_csv(std::istream& in, const std::string& name);

void write_csv(const std::string& path, const Matrix& m);

std::vector<int> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<int>& labels);

/// One merge per line: left right height.
void write_dendrogram(const std::string& path, const Dendrogram& dend);

}  // namespace tkmerge

#endif
