#include "drg/csv.hpp"

#include <cstdio>
#include <fstream>

#include "drg/error.hpp"

namespace drg {

std::string format_double(double value) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  std::string s(buf, static_cast<std::size_t>(n));
  // snprintf honours LC_NUMERIC; normalise in case a caller changed it.
  for (auto& c : s)
    if (c == ',') c = '.';
  return s;
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) {
  if (header.empty()) throw ProblemError("CSV header must not be empty");
  row(header);
  rows_ = 0;
}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw ProblemError(format_message("CSV row has %zu cells, header has %zu", cells.size(), width_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  ++rows_;
  return *this;
}

std::string CsvTable::str() const { return text_; }

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, text_); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace drg
