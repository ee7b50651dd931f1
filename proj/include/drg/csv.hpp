#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace drg {

// 17 significant digits, '.' decimal point, independent of the global locale.
std::string format_double(double value);

// Accumulates CSV rows (',' separated, LF endings, mandatory header).
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const { return rows_; }

 private:
  std::size_t width_;
  std::size_t rows_ = 0;
  std::string text_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace drg
