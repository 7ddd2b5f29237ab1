#pragma once

// Byte-stable text output. All floating point numbers in CSV files and
// checkpoints go through format_double (std::to_chars, shortest round-trip
// form), so identical runs produce identical bytes and every stored value
// parses back to the exact same double.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace msgreen {

std::string format_double(double v);
double parse_double(const std::string& s);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& field(const std::string& s);
  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(int v);
  void end_row();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  size_t columns_ = 0;
  size_t in_row_ = 0;
  void sep();
};

}  // namespace msgreen
