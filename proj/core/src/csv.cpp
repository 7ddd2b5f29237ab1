#include "msgreen/csv.hpp"

#include "msgreen/common.hpp"

#include <charconv>
#include <system_error>

namespace msgreen {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("format_double: to_chars failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("parse_double: bad number '" + s + "'");
  return v;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path) {
  std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary);  // binary: no platform newline translation
  if (!out_) throw IoError("cannot open " + path.string());
  columns_ = header.size();
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::sep() {
  if (in_row_) out_ << ',';
  ++in_row_;
}

CsvWriter& CsvWriter::field(const std::string& s) {
  sep();
  out_ << s;
  return *this;
}

CsvWriter& CsvWriter::field(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::field(int v) {
  sep();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_)
    throw ShapeError("CsvWriter: row has " + std::to_string(in_row_) + " fields, header has " +
                     std::to_string(columns_));
  out_ << '\n';
  in_row_ = 0;
  if (!out_) throw IoError("write failed: " + path_.string());
}

}  // namespace msgreen
