#pragma once

#include <charconv>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>

namespace fluxswarm {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return res.ec == std::errc{} ? std::string(buf, res.ptr) : std::string("nan");
}

/// Comma-separated row builder over a borrowed stream.
class CsvRow {
 public:
  explicit CsvRow(std::ostream& os) : os_(os) {}
  CsvRow(const CsvRow&) = delete;
  CsvRow& operator=(const CsvRow&) = delete;
  ~CsvRow() { os_ << '\n'; }

  CsvRow& operator<<(double v) { return put(format_double(v)); }
  CsvRow& operator<<(long long v) { return put(std::to_string(v)); }
  CsvRow& operator<<(int v) { return put(std::to_string(v)); }
  CsvRow& operator<<(std::string_view s) { return put(s); }

 private:
  CsvRow& put(std::string_view s) {
    if (!first_) os_ << ',';
    first_ = false;
    os_ << s;
    return *this;
  }

  std::ostream& os_;
  bool first_ = true;
};

inline void write_csv_header(std::ostream& os, std::initializer_list<std::string_view> cols) {
  bool first = true;
  for (auto c : cols) {
    if (!first) os << ',';
    first = false;
    os << c;
  }
  os << '\n';
}

}  // namespace fluxswarm
