#include "wiener/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

namespace wiener::csv {

std::string format(double value) {
  if (value == 0.0) return "0";  // folds -0
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ec == std::errc{} ? ptr : buf.data());
}

Writer::Writer(std::ostream& os, std::initializer_list<std::string_view> header) : os_(os) {
  for (auto h : header) cell(h);
  end_row();
}

Writer& Writer::cell(std::string_view text) {
  if (row_started_) os_ << ',';
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
    os_ << text;
  } else {
    os_ << '"';
    for (char c : text) {
      if (c == '"') os_ << '"';
      os_ << c;
    }
    os_ << '"';
  }
  row_started_ = true;
  return *this;
}

Writer& Writer::cell(double value) { return cell(std::string_view(format(value))); }

Writer& Writer::cell(long long value) { return cell(std::string_view(std::to_string(value))); }

Writer& Writer::cell(unsigned long long value) { return cell(std::string_view(std::to_string(value))); }

void Writer::end_row() {
  os_ << '\n';
  row_started_ = false;
}

}  // namespace wiener::csv
