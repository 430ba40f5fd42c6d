#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>

namespace wiener::csv {

/// Shortest round-trip decimal representation with '.' separator.
std::string format(double value);

/// Writes comma separated rows terminated by LF; fields containing commas or
/// quotes are quoted.
class Writer {
 public:
  Writer(std::ostream& os, std::initializer_list<std::string_view> header);

  Writer& cell(std::string_view text);
  Writer& cell(double value);
  Writer& cell(long long value);
  Writer& cell(unsigned long long value);
  Writer& cell(int value) { return cell(static_cast<long long>(value)); }
  Writer& cell(unsigned value) { return cell(static_cast<unsigned long long>(value)); }
  Writer& cell(unsigned long value) { return cell(static_cast<unsigned long long>(value)); }
  Writer& cell(bool value) { return cell(std::string_view(value ? "true" : "false")); }
  void end_row();

 private:
  std::ostream& os_;
  bool row_started_ = false;
};

}  // namespace wiener::csv
