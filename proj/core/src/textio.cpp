#include "nearcrash/textio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nearcrash/errors.hpp"

namespace nearcrash {

std::string format_fixed(double value, int places) {
  double scale = std::pow(10.0, places);
  double rounded = std::round(value * scale) / scale;  // round() is half away from zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, rounded);
  return buf;
}

std::string format_ratio(std::int64_t num, std::int64_t den, int places) {
  if (den <= 0) throw ValidationError("format_ratio: denominator must be positive");
  bool negative = num < 0;
  std::uint64_t n = negative ? static_cast<std::uint64_t>(-num) : static_cast<std::uint64_t>(num);
  std::uint64_t d = static_cast<std::uint64_t>(den);
  std::uint64_t pow10 = 1;
  for (int i = 0; i < places; ++i) pow10 *= 10;
  std::uint64_t scaled = n * pow10;  // callers keep num * 10^places within range
  std::uint64_t q = scaled / d;
  std::uint64_t r = scaled % d;
  if (2 * r >= d) ++q;  // half away from zero
  std::uint64_t whole = q / pow10;
  std::uint64_t frac = q % pow10;
  char buf[96];
  if (places == 0) {
    std::snprintf(buf, sizeof(buf), "%s%llu", negative && q != 0 ? "-" : "",
                  static_cast<unsigned long long>(whole));
  } else {
    std::snprintf(buf, sizeof(buf), "%s%llu.%0*llu", negative && q != 0 ? "-" : "",
                  static_cast<unsigned long long>(whole), places,
                  static_cast<unsigned long long>(frac));
  }
  return buf;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(trim(line.substr(start)));
      break;
    }
    fields.emplace_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

DelimitedReader::DelimitedReader(std::istream& in) : in_(in) {
  std::string line;
  if (!std::getline(in_, line)) throw ParseError("empty input: missing header row", 1);
  delimiter_ = line.find('\t') != std::string::npos ? '\t' : ',';
  for (auto& field : split_line(line, delimiter_)) header_.push_back(to_lower(field));
}

std::optional<std::size_t> DelimitedReader::column(std::string_view name) const {
  std::string lower = to_lower(name);
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == lower) return i;
  }
  return std::nullopt;
}

bool DelimitedReader::next_row(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++row_number_;
    if (trim(line).empty()) continue;
    fields = split_line(line, delimiter_);
    if (fields.size() != header_.size()) {
      ++rows_malformed_;
      continue;
    }
    ++rows_read_;
    return true;
  }
  return false;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace nearcrash
