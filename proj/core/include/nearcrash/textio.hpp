#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nearcrash {

/// Fixed-point rendering with the given number of decimal places.
/// Rounds half away from zero on the decimal value.
std::string format_fixed(double value, int places);

/// Exact fixed-point rendering of the rational num/den (den > 0), rounding
/// half away from zero. Pure integer arithmetic, so values that land exactly
/// on a rounding boundary are handled deterministically.
std::string format_ratio(std::int64_t num, std::int64_t den, int places);

/// Lowercase ASCII copy.
std::string to_lower(std::string_view s);

/// Strips surrounding whitespace (space, tab, CR).
std::string_view trim(std::string_view s);

/// Splits a line on the given delimiter. Does not unquote; the formats this
/// library reads and writes never embed delimiters in values.
std::vector<std::string> split_line(std::string_view line, char delimiter);

/// Parses a finite double; empty or non-numeric input yields nullopt.
std::optional<double> parse_double(std::string_view s);

/// Parses a signed integer; empty or non-numeric input yields nullopt.
std::optional<std::int64_t> parse_int(std::string_view s);

/// A delimiter-separated table with one header row. The delimiter is taken
/// from the header line: tab when present, comma otherwise.
class DelimitedReader {
 public:
  explicit DelimitedReader(std::istream& in);

  /// Case-insensitive header lookup; nullopt when the column is absent.
  std::optional<std::size_t> column(std::string_view name) const;

  /// Reads the next data row. Returns false at end of input. Rows whose
  /// field count differs from the header are reported through `malformed`
  /// and skipped.
  bool next_row(std::vector<std::string>& fields);

  std::size_t row_number() const { return row_number_; }  // 1-based, header = 1
  std::size_t rows_read() const { return rows_read_; }
  std::size_t rows_malformed() const { return rows_malformed_; }
  char delimiter() const { return delimiter_; }
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::istream& in_;
  char delimiter_ = '\t';
  std::vector<std::string> header_;        // lowercased
  std::size_t row_number_ = 1;
  std::size_t rows_read_ = 0;
  std::size_t rows_malformed_ = 0;
};

/// Opens a file for reading, throwing IoError when it cannot be opened.
std::ifstream open_input(const std::filesystem::path& path);

/// Opens a file for writing (truncating), throwing IoError on failure.
std::ofstream open_output(const std::filesystem::path& path);

/// Reads a whole file into a string.
std::string read_file(const std::filesystem::path& path);

/// FNV-1a 64-bit digest, rendered as 16 hex digits. Used for the output
/// manifest in run reports.
std::string fnv1a_hex(std::string_view data);

}  // namespace nearcrash
