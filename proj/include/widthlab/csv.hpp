#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace widthlab::csv {

// Shortest decimal form that round-trips a double exactly (%.17g trimmed by
// the C library); nan and +/-inf serialize to strings strtod can read back.
std::string format_double(double value);

// Strict double parser: the whole cell must be consumed. Throws
// std::invalid_argument otherwise.
double parse_double(const std::string& cell);

// Streaming writer for one CSV file. The header row is written on
// construction; every row must match its arity. Cells may not contain
// commas, quotes, or line breaks (no quoting dialect on purpose: every
// value this project emits is a number, an identifier, or a path-free
// token). Violations throw std::invalid_argument before anything is
// written for that row.
class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& columns);
  ~Writer();

  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void write_row(const std::vector<std::string>& cells);
  // Convenience for all-numeric tables.
  void write_numeric_row(const std::vector<double>& cells);

  std::size_t rows_written() const { return rows_; }
  const std::string& path() const { return path_; }

  // Flushes and closes; throws on I/O failure. Called by the destructor
  // (which swallows errors), so call it explicitly when you care.
  void close();

 private:
  std::string path_;
  std::size_t arity_ = 0;
  std::size_t rows_ = 0;
  std::string buffer_;
  bool closed_ = false;
};

// In-memory CSV table: a header plus string cells, with typed accessors.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool has_column(const std::string& name) const;
  // Index of a header column; throws std::out_of_range naming the column.
  std::size_t column_index(const std::string& name) const;

  const std::string& cell(std::size_t row, const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;

  // Full column as doubles.
  std::vector<double> numeric_column(const std::string& name) const;
};

// Parses CSV text. `origin` is used in error messages ("origin:line: ...").
// Requirements: nonempty header line, LF line endings (a trailing CR is
// rejected, not stripped), every row with the header's arity. A trailing
// newline after the last row is allowed and expected.
Table parse_csv(const std::string& text, const std::string& origin = "<csv>");

// Reads and parses a file; errors mention the path and line number.
Table read_csv(const std::string& path);

}  // namespace widthlab::csv
