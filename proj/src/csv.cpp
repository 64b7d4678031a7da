#include "widthlab/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace widthlab::csv {
namespace {

bool cell_is_clean(const std::string& cell) {
  for (char c : cell) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return false;
  }
  return true;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line,
                       const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(const std::string& cell) {
  if (cell.empty()) throw std::invalid_argument("empty cell is not a number");
  errno = 0;
  char* end = nullptr;
  double value = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) {
    throw std::invalid_argument("not a number: '" + cell + "'");
  }
  return value;
}

Writer::Writer(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), arity_(columns.size()) {
  if (columns.empty()) {
    throw std::invalid_argument("csv writer needs at least one column");
  }
  for (const auto& name : columns) {
    if (name.empty() || !cell_is_clean(name)) {
      throw std::invalid_argument("bad csv column name: '" + name + "'");
    }
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

Writer::~Writer() {
  try {
    close();
  } catch (...) {
  }
}

void Writer::write_row(const std::vector<std::string>& cells) {
  if (closed_) throw std::logic_error("csv writer already closed: " + path_);
  if (cells.size() != arity_) {
    std::ostringstream msg;
    msg << path_ << ": row has " << cells.size() << " cells, header has "
        << arity_;
    throw std::invalid_argument(msg.str());
  }
  for (const auto& cell : cells) {
    if (!cell_is_clean(cell)) {
      throw std::invalid_argument(path_ + ": cell contains a comma, quote, or line break: '" + cell + "'");
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
  ++rows_;
}

void Writer::write_numeric_row(const std::vector<double>& cells) {
  std::vector<std::string> text(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) text[i] = format_double(cells[i]);
  write_row(text);
}

void Writer::close() {
  if (closed_) return;
  closed_ = true;
  // Buffered single write keeps partially written files off disk when a
  // row throws mid-run.
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path_);
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path_);
}

bool Table::has_column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c == name) return true;
  }
  return false;
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no such csv column: '" + name + "'");
}

const std::string& Table::cell(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column_index(name));
}

double Table::number(std::size_t row, const std::string& name) const {
  return parse_double(cell(row, name));
}

std::vector<double> Table::numeric_column(const std::string& name) const {
  std::size_t col = column_index(name);
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = parse_double(rows[i].at(col));
  return out;
}

Table parse_csv(const std::string& text, const std::string& origin) {
  if (text.empty()) fail(origin, 1, "empty file, expected a header row");
  Table table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      fail(origin, line_no, "CR line ending, this format uses LF only");
    }
    auto cells = split_line(line);
    if (line_no == 1) {
      if (line.empty()) fail(origin, 1, "empty header row");
      table.columns = std::move(cells);
      continue;
    }
    if (line.empty() && pos >= text.size()) break;  // trailing blank line
    if (cells.size() != table.columns.size()) {
      std::ostringstream what;
      what << "expected " << table.columns.size() << " cells, got " << cells.size();
      fail(origin, line_no, what.str());
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

}  // namespace widthlab::csv
