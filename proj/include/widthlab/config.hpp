#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace widthlab::ini {

// Minimal INI document.
//
// Grammar (the whole of it):
//   - UTF-8 text, LF or CRLF lines.
//   - Blank lines are skipped.
//   - A line whose first non-space character is '#' is a comment. There are
//     no inline comments: '#' inside a value is literal.
//   - "[name]" opens a section; the name is trimmed and must be nonempty.
//   - "key = value" inside a section; key and value are trimmed, the value
//     may be empty. Keys before any section header are an error.
//   - A duplicate key in the same section overwrites the earlier value.
// Anything else is a parse error naming the line.
struct Document {
  // section -> key -> value, last assignment wins.
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> find(const std::string& section,
                                  const std::string& key) const;

  // Typed getters. The required forms throw std::runtime_error naming
  // "section.key" when the entry is missing; all throw when the value does
  // not parse.
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  std::uint64_t get_uint64(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  // Comma- or whitespace-separated integer list.
  std::vector<std::int64_t> get_int_list(
      const std::string& section, const std::string& key,
      const std::vector<std::int64_t>& fallback) const;
};

// Parses INI text; `origin` prefixes error messages ("origin:line: ...").
Document parse_ini(const std::string& text, const std::string& origin = "<ini>");

// Reads and parses a file.
Document read_ini(const std::string& path);

}  // namespace widthlab::ini
