#include "widthlab/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace widthlab::ini {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line,
                       const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& value, const std::string& want) {
  throw std::runtime_error("config " + section + "." + key + ": expected " +
                           want + ", got '" + value + "'");
}

std::int64_t parse_int(const std::string& section, const std::string& key,
                       const std::string& value) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) {
    bad_value(section, key, value, "an integer");
  }
  return v;
}

std::uint64_t parse_uint64(const std::string& section, const std::string& key,
                           const std::string& value) {
  if (value.empty() || value[0] == '-') bad_value(section, key, value, "a nonnegative integer");
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || errno == ERANGE) {
    bad_value(section, key, value, "a nonnegative integer");
  }
  return v;
}

double parse_real(const std::string& section, const std::string& key,
                  const std::string& value) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) {
    bad_value(section, key, value, "a number");
  }
  return v;
}

}  // namespace

bool Document::has(const std::string& section, const std::string& key) const {
  return find(section, key).has_value();
}

std::optional<std::string> Document::find(const std::string& section,
                                          const std::string& key) const {
  auto s = sections.find(section);
  if (s == sections.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Document::get_string(const std::string& section,
                                 const std::string& key) const {
  auto v = find(section, key);
  if (!v) throw std::runtime_error("config missing required entry " + section + "." + key);
  return *v;
}

std::string Document::get_string(const std::string& section, const std::string& key,
                                 const std::string& fallback) const {
  return find(section, key).value_or(fallback);
}

std::int64_t Document::get_int(const std::string& section, const std::string& key,
                               std::int64_t fallback) const {
  auto v = find(section, key);
  return v ? parse_int(section, key, *v) : fallback;
}

std::uint64_t Document::get_uint64(const std::string& section,
                                   const std::string& key,
                                   std::uint64_t fallback) const {
  auto v = find(section, key);
  return v ? parse_uint64(section, key, *v) : fallback;
}

double Document::get_double(const std::string& section, const std::string& key,
                            double fallback) const {
  auto v = find(section, key);
  return v ? parse_real(section, key, *v) : fallback;
}

bool Document::get_bool(const std::string& section, const std::string& key,
                        bool fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(section, key, *v, "a boolean (true/false/1/0/yes/no)");
}

std::vector<std::int64_t> Document::get_int_list(
    const std::string& section, const std::string& key,
    const std::vector<std::int64_t>& fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  std::vector<std::int64_t> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      out.push_back(parse_int(section, key, token));
      token.clear();
    }
  };
  for (char c : *v) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (out.empty()) bad_value(section, key, *v, "a list of integers");
  return out;
}

Document parse_ini(const std::string& text, const std::string& origin) {
  Document doc;
  std::string current;
  bool in_section = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    if (pos == text.size() && line_no > 0) break;
    std::size_t eol = text.find('\n', pos);
    std::string raw = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      if (line.back() != ']') fail(origin, line_no, "section header missing ']'");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) fail(origin, line_no, "empty section name");
      if (name.find('[') != std::string::npos || name.find(']') != std::string::npos) {
        fail(origin, line_no, "brackets inside section name");
      }
      current = name;
      in_section = true;
      doc.sections[current];  // a section may be empty
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected 'key = value', a [section], or a # comment");
    }
    if (!in_section) fail(origin, line_no, "key before any [section] header");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    doc.sections[current][key] = value;
  }
  return doc;
}

Document read_ini(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ini(buf.str(), path);
}

}  // namespace widthlab::ini
