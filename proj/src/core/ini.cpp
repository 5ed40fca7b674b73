#include "xct/core/ini.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xct {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw IniError(origin + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Ini Ini::parse_string(const std::string& text, const std::string& origin) {
  Ini ini;
  ini.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    // Strip comments (full-line or trailing).
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' || line[i] == ';') {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(origin, line_no, "empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(origin, line_no, "empty key");
    ini.entries_.push_back({section, key, trim(line.substr(eq + 1)), line_no});
  }
  return ini;
}

Ini Ini::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IniError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

bool Ini::has(const std::string& section, const std::string& key) const {
  return find(section, key).has_value();
}

std::optional<std::string> Ini::find(const std::string& section, const std::string& key) const {
  std::optional<std::string> out;
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) out = e.value;
  return out;
}

std::string Ini::get_string(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  auto v = find(section, key);
  return v ? *v : fallback;
}

std::int64_t Ini::get_int(const std::string& section, const std::string& key,
                          std::int64_t fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const std::int64_t out = std::stoll(*v, &pos, 0);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw IniError("config key " + section + "." + key + ": not an integer: '" + *v +
                             "'");
  }
}

double Ini::get_double(const std::string& section, const std::string& key,
                       double fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const double out = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw IniError("config key " + section + "." + key + ": not a number: '" + *v +
                             "'");
  }
}

bool Ini::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw IniError("config key " + section + "." + key + ": not a boolean: '" + *v + "'");
}

namespace {

[[noreturn]] void missing(const std::string& section, const std::string& key) {
  throw IniError("missing required config key " + section + "." + key);
}

}  // namespace

std::string Ini::get_string(const std::string& section, const std::string& key) const {
  auto v = find(section, key);
  if (!v) missing(section, key);
  return *v;
}

std::int64_t Ini::get_int(const std::string& section, const std::string& key) const {
  if (!has(section, key)) missing(section, key);
  return get_int(section, key, 0);
}

double Ini::get_double(const std::string& section, const std::string& key) const {
  if (!has(section, key)) missing(section, key);
  return get_double(section, key, 0.0);
}

bool Ini::get_bool(const std::string& section, const std::string& key) const {
  if (!has(section, key)) missing(section, key);
  return get_bool(section, key, false);
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace xct
