#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xct {

// Raised for every malformed-configuration condition (syntax errors, wrongly
// typed values, missing required keys, unreadable files). The command-line
// tools map it to the invalid-configuration exit code.
struct IniError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal INI reader: [section] headers, key = value pairs, '#'/';' comments,
// whitespace-trimmed. Duplicate keys: last one wins (lookup scans in order).
// Entries remember their order so schema validation can report the first
// offending key by its qualified "section.key" name.
class Ini {
 public:
  struct Entry {
    std::string section;  // "" before any [section] header
    std::string key;
    std::string value;
    int line;
  };

  // Throws IniError with a "path:line: message" prefix on syntax errors
  // (unterminated section header, missing '=').
  static Ini parse_file(const std::string& path);
  static Ini parse_string(const std::string& text, const std::string& origin = "<string>");

  const std::vector<Entry>& entries() const { return entries_; }

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> find(const std::string& section, const std::string& key) const;

  // Typed getters: return fallback when absent, throw IniError naming the
  // key when present but malformed.
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  // Required-key getters: throw IniError naming the key when it is absent.
  // Used by loaders of files the tools themselves wrote, where a missing key
  // means the file is corrupt rather than defaulted.
  std::string get_string(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;

 private:
  std::vector<Entry> entries_;
  std::string origin_;
};

// Deterministic numeric formatting used by every text artifact the tools
// write (resolved configs, CSV files): fixed "%.17g" round-trippable form.
std::string fmt_g17(double v);

}  // namespace xct
