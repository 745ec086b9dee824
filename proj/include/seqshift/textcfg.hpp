#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqshift {

// Minimal sectioned key-value text format:
//   [section]
//   key = value
// '#' starts a comment; blank lines ignored; later duplicates win.
struct TextConfig {
  // section -> (key -> value), with section order preserved separately.
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::vector<std::string> section_order;

  static TextConfig parse(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
};

std::string trim(const std::string& s);
std::vector<std::string> split_list(const std::string& s, char sep = ',');

}  // namespace seqshift
