#pragma once

// Run configuration: flat `key = value` text with [section] headers, read
// through Boost.PropertyTree's INI parser. Keys are addressed as
// "section.key". Reals accept fractions such as "2/3".

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tns {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Decimal or fraction "p/q"; throws ConfigError.
double parse_real(const std::string& text);

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  void erase(const std::string& key) { values_.erase(key); }
  /// "section.key=value"
  void apply_override(const std::string& assignment);

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Canonical text: sections and keys in sorted order. parse(to_text())
  /// reproduces the same values and the same text.
  std::string to_text() const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> find_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// comma-separated reals
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  /// comma-separated items, whitespace trimmed, empty items dropped
  std::vector<std::string> get_strings(const std::string& key) const;

  /// Throws ConfigError listing keys outside `allowed`.
  void check_known(const std::set<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace tns
