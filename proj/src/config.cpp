#include "tns/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace tns {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

double parse_decimal(const std::string& s, const std::string& whole) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) throw ConfigError(fmt::format("'{}' is not a number", whole));
  return v;
}

}  // namespace

double parse_real(const std::string& text) {
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_decimal(s, text);
  const double num = parse_decimal(trim(s.substr(0, slash)), text);
  const double den = parse_decimal(trim(s.substr(slash + 1)), text);
  if (den == 0.0) throw ConfigError(fmt::format("'{}' divides by zero", text));
  return num / den;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: line {}: {}", origin, e.line(), e.message()));
  }
  Config c;
  for (const auto& [section, node] : tree) {
    if (node.empty()) throw ConfigError(fmt::format("{}: key '{}' must belong to a [section]", origin, section));
    if (!valid_name(section)) throw ConfigError(fmt::format("{}: bad section name '{}'", origin, section));
    for (const auto& [key, leaf] : node) {
      if (!valid_name(key)) throw ConfigError(fmt::format("{}: bad key '{}' in [{}]", origin, key, section));
      c.values_[section + "." + key] = trim(leaf.get_value<std::string>());
    }
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || !valid_name(key.substr(0, dot)) || !valid_name(key.substr(dot + 1)))
    throw ConfigError(fmt::format("config key '{}' must look like section.key", key));
  if (value.find('\n') != std::string::npos) throw ConfigError(fmt::format("value of '{}' spans lines", key));
  values_[key] = trim(value);
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::string Config::to_text() const {
  std::string out, current;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    if (section != current) {
      if (!out.empty()) out += '\n';
      out += "[" + section + "]\n";
      current = section;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("missing required config key '{}'", key));
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    return parse_real(v);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::optional<double> Config::find_double(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key);
}

std::size_t Config::get_size(const std::string& key) const {
  const std::string v = get_string(key);
  std::size_t out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ConfigError(fmt::format("config key '{}': '{}' is not a nonnegative integer", key, v));
  return out;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  return has(key) ? get_size(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ConfigError(fmt::format("config key '{}': '{}' is not an unsigned integer", key, v));
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : get_strings(key)) {
    try {
      out.push_back(parse_real(item));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get_string(key, ""));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void Config::check_known(const std::set<std::string>& allowed) const {
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (allowed.count(key) == 0) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError(fmt::format("unknown config keys: {}", unknown));
}

}  // namespace tns
