#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bounded {

/// Flat `key = value` configuration.
///
/// File syntax: one assignment per line, `#` starts a comment, blank lines
/// are ignored, keys are case-sensitive. Later assignments override earlier
/// ones, and `set()` (used for command-line flags) overrides both.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void merge(const Config& other);

  /// Throws ConfigError naming `key` when it is absent.
  const std::string& require(const std::string& key) const;
  double require_double(const std::string& key) const;
  int require_int(const std::string& key) const;

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  /// Entries whose key starts with `prefix`, with the prefix stripped.
  Config section(const std::string& prefix) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string& key, const std::string& text);
int parse_int(const std::string& key, const std::string& text);
std::vector<double> parse_double_list(const std::string& key, const std::string& text);

}  // namespace bounded
