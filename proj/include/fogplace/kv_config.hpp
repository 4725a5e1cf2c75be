#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fogplace {

/// Plain-text `key = value` configuration. Blank lines and lines starting
/// with '#' are ignored; later keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// Canonical `key=value\n` rendering, sorted by key.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fogplace
