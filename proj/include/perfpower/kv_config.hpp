#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace perfpower {

// Plain-text `key = value` configuration shared by every component.
// Lines starting with '#' and blank lines are ignored; later keys override
// earlier ones. Malformed lines raise InvalidConfig.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(std::string_view text);
  static KvConfig load(const std::filesystem::path& path);

  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;

  // Typed accessors; an unparsable value raises InvalidConfig naming the key.
  std::optional<double> get_double(std::string_view key) const;
  std::optional<std::int64_t> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;
  // Comma-separated list of reals.
  std::optional<std::vector<double>> get_doubles(std::string_view key) const;

  void set(std::string key, std::string value);

  // Keys with the given prefix, in lexical order.
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Parses a nonnegative decimal or a fraction "p/q". Throws InvalidConfig.
double parse_rational(std::string_view text);

}  // namespace perfpower
