#include "perfpower/kv_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "perfpower/errors.hpp"

namespace perfpower {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

KvConfig KvConfig::parse(std::string_view text) {
  KvConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidConfig(fmt::format("config line {}: expected 'key = value'", line_no));
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidConfig(fmt::format("config line {}: empty key", line_no));
    cfg.set(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool KvConfig::contains(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> KvConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KvConfig::get_or(std::string_view key, std::string fallback) const {
  return get(key).value_or(std::move(fallback));
}

std::optional<double> KvConfig::get_double(std::string_view key) const {
  auto s = get(key);
  if (!s) return std::nullopt;
  auto v = to_double(*s);
  if (!v) throw InvalidConfig(fmt::format("config key '{}': not a number: '{}'", key, *s));
  return v;
}

std::optional<std::int64_t> KvConfig::get_int(std::string_view key) const {
  auto s = get(key);
  if (!s) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size()) {
    throw InvalidConfig(fmt::format("config key '{}': not an integer: '{}'", key, *s));
  }
  return v;
}

std::optional<bool> KvConfig::get_bool(std::string_view key) const {
  auto s = get(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes") return true;
  if (*s == "false" || *s == "0" || *s == "no") return false;
  throw InvalidConfig(fmt::format("config key '{}': not a boolean: '{}'", key, *s));
}

std::optional<std::vector<double>> KvConfig::get_doubles(std::string_view key) const {
  auto s = get(key);
  if (!s) return std::nullopt;
  std::vector<double> out;
  std::string_view rest = *s;
  while (true) {
    const auto comma = rest.find(',');
    auto v = to_double(rest.substr(0, comma));
    if (!v) throw InvalidConfig(fmt::format("config key '{}': bad number list '{}'", key, *s));
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

void KvConfig::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

std::vector<std::string> KvConfig::keys_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (auto it = values_.lower_bound(prefix); it != values_.end(); ++it) {
    if (!it->first.starts_with(prefix)) break;
    out.push_back(it->first);
  }
  return out;
}

double parse_rational(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  std::optional<double> value;
  if (slash == std::string_view::npos) {
    value = to_double(text);
  } else {
    auto num = to_double(text.substr(0, slash));
    auto den = to_double(text.substr(slash + 1));
    if (num && den && *den > 0) value = *num / *den;
  }
  if (!value || *value < 0) {
    throw InvalidConfig(fmt::format("'{}' is not a nonnegative rational", text));
  }
  return *value;
}

}  // namespace perfpower
