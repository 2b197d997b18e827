#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "demosal/errors.hpp"

namespace demosal::detail {

inline std::optional<long long> try_parse_ll(const std::string& s) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

inline std::optional<unsigned long long> try_parse_ull(const std::string& s) {
  unsigned long long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

inline std::optional<double> try_parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

/// Reads typed values out of a string-keyed parameter map, tracking which
/// keys were consumed so leftovers (typos) can be rejected.
class ParamReader {
 public:
  ParamReader(std::string key_prefix, const std::map<std::string, std::string>& params)
      : prefix_(std::move(key_prefix)), params_(params) {}

  int get_int(const std::string& key, int fallback) {
    const auto* raw = fetch(key);
    if (!raw) return fallback;
    const auto v = try_parse_ll(*raw);
    if (!v) throw ConfigError(prefix_ + key, "expected an integer, got '" + *raw + "'");
    return static_cast<int>(*v);
  }

  double get_double(const std::string& key, double fallback) {
    const auto* raw = fetch(key);
    if (!raw) return fallback;
    const auto v = try_parse_double(*raw);
    if (!v) throw ConfigError(prefix_ + key, "expected a number, got '" + *raw + "'");
    return *v;
  }

  bool get_flag(const std::string& key, bool fallback) {
    const auto* raw = fetch(key);
    if (!raw) return fallback;
    if (*raw == "1" || *raw == "true") return true;
    if (*raw == "0" || *raw == "false") return false;
    throw ConfigError(prefix_ + key, "expected 0/1/true/false, got '" + *raw + "'");
  }

  std::string get_string(const std::string& key, std::string fallback) {
    const auto* raw = fetch(key);
    return raw ? *raw : fallback;
  }

  /// Rejects parameters that no getter asked about.
  void finish() const {
    for (const auto& [key, value] : params_) {
      if (!used_.count(key)) {
        throw ConfigError(prefix_ + key, "unknown parameter");
      }
    }
  }

 private:
  const std::string* fetch(const std::string& key) {
    used_.insert(key);
    auto it = params_.find(key);
    return it == params_.end() ? nullptr : &it->second;
  }

  std::string prefix_;
  const std::map<std::string, std::string>& params_;
  std::set<std::string> used_;
};

}  // namespace demosal::detail
