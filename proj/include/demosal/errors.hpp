#pragma once

#include <stdexcept>
#include <string>

namespace demosal {

/// Invalid run configuration: a key has a value that violates an invariant.
/// The CLI maps this to exit code 1 and prints the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Malformed command line or unknown configuration key. CLI exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken caller contract: dimension mismatch, invalid action id, index out
/// of range. These indicate a programming error, not bad user input.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Unreadable artifact file; carries the path and 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, long line, const std::string& message)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + message),
        line_(line) {}

  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace demosal
