#pragma once

#include <stdexcept>
#include <string>

namespace cspc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's mathematical domain (negative load,
/// zero spectrum, non-positive price, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected during parsing or validation. `field()` carries
/// the dotted path of the offending entry, e.g. "mechanism.gamma" or
/// "wnps[2].spectrum_mhz".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace cspc
