// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace deepauto {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or sample dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is outside its allowed range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data cannot be used (all-missing channel, malformed record, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A persisted artifact is unreadable: bad magic, version, truncation or checksum.
class FormatError : public Error {
 public:
  enum class Kind { bad_magic, bad_version, truncated, checksum, bad_content };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace deepauto
