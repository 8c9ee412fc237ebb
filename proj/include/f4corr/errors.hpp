#pragma once

#include <stdexcept>
#include <string>

namespace f4corr {

struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct RangeError : std::invalid_argument {
  explicit RangeError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct DomainError : std::invalid_argument {
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct InvalidFieldError : std::invalid_argument {
  explicit InvalidFieldError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace f4corr
