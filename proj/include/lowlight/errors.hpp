#pragma once

#include <stdexcept>
#include <string>

namespace lowlight {

// Error taxonomy. The CLI maps ConfigError to exit code 2 and everything
// else to a per-file failure (exit code 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParamError : public Error {
 public:
  using Error::Error;
};

class ImageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lowlight
