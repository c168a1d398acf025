#pragma once

#include <stdexcept>
#include <string>

namespace mavsir {

// Error categories map one-to-one onto the CLI exit codes.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename E = DataError>
inline void require(bool cond, const std::string& what) {
  if (!cond) throw E(what);
}

}  // namespace detail

}  // namespace mavsir
