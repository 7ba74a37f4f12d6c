#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcurv {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A radius left the open interval I of the warp profile.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A custom warp profile broke lambda > 0 or lambda' > 0.
class ProfileError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Eigenvalue tuple outside the Garding cone. `node` is set when the
// violation comes from a mesh node, otherwise it is npos.
class ConeError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ConeError(const std::string& what, std::size_t node = npos)
      : Error(what), node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Invalid configuration; `key` names the offending config key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class SolverError : public Error {
 public:
  enum class Kind { max_iterations, line_search, cone, barrier_guard, domain, singular, breakdown };

  SolverError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace wcurv
