#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fiberfilm {

/// Argument outside the mathematical domain of a model function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A film thickness that must be strictly positive was not.
///
/// Carries the offending grid index when the violation came from a field.
class PositivityViolation : public std::runtime_error {
 public:
  explicit PositivityViolation(const std::string& what,
                               std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), index_(index) {}

  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  std::optional<std::size_t> index_;
};

class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fiberfilm
