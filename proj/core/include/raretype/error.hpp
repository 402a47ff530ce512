#pragma once

#include <stdexcept>
#include <string>

namespace raretype {

// Invalid argument or parameter outside the model's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// No assignment of population ranks satisfies the class-count and support
// constraints for the given partition.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::size_t violated_class)
      : std::runtime_error(what), violated_class_(violated_class) {}

  // 1-based index j into (a, r) of the class that could not be filled.
  std::size_t violated_class() const noexcept { return violated_class_; }

 private:
  std::size_t violated_class_;
};

// Invalid sampler or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exact enumeration refused because the state space exceeds the cap.
class EnumerationCapError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class ParseErrorKind { kEmptyFile, kMissingColumn, kRaggedRow, kIo, kFormat };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

}  // namespace raretype
