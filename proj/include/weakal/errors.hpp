#pragma once

#include <stdexcept>
#include <string>

namespace weakal {

// Invalid configuration (bad dimensions, violated invariants, unknown keys).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; messages carry the offending line number where known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the operation's domain (out-of-range index, empty set, ...).
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Numerical failure during optimization (non-finite loss).
struct TrainError : std::runtime_error {
  explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

// External-annotator file exchange violated the request/response contract.
struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace weakal
