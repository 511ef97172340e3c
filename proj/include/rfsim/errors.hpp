#pragma once

#include <stdexcept>
#include <string>

namespace rfsim {

/// Invalid parameter or configuration field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form quantity is undefined for the given parameters.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Handshake state machine called out of order.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric cannot be extracted from a trace (too short, no peaks, ...).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rfsim
