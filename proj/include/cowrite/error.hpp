#pragma once

#include <stdexcept>
#include <string>

namespace cowrite {

// Exit-code families used by the CLI: 2 usage, 3 data validation, 4 numerical.

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A replay step could not be applied.
class ReplayError : public DataError {
public:
  ReplayError(std::size_t event_index, const std::string& what)
      : DataError("event " + std::to_string(event_index) + ": " + what), event_index_(event_index) {}

  std::size_t event_index() const noexcept { return event_index_; }

private:
  std::size_t event_index_;
};

class TrackingError : public DataError {
public:
  using DataError::DataError;
};

/// Similarity backend failure (network, protocol, or validation).
class ProviderError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cowrite
