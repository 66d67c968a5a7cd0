#pragma once

#include <stdexcept>
#include <string>

namespace alab {

enum class ErrorKind { input, hypothesis, numeric, resource, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

// A theorem hypothesis does not hold for the supplied data (e.g. gap-isospectral pair).
class HypothesisError : public Error {
 public:
  explicit HypothesisError(const std::string& what) : Error(ErrorKind::hypothesis, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, int completed_radius)
      : Error(ErrorKind::resource, what), completed_radius_(completed_radius) {}
  int completed_radius() const noexcept { return completed_radius_; }

 private:
  int completed_radius_;
};

// Process exit code for each error kind: 2 hypothesis, 3 numeric, 4 resource cap, 1 otherwise.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::hypothesis: return 2;
    case ErrorKind::numeric: return 3;
    case ErrorKind::resource: return 4;
    default: return 1;
  }
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::hypothesis: return "hypothesis-violated";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::resource: return "resource-cap";
    default: return "internal";
  }
}

}  // namespace alab
