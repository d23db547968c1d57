#ifndef HDIST_ERROR_HPP
#define HDIST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hdist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SingularLinearPart : public Error {
 public:
  using Error::Error;
};

/// An index classified non-resonant at the exact tolerance but numerically
/// resonant.
class ToleranceConflict : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input file.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the normalization pipeline, tagged with the stage name.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Failure building orbits, cocycles or charts for an endomorphism.
class DynamicsError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdist

#endif  // HDIST_ERROR_HPP
