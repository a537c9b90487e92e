#pragma once

#include <stdexcept>
#include <string>

namespace aislab {

/// Malformed or out-of-range caller input.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A problem instance exceeds a hard size limit of a solver.
class SizeError : public std::length_error {
 public:
  explicit SizeError(const std::string& what) : std::length_error(what) {}
};

/// A feature update produced an id outside the generator's feature set.
class ClosureError : public std::out_of_range {
 public:
  explicit ClosureError(const std::string& what) : std::out_of_range(what) {}
};

/// Squared MMD came out clearly negative: the kernel is not positive semidefinite.
class KernelValidityError : public std::domain_error {
 public:
  explicit KernelValidityError(const std::string& what) : std::domain_error(what) {}
};

/// An internal construction invariant broke (e.g. an undefined codebook entry was read).
class ConsistencyError : public std::logic_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

/// A numerical step was rejected because its input was not finite.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A machine-checked bound was violated. Carries the serialized counterexample.
class BoundViolation : public std::runtime_error {
 public:
  BoundViolation(const std::string& what, std::string counterexample_json)
      : std::runtime_error(what), counterexample_(std::move(counterexample_json)) {}
  const std::string& counterexample() const { return counterexample_; }

 private:
  std::string counterexample_;
};

}  // namespace aislab
