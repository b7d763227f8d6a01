#pragma once

#include <stdexcept>
#include <string>

namespace vmpladmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class ConvergenceError : public Error { public: using Error::Error; };
class MissingBoundError : public Error { public: using Error::Error; };
class WeightError : public Error { public: using Error::Error; };
class UnsupportedMetricError : public Error { public: using Error::Error; };
class LinearSolveError : public Error { public: using Error::Error; };
class ScheduleContractError : public Error { public: using Error::Error; };
class BetaGuardError : public Error { public: using Error::Error; };
class StaleMetricError : public Error { public: using Error::Error; };
class InsufficientDataError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class ScaleError : public Error { public: using Error::Error; };
class UnsupportedError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

/// NaN or Inf appeared in an iterate; carries the iteration index.
class NumericalError : public Error {
 public:
  NumericalError(long iteration, const std::string& what)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace vmpladmm
