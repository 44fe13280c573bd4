#ifndef CARTAN_ERRORS_HPP
#define CARTAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cartan {

// Base class for every error the library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Expression text could not be parsed; `position` is a 0-based byte offset.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

// Evaluation hit a point outside an expression's domain (division by zero,
// sqrt/log off the admissible branch). `subexpression` is the offending node.
struct DomainError : Error {
  DomainError(const std::string& what, std::string subexpression)
      : Error(what + " in subexpression: " + subexpression),
        subexpression(std::move(subexpression)) {}
  std::string subexpression;
};

// Metric validation failures; `sample_index` names the first failing sample.
struct ValidationError : Error {
  enum class Kind { NotReal, NotHomogeneous, NotPositiveDefinite };
  ValidationError(Kind kind, int sample_index, const std::string& detail)
      : Error(kind_name(kind) + ": sample " + std::to_string(sample_index) +
              ": " + detail),
        kind(kind),
        sample_index(sample_index) {}
  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::NotReal: return "NotReal";
      case Kind::NotHomogeneous: return "NotHomogeneous";
      default: return "NotPositiveDefinite";
    }
  }
  Kind kind;
  int sample_index;
};

// Fundamental tensor numerically singular (condition number above guard).
struct SingularMetric : Error {
  explicit SingularMetric(double condition)
      : Error("SingularMetric: condition number " + std::to_string(condition) +
              " exceeds guard"),
        condition(condition) {}
  double condition;
};

struct BetaZero : Error {
  explicit BetaZero(int sample_index)
      : Error("BetaZero: |beta| below floor at sample " +
              std::to_string(sample_index)),
        sample_index(sample_index) {}
  int sample_index;
};

struct GammaNonPositive : Error {
  GammaNonPositive(int sample_index, double gamma)
      : Error("GammaNonPositive: gamma = " + std::to_string(gamma) +
              " at sample " + std::to_string(sample_index)),
        sample_index(sample_index),
        gamma(gamma) {}
  int sample_index;
  double gamma;
};

struct DegenerateHessian : Error {
  explicit DegenerateHessian(double residual)
      : Error("DegenerateHessian: duality residual " + std::to_string(residual)),
        residual(residual) {}
  double residual;
};

struct NewtonDiverged : Error {
  NewtonDiverged(double residual, int iterations)
      : Error("NewtonDiverged: residual " + std::to_string(residual) +
              " after " + std::to_string(iterations) + " iterations"),
        residual(residual),
        iterations(iterations) {}
  double residual;
  int iterations;
};

struct FrameConditionFailed : Error {
  explicit FrameConditionFailed(double residual)
      : Error("FrameConditionFailed: nonholonomic frame residual " +
              std::to_string(residual)),
        residual(residual) {}
  double residual;
};

struct InternalInconsistency : Error {
  explicit InternalInconsistency(const std::string& what)
      : Error("InternalInconsistency: " + what) {}
};

struct NotPurelyHermitian : Error {
  explicit NotPurelyHermitian(double residual)
      : Error("NotPurelyHermitian: alignment residual " +
              std::to_string(residual)),
        residual(residual) {}
  double residual;
};

// Trajectory left the admissible region; `last_s` is the last good parameter.
struct DomainExit : Error {
  DomainExit(double last_s, const std::string& why)
      : Error("DomainExit at s = " + std::to_string(last_s) + ": " + why),
        last_s(last_s) {}
  double last_s;
};

}  // namespace cartan

#endif
