#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace kktflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Error while parsing an expression or a problem/LP file.
/// `offset` is the byte position in the input where the problem was detected.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string msg, std::size_t offset)
      : std::runtime_error(std::move(msg)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// Evaluation hit a point outside the domain of some elementary function
/// (log of a nonpositive value, division by zero, 0^negative, ...).
/// `where` is a rendering of the offending subexpression.
class EvalDomainError : public std::runtime_error {
public:
  EvalDomainError(std::string msg, std::string where)
      : std::runtime_error(std::move(msg)), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

private:
  std::string where_;
};

/// The equality-constraint Gram matrix lost rank at the evaluation point,
/// i.e. a constraint qualification failed there.
class SingularGramError : public std::runtime_error {
public:
  SingularGramError(std::string msg, double smallest_pivot)
      : std::runtime_error(std::move(msg)), smallest_pivot_(smallest_pivot) {}
  double smallest_pivot() const { return smallest_pivot_; }

private:
  double smallest_pivot_;
};

/// Equilibrium witness put (numerically) zero weight on the objective
/// generator; multipliers cannot be recovered at such a point.
class DegenerateEquilibriumError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Deterministic RNG wrapper. The uniform mapping is spelled out explicitly
/// instead of going through std::uniform_real_distribution, whose output is
/// implementation-defined; reports produced from a fixed seed must be
/// byte-identical across platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  Vector uniform_vector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Standard normal via Box-Muller on the deterministic uniforms.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace kktflow
