#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kktflow/expr.hpp"
#include "kktflow/types.hpp"

namespace kktflow {

/**
 * A full mathematical program over x in R^N:
 *
 *   minimize f(x)  subject to  g_i(x) <= 0 (i = 1..m),  h_j(x) = 0 (j = 1..n)
 *
 * Immutable after construction; all evaluation entry points are reentrant.
 */
class Problem {
public:
  Problem(Expression objective, std::vector<Expression> inequalities,
          std::vector<Expression> equalities);

  const Expression& objective() const { return objective_; }
  const std::vector<Expression>& inequalities() const { return inequalities_; }
  const std::vector<Expression>& equalities() const { return equalities_; }

  int n_vars() const { return objective_.n_vars(); }
  int num_inequalities() const { return static_cast<int>(inequalities_.size()); }
  int num_equalities() const { return static_cast<int>(equalities_.size()); }

  /// h(x) as a vector of length n.
  Vector equality_values(const Vector& x) const;
  /// Jacobian of h, n x N (rows are gradients).
  Matrix equality_jacobian(const Vector& x) const;
  /// All g_i(x) as a vector of length m.
  Vector inequality_values(const Vector& x) const;

private:
  Expression objective_;
  std::vector<Expression> inequalities_;
  std::vector<Expression> equalities_;
};

/// Active inequality structure at a point: the level G(x) = max_i g_i(x),
/// the indices attaining it up to a tolerance, and the plain (unweighted)
/// sum of their gradients.
struct ActiveSet {
  double level = 0.0;
  std::vector<int> indices;  // sorted, 0-based
  Vector summed_gradient;
};

/// Outcome of the standing-hypothesis checks at one point. Failures are
/// diagnostics, not errors; condition (b)/(c) are vacuously true away from
/// the constraint surface or when there is nothing to check.
struct QualificationReport {
  bool gram_invertible = true;
  double gram_min_eigenvalue = 0.0;

  bool spans_independent = true;
  int rank_stacked = 0;
  int rank_equalities = 0;
  int rank_active_inequalities = 0;

  bool hull_excludes_zero = true;
  double hull_distance = 0.0;

  bool surface_checked = false;  // were (b)/(c) applicable at this point

  bool all_ok() const { return gram_invertible && spans_independent && hull_excludes_zero; }
};

/// indices = { i : g_i(x) >= level - tol_act }. Requires m >= 1.
ActiveSet active_set(const Problem& p, const Vector& x, double tol_act);

/// Checks, at x: (a) invertibility of the equality Gram matrix (smallest
/// eigenvalue > tol); when the point sits on the constraint surface
/// (|G(x)| <= surface_band * (1 + |x|)): (b) triviality of
/// span{grad h} ∩ span{active grad g} via ranks of the stacked Jacobians,
/// and (c) 0 outside the convex hull of the active inequality gradients.
QualificationReport check_qualifications(const Problem& p, const Vector& x, double tol,
                                         double surface_band = 1e-7);

/// (max(0, G(x)), max_j |h_j(x)|); zero components when m or n is 0.
std::pair<double, double> feasibility_residual(const Problem& p, const Vector& x);

/// Parse the text problem format:
///   vars N
///   min <expr>
///   ineq <expr>     (meaning expr <= 0, repeatable)
///   eq <expr>       (meaning expr = 0, repeatable)
/// '#' starts a comment; blank lines are skipped. Exactly one `min` line.
/// Expressions containing `abs` are rejected unless allow_nonsmooth is set.
Problem parse_problem_text(const std::string& text, bool allow_nonsmooth = false);
Problem load_problem(const std::string& path, bool allow_nonsmooth = false);

/// Canonical echo of a parsed problem; parsing the echo reproduces the
/// problem, and echoing twice produces identical bytes.
std::string print_problem(const Problem& p);

}  // namespace kktflow
