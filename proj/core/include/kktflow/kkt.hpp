#pragma once

#include <vector>

#include "kktflow/model.hpp"
#include "kktflow/types.hpp"

namespace kktflow {

/**
 * A candidate stationary point with multipliers and the four residual
 * groups of the first-order optimality system
 *
 *   grad f + mu grad g + lambda grad h = 0,  mu >= 0,  mu g = 0,
 *   g <= 0,  h = 0.
 */
struct KktCertificate {
  Vector x;
  Vector mu;      // length m
  Vector lambda;  // length n

  double stationarity_residual = 0.0;    // |grad f + mu grad g + lambda grad h|_inf
  double complementarity_residual = 0.0; // max_i |mu_i g_i(x)|
  double ineq_violation = 0.0;           // max(0, G(x))
  double eq_violation = 0.0;             // max_j |h_j(x)|
  double sign_violation = 0.0;           // max(0, -min_i mu_i)

  bool passes(double tol) const {
    return stationarity_residual <= tol && complementarity_residual <= tol &&
           ineq_violation <= tol && eq_violation <= tol && sign_violation <= tol;
  }
};

KktCertificate kkt_residuals(const Problem& p, const Vector& x, const Vector& mu,
                             const Vector& lambda);

/**
 * Brute-force KKT enumeration for desk-scale problems: for every active
 * subset S of the inequalities, run damped Newton on the square system
 *
 *   grad f + sum_{i in S} mu_i grad g_i + lambda grad h = 0,
 *   g_i = 0 (i in S),  h = 0
 *
 * from every point of a grid^N lattice in the box, keep runs that converge
 * with mu_S >= -1e-8 and g <= 1e-8 off S, and deduplicate at 1e-6.
 * The Newton Jacobian uses central finite differences in x, keeping this
 * oracle independent of the dual-number evaluation path it cross-checks.
 */
std::vector<KktCertificate> oracle_enumerate(const Problem& p, const Vector& box_lo,
                                             const Vector& box_hi, int grid,
                                             int newton_iters = 60);

struct LocalMinCheck {
  bool is_local_min = false;
  int feasible_samples = 0;
  double worst_drop = 0.0;  // most negative f(y) - f(x) seen over feasible y
};

/**
 * Sampling surrogate for local minimality: draw `samples` random points in a
 * tangent ball of the given radius, project them back onto the equality
 * manifold, discard infeasible ones, and compare objectives against f(x).
 */
LocalMinCheck local_minimality_sample_check(const Problem& p, const Vector& x,
                                            double radius, int samples, Rng& rng,
                                            double f_slack = 1e-9);

}  // namespace kktflow
