#pragma once

#include <optional>
#include <vector>

#include "kktflow/field.hpp"
#include "kktflow/kkt.hpp"
#include "kktflow/types.hpp"

namespace kktflow {

/// Distance from the origin to the convex hull of a vector set, with the
/// convex coefficients achieving it.
struct HullDistance {
  double distance = 0.0;
  Vector witness;
};

/**
 * min over the unit simplex of | sum_i alpha_i v_i |, solved as a small
 * convex QP by projected gradient with exact line search along the
 * projected direction (improvement cutoff 1e-12, iteration cap 1e5).
 */
HullDistance hull_distance(const std::vector<Vector>& vectors);

/// Euclidean projection onto the unit simplex (sort-based).
Vector project_to_simplex(const Vector& y);

/**
 * The tangent-plane selection at a surface point: convex coefficients over
 * the generators whose combination is tangent to every active surface.
 * `coefficients` lives on the unit simplex, ordered like the generators
 * (objective generator last, so objective_weight = coefficients.tail).
 */
struct SlidingSolution {
  Vector coefficients;
  Vector velocity;
  double tangency_residual = 0.0;  // max_i |<velocity, grad g_i>|
  double objective_weight = 0.0;   // coefficient on the objective generator
};

/**
 * Select the sliding velocity from a Surface-regime generator set (objective
 * generator last). With a single active constraint the closed form
 *
 *   r = -<(1-H) grad_f, grad_g> / <(1-H)(grad_g - grad_f), grad_g>
 *
 * is used and accepted only for r in [0,1); a near-zero denominator falls
 * back to the simplex least-squares solve, which is also the general path
 * for several active constraints (accepted when the tangency system
 * residual is <= 1e-8). An empty result means no convex combination is
 * tangent: the trajectory crosses the surface instead of sliding.
 */
std::optional<SlidingSolution> sliding_select(const std::vector<Vector>& generators,
                                              const std::vector<Vector>& active_gradients,
                                              const Projection& proj);

/// Equilibrium test: away from the surface the residual is |value|; on the
/// surface it is the hull distance of the generator set.
std::pair<bool, double> is_equilibrium(const FieldSample& s, double tol_eq);

/**
 * Turn an equilibrium witness (convex coefficients over the sample's
 * generators, objective coefficient last) into KKT multipliers:
 * mu_i = alpha_i / alpha for active i, zero otherwise, and lambda by
 * least squares against the equality Jacobian. Throws
 * DegenerateEquilibriumError when the objective weight is <= 1e-10.
 */
KktCertificate recover_multipliers(const Problem& p, const Vector& x,
                                   const std::vector<int>& generator_constraints,
                                   const Vector& coefficients);

/// Convenience overload for interior points (no active constraints).
KktCertificate recover_multipliers(const Problem& p, const Vector& x);

}  // namespace kktflow
