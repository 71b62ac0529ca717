#pragma once

#include <vector>

#include "kktflow/model.hpp"
#include "kktflow/types.hpp"

namespace kktflow {

/**
 * Orthogonal projector onto the span of the equality-constraint gradients,
 *
 *   H(x) = Jh(x)^T (Jh(x) Jh(x)^T)^{-1} Jh(x),
 *
 * together with the pieces needed downstream (Jacobian and Gram inverse).
 * With no equalities H is the zero matrix. The Gram matrix is factored by
 * Cholesky; a pivot below 1e-12 raises SingularGramError.
 */
struct Projection {
  Matrix matrix;        // H, N x N
  Matrix jac_h;         // n x N
  Matrix gram_inverse;  // n x n

  /// (1 - H) v without forming 1 - H.
  Vector complement(const Vector& v) const { return v - matrix * v; }
};

Projection projection(const Problem& p, const Vector& x);

enum class Regime { Interior, Infeasible, Surface, NoInequalities };

const char* regime_name(Regime r);

struct Monitors {
  double f = 0.0;
  double g_max = 0.0;  // G(x); 0 when there are no inequalities
  double normh2 = 0.0; // |h(x)|^2
};

/**
 * The field at one point. `value` always holds the raw branch value
 *
 *   psi = -h grad_h - (1-H) grad_G^T   if G > 0   (grad_G = summed active gradients)
 *   psi = -h grad_h - (1-H) grad_f^T   otherwise
 *
 * Inside the surface band (and at infeasible points where two or more
 * constraints tie for the maximum) `generators` holds the finite set whose
 * convex hull is the Filippov extension; the objective generator, when
 * present, is last and maps to constraint index -1.
 */
struct FieldSample {
  Regime regime = Regime::NoInequalities;
  Vector value;

  std::vector<Vector> generators;
  std::vector<int> generator_constraints;  // same length; -1 marks the f-generator

  ActiveSet active;                  // empty indices when m = 0
  std::vector<Vector> active_gradients;  // grad g_i for i in active.indices
  Vector grad_f;
  Vector g_values;  // all g_i(x); empty when m = 0
  Vector h_values;
  Vector equality_drift;  // -h grad_h, shared additive part of every branch
  Projection proj;

  Monitors monitors;

  bool has_generators() const { return !generators.empty(); }
};

/**
 * Classify x against the surface band and assemble the field.
 *
 * The thresholds scale with the local data: the band half-width is
 * band * (1 + |x|) and the activity tolerance is tol_act * (1 + |G|),
 * so callers pass the raw configuration values.
 */
FieldSample sample(const Problem& p, const Vector& x, double band, double tol_act);

}  // namespace kktflow
