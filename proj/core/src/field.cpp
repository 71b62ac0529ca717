#include "kktflow/field.hpp"

#include <cmath>

namespace kktflow {

namespace {

/// Lower-triangular Cholesky of a small SPD matrix with explicit pivot
/// tracking, so a rank-deficient Gram matrix is reported with its pivot.
Matrix cholesky_or_throw(const Matrix& gram) {
  const int n = static_cast<int>(gram.rows());
  Matrix L = Matrix::Zero(n, n);
  double smallest_pivot = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double d = gram(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    smallest_pivot = std::min(smallest_pivot, d);
    if (d < 1e-12)
      throw SingularGramError("equality-gradient Gram matrix is numerically singular",
                              smallest_pivot);
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = gram(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

}  // namespace

Projection projection(const Problem& p, const Vector& x) {
  const int N = p.n_vars();
  const int n = p.num_equalities();
  Projection out;
  if (n == 0) {
    out.matrix = Matrix::Zero(N, N);
    out.jac_h = Matrix(0, N);
    out.gram_inverse = Matrix(0, 0);
    return out;
  }
  out.jac_h = p.equality_jacobian(x);
  Matrix gram = out.jac_h * out.jac_h.transpose();
  Matrix L = cholesky_or_throw(gram);
  // Gram inverse via two triangular solves against the identity.
  Matrix inv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  out.gram_inverse = L.transpose().triangularView<Eigen::Upper>().solve(inv);
  out.matrix = out.jac_h.transpose() * out.gram_inverse * out.jac_h;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose().eval());
  return out;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Interior: return "interior";
    case Regime::Infeasible: return "infeasible";
    case Regime::Surface: return "surface";
    case Regime::NoInequalities: return "no-inequalities";
  }
  return "?";
}

FieldSample sample(const Problem& p, const Vector& x, double band, double tol_act) {
  const int N = p.n_vars();
  const int m = p.num_inequalities();

  FieldSample s;
  s.proj = projection(p, x);
  s.h_values = p.equality_values(x);
  // -h grad_h = -sum_j h_j grad h_j
  s.equality_drift = s.h_values.size() > 0
                         ? Vector(-(s.proj.jac_h.transpose() * s.h_values))
                         : Vector(Vector::Zero(N));

  auto [f_value, grad_f] = p.objective().eval_grad(x);
  s.grad_f = std::move(grad_f);
  s.monitors.f = f_value;
  s.monitors.normh2 = s.h_values.squaredNorm();

  const Vector f_generator = s.equality_drift - s.proj.complement(s.grad_f);

  if (m == 0) {
    s.regime = Regime::NoInequalities;
    s.value = f_generator;
    s.monitors.g_max = 0.0;
    return s;
  }

  s.g_values = p.inequality_values(x);
  const Vector& gvals = s.g_values;
  const double G = gvals.maxCoeff();
  s.monitors.g_max = G;

  const double eff_tol_act = tol_act * (1.0 + std::abs(G));
  s.active.level = G;
  s.active.summed_gradient = Vector::Zero(N);
  for (int i = 0; i < m; ++i) {
    if (gvals[i] >= G - eff_tol_act) {
      s.active.indices.push_back(i);
      Vector gi = p.inequalities()[i].eval_grad(x).second;
      s.active.summed_gradient += gi;
      s.active_gradients.push_back(std::move(gi));
    }
  }

  const double eff_band = band * (1.0 + x.norm());
  if (G > eff_band) {
    s.regime = Regime::Infeasible;
  } else if (G < -eff_band) {
    s.regime = Regime::Interior;
  } else {
    s.regime = Regime::Surface;
  }

  // Raw branch value, exactly as the two-branch definition reads.
  if (G > 0.0) {
    s.value = s.equality_drift - s.proj.complement(s.active.summed_gradient);
  } else {
    s.value = f_generator;
  }

  const bool want_generators =
      s.regime == Regime::Surface ||
      (s.regime == Regime::Infeasible && s.active.indices.size() >= 2);
  if (want_generators) {
    auto push_unique = [&](Vector gen, int constraint) {
      for (const Vector& existing : s.generators)
        if ((existing - gen).lpNorm<Eigen::Infinity>() <= 1e-12) return;
      s.generators.push_back(std::move(gen));
      s.generator_constraints.push_back(constraint);
    };
    for (std::size_t k = 0; k < s.active.indices.size(); ++k)
      push_unique(s.equality_drift - s.proj.complement(s.active_gradients[k]),
                  s.active.indices[k]);
    if (s.regime == Regime::Surface) {
      // Keep the objective generator last even if it coincides with an
      // active-constraint generator (the overlapping constraint then simply
      // recovers a zero multiplier).
      for (std::size_t k = 0; k < s.generators.size();) {
        if ((s.generators[k] - f_generator).lpNorm<Eigen::Infinity>() <= 1e-12) {
          s.generators.erase(s.generators.begin() + static_cast<long>(k));
          s.generator_constraints.erase(s.generator_constraints.begin() + static_cast<long>(k));
        } else {
          ++k;
        }
      }
      s.generators.push_back(f_generator);
      s.generator_constraints.push_back(-1);
    }
  }

  return s;
}

}  // namespace kktflow
