#include "kktflow/kkt.hpp"

#include <algorithm>
#include <cmath>

#include "kktflow/field.hpp"

namespace kktflow {

KktCertificate kkt_residuals(const Problem& p, const Vector& x, const Vector& mu,
                             const Vector& lambda) {
  const int m = p.num_inequalities();
  const int n = p.num_equalities();
  if (mu.size() != m || lambda.size() != n || x.size() != p.n_vars())
    throw std::invalid_argument("kkt_residuals dimension mismatch");

  KktCertificate cert;
  cert.x = x;
  cert.mu = mu;
  cert.lambda = lambda;

  Vector stat = p.objective().eval_grad(x).second;
  for (int i = 0; i < m; ++i) {
    const auto [gi, grad_gi] = p.inequalities()[i].eval_grad(x);
    stat += mu[i] * grad_gi;
    cert.complementarity_residual = std::max(cert.complementarity_residual, std::abs(mu[i] * gi));
    cert.ineq_violation = std::max(cert.ineq_violation, gi);
  }
  cert.ineq_violation = std::max(cert.ineq_violation, 0.0);
  for (int j = 0; j < n; ++j) {
    const auto [hj, grad_hj] = p.equalities()[j].eval_grad(x);
    stat += lambda[j] * grad_hj;
    cert.eq_violation = std::max(cert.eq_violation, std::abs(hj));
  }
  cert.stationarity_residual = stat.lpNorm<Eigen::Infinity>();
  if (m > 0) cert.sign_violation = std::max(0.0, -mu.minCoeff());
  return cert;
}

namespace {

/// Residual of the active-set KKT system for subset S:
///   z = (x, mu_S, lambda);
///   F = (grad f + sum mu_i grad g_i + lambda grad h, g_S, h).
struct SubsetSystem {
  const Problem& p;
  std::vector<int> subset;

  int N() const { return p.n_vars(); }
  int size() const { return N() + static_cast<int>(subset.size()) + p.num_equalities(); }

  Vector lagrangian_gradient(const Vector& x, const Vector& mu_s, const Vector& lambda) const {
    Vector g = p.objective().eval_grad(x).second;
    for (std::size_t k = 0; k < subset.size(); ++k)
      g += mu_s[static_cast<Eigen::Index>(k)] *
           p.inequalities()[subset[k]].eval_grad(x).second;
    for (int j = 0; j < p.num_equalities(); ++j)
      g += lambda[j] * p.equalities()[j].eval_grad(x).second;
    return g;
  }

  Vector residual(const Vector& z) const {
    const int N_ = N();
    const int s = static_cast<int>(subset.size());
    const Vector x = z.head(N_);
    const Vector mu_s = z.segment(N_, s);
    const Vector lambda = z.tail(p.num_equalities());
    Vector F(size());
    F.head(N_) = lagrangian_gradient(x, mu_s, lambda);
    for (int k = 0; k < s; ++k) F[N_ + k] = p.inequalities()[subset[k]].value(x);
    for (int j = 0; j < p.num_equalities(); ++j)
      F[N_ + s + j] = p.equalities()[j].value(x);
    return F;
  }

  /// Multipliers enter linearly, so their Jacobian columns are exact
  /// constraint gradients; only the x-block needs finite differences.
  Matrix jacobian(const Vector& z) const {
    const int N_ = N();
    const int s = static_cast<int>(subset.size());
    const int n = p.num_equalities();
    const Vector x = z.head(N_);
    const Vector mu_s = z.segment(N_, s);
    const Vector lambda = z.tail(n);

    Matrix J = Matrix::Zero(size(), size());
    for (int c = 0; c < N_; ++c) {
      const double step = 1e-6 * (1.0 + std::abs(x[c]));
      Vector xp = x, xm = x;
      xp[c] += step;
      xm[c] -= step;
      J.block(0, c, N_, 1) =
          (lagrangian_gradient(xp, mu_s, lambda) - lagrangian_gradient(xm, mu_s, lambda)) /
          (2.0 * step);
    }
    for (int k = 0; k < s; ++k) {
      Vector grad = p.inequalities()[subset[k]].eval_grad(x).second;
      J.block(0, N_ + k, N_, 1) = grad;
      J.block(N_ + k, 0, 1, N_) = grad.transpose();
    }
    for (int j = 0; j < n; ++j) {
      Vector grad = p.equalities()[j].eval_grad(x).second;
      J.block(0, N_ + s + j, N_, 1) = grad;
      J.block(N_ + s + j, 0, 1, N_) = grad.transpose();
    }
    return J;
  }
};

bool newton_solve(const SubsetSystem& sys, Vector& z, int max_iters) {
  double norm = sys.residual(z).lpNorm<Eigen::Infinity>();
  if (!std::isfinite(norm)) return false;
  for (int it = 0; it < max_iters; ++it) {
    if (norm <= 1e-11) return true;
    Vector F = sys.residual(z);
    Matrix J = sys.jacobian(z);
    Vector step = J.fullPivLu().solve(-F);
    if (!step.allFinite()) return false;
    double damp = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      Vector z_try = z + damp * step;
      double norm_try;
      try {
        norm_try = sys.residual(z_try).lpNorm<Eigen::Infinity>();
      } catch (const EvalDomainError&) {
        damp *= 0.5;
        continue;
      }
      if (std::isfinite(norm_try) && norm_try < norm) {
        z = z_try;
        norm = norm_try;
        accepted = true;
        break;
      }
      damp *= 0.5;
    }
    if (!accepted) return false;
  }
  return norm <= 1e-11;
}

}  // namespace

std::vector<KktCertificate> oracle_enumerate(const Problem& p, const Vector& box_lo,
                                             const Vector& box_hi, int grid,
                                             int newton_iters) {
  const int N = p.n_vars();
  const int m = p.num_inequalities();
  const int n = p.num_equalities();
  if (box_lo.size() != N || box_hi.size() != N)
    throw std::invalid_argument("oracle box dimension mismatch");
  if (grid < 1) throw std::invalid_argument("oracle grid must be >= 1");

  // grid^N lattice points (midpoint when grid == 1)
  std::vector<Vector> starts;
  std::vector<int> digit(N, 0);
  for (;;) {
    Vector x(N);
    for (int d = 0; d < N; ++d) {
      x[d] = grid == 1 ? 0.5 * (box_lo[d] + box_hi[d])
                       : box_lo[d] + (box_hi[d] - box_lo[d]) * digit[d] / (grid - 1);
    }
    starts.push_back(std::move(x));
    int d = 0;
    while (d < N && ++digit[d] == grid) digit[d++] = 0;
    if (d == N) break;
  }

  std::vector<KktCertificate> found;
  auto try_keep = [&](const Vector& x, const Vector& mu, const Vector& lambda) {
    for (const auto& c : found)
      if ((c.x - x).lpNorm<Eigen::Infinity>() <= 1e-6) return;
    KktCertificate cert = kkt_residuals(p, x, mu, lambda);
    if (cert.sign_violation > 1e-8) return;
    if (cert.ineq_violation > 1e-8) return;
    found.push_back(std::move(cert));
  };

  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    SubsetSystem sys{p, {}};
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) sys.subset.push_back(i);
    // more equations than unknowns in x is generically unsolvable; Newton
    // simply fails to converge there, so no special-casing is needed
    for (const Vector& x0 : starts) {
      Vector z = Vector::Zero(sys.size());
      z.head(N) = x0;
      bool ok;
      try {
        ok = newton_solve(sys, z, newton_iters);
      } catch (const EvalDomainError&) {
        continue;
      }
      if (!ok) continue;
      Vector x = z.head(N);
      Vector mu = Vector::Zero(m);
      bool sign_ok = true;
      for (std::size_t k = 0; k < sys.subset.size(); ++k) {
        const double mu_k = z[N + static_cast<int>(k)];
        if (mu_k < -1e-8) sign_ok = false;
        mu[sys.subset[k]] = std::max(mu_k, 0.0);
      }
      if (!sign_ok) continue;
      try {
        try_keep(x, mu, z.tail(n));
      } catch (const EvalDomainError&) {
        continue;
      }
    }
  }

  std::sort(found.begin(), found.end(), [](const KktCertificate& a, const KktCertificate& b) {
    for (int i = 0; i < a.x.size(); ++i)
      if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    return false;
  });
  return found;
}

LocalMinCheck local_minimality_sample_check(const Problem& p, const Vector& x, double radius,
                                            int samples, Rng& rng, double f_slack) {
  LocalMinCheck out;
  const int N = p.n_vars();
  const int n = p.num_equalities();
  const double f0 = p.objective().value(x);
  const double tol_feas = 1e-9;

  Matrix H = Matrix::Zero(N, N);
  if (n > 0) H = projection(p, x).matrix;

  out.is_local_min = true;
  for (int s = 0; s < samples; ++s) {
    Vector dir(N);
    for (int i = 0; i < N; ++i) dir[i] = rng.normal();
    if (n > 0) dir -= H * dir;  // tangent to the equality manifold at x
    const double len = dir.norm();
    if (len < 1e-12) continue;
    dir *= radius * std::pow(rng.uniform01(), 1.0 / N) / len;
    Vector y = x + dir;

    bool feasible = true;
    try {
      if (n > 0) {
        // pull the sample back onto h = 0
        for (int it = 0; it < 8; ++it) {
          Vector h = p.equality_values(y);
          if (h.cwiseAbs().maxCoeff() <= 1e-12) break;
          Matrix Jh = p.equality_jacobian(y);
          Vector delta =
              Jh.transpose() * (Jh * Jh.transpose()).ldlt().solve(h);
          y -= delta;
        }
        if (p.equality_values(y).cwiseAbs().maxCoeff() > tol_feas) feasible = false;
      }
      if (feasible && p.num_inequalities() > 0)
        feasible = p.inequality_values(y).maxCoeff() <= tol_feas;
      if (!feasible) continue;
      ++out.feasible_samples;
      const double fy = p.objective().value(y);
      const double drop = fy - f0;
      out.worst_drop = std::min(out.worst_drop, drop);
      if (drop < -f_slack * (1.0 + std::abs(f0))) out.is_local_min = false;
    } catch (const EvalDomainError&) {
      continue;
    }
  }
  return out;
}

}  // namespace kktflow
