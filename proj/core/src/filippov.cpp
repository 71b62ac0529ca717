#include "kktflow/filippov.hpp"

#include <algorithm>
#include <cmath>

namespace kktflow {

Vector project_to_simplex(const Vector& y) {
  const int k = static_cast<int>(y.size());
  std::vector<double> u(y.data(), y.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (int i = 0; i < k; ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  Vector out(k);
  for (int i = 0; i < k; ++i) out[i] = std::max(y[i] - tau, 0.0);
  return out;
}

namespace {

/// min_{alpha in simplex} |V alpha| for the matrix whose columns are the
/// input vectors. Shared core of hull_distance and the sliding solver.
std::pair<double, Vector> simplex_least_norm(const Matrix& V) {
  const int k = static_cast<int>(V.cols());
  if (k == 1) return {V.col(0).norm(), Vector::Ones(1)};

  const Matrix G = V.transpose() * V;
  double L = 2.0 * G.trace();  // upper bound on the largest eigenvalue of 2G
  if (L <= 0.0) L = 1.0;

  Vector alpha = Vector::Constant(k, 1.0 / k);
  double q = alpha.dot(G * alpha);
  constexpr int kMaxIters = 100000;
  for (int it = 0; it < kMaxIters; ++it) {
    const Vector grad = 2.0 * (G * alpha);
    const Vector d = project_to_simplex(alpha - grad / L) - alpha;
    if (d.lpNorm<Eigen::Infinity>() < 1e-16) break;
    const double dGd = d.dot(G * d);
    const double slope = alpha.dot(G * d);  // (1/2) dq along d
    double beta;
    if (dGd <= 0.0) {
      beta = slope < 0.0 ? 1.0 : 0.0;
    } else {
      beta = std::clamp(-slope / dGd, 0.0, 1.0);
    }
    if (beta == 0.0) break;
    alpha += beta * d;
    const double q_new = alpha.dot(G * alpha);
    if (q - q_new < 1e-12) {
      q = q_new;
      break;
    }
    q = q_new;
  }

  // Polish on the face the iterate settled on: solve the equality-constrained
  // minimum over the detected support exactly. The projected-gradient tail is
  // linear and stalls around 1e-6 in distance; the face solve sharpens it to
  // machine precision whenever the detected support is right.
  std::vector<int> support;
  for (int j = 0; j < k; ++j)
    if (alpha[j] > 1e-9) support.push_back(j);
  while (!support.empty()) {
    const int ks = static_cast<int>(support.size());
    Matrix sys = Matrix::Zero(ks + 1, ks + 1);
    for (int a = 0; a < ks; ++a)
      for (int b = 0; b < ks; ++b) sys(a, b) = 2.0 * G(support[a], support[b]);
    sys.block(0, ks, ks, 1).setOnes();
    sys.block(ks, 0, 1, ks).setOnes();
    Vector rhs = Vector::Zero(ks + 1);
    rhs[ks] = 1.0;
    Vector sol = sys.fullPivLu().solve(rhs);
    if (!sol.allFinite()) break;
    int worst = -1;
    double worst_val = -1e-12;
    for (int a = 0; a < ks; ++a) {
      if (sol[a] < worst_val) {
        worst_val = sol[a];
        worst = a;
      }
    }
    if (worst >= 0) {
      support.erase(support.begin() + worst);
      continue;
    }
    Vector cand = Vector::Zero(k);
    for (int a = 0; a < ks; ++a) cand[support[a]] = std::max(sol[a], 0.0);
    cand /= cand.sum();
    const double q_cand = cand.dot(G * cand);
    if (q_cand <= q) {
      alpha = cand;
      q = q_cand;
    }
    break;
  }
  return {std::sqrt(std::max(q, 0.0)), alpha};
}

Matrix columns(const std::vector<Vector>& vs) {
  Matrix V(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) V.col(static_cast<Eigen::Index>(j)) = vs[j];
  return V;
}

}  // namespace

HullDistance hull_distance(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("hull_distance of empty set");
  auto [dist, witness] = simplex_least_norm(columns(vectors));
  return {dist, std::move(witness)};
}

std::optional<SlidingSolution> sliding_select(const std::vector<Vector>& generators,
                                              const std::vector<Vector>& active_gradients,
                                              const Projection& proj) {
  const int k = static_cast<int>(generators.size());
  const int n_act = static_cast<int>(active_gradients.size());
  if (k < 2 || n_act < 1)
    throw std::invalid_argument("sliding_select needs >= 2 generators and >= 1 active gradient");

  // Projected generator components. The shared -h grad_h drift lies in the
  // span of the equality gradients, so (1-H) strips it and what remains is
  // exactly -(1-H) grad(c_j) for the branch function c_j.
  std::vector<Vector> projected(k);
  for (int j = 0; j < k; ++j) projected[j] = proj.complement(generators[j]);

  auto finish = [&](Vector alpha) -> SlidingSolution {
    SlidingSolution sol;
    for (int i = 0; i < alpha.size(); ++i) alpha[i] = std::max(alpha[i], 0.0);
    alpha /= alpha.sum();
    sol.coefficients = alpha;
    sol.velocity = Vector::Zero(generators.front().size());
    for (int j = 0; j < k; ++j) sol.velocity += alpha[j] * generators[j];
    sol.objective_weight = alpha[k - 1];
    sol.tangency_residual = 0.0;
    for (const Vector& gi : active_gradients)
      sol.tangency_residual = std::max(sol.tangency_residual, std::abs(sol.velocity.dot(gi)));
    return sol;
  };

  // Tangency rows: w_j(i) = <projected generator j, grad g_i>.
  Matrix W(n_act, k);
  for (int i = 0; i < n_act; ++i)
    for (int j = 0; j < k; ++j) W(i, j) = projected[j].dot(active_gradients[i]);

  if (k == 2 && n_act == 1) {
    const double w_g = W(0, 0);
    const double w_f = W(0, 1);
    const double denom = w_f - w_g;  // = <(1-H)(grad_g - grad_f), grad_g>
    if (std::abs(denom) >= 1e-14) {
      const double r = w_f / denom;
      if (r >= 0.0 && r < 1.0) {
        Vector alpha(2);
        alpha << r, 1.0 - r;
        return finish(alpha);
      }
      return std::nullopt;  // the field pushes through: crossing
    }
    // degenerate denominator: fall through to the simplex solve
  }

  auto [residual, alpha] = simplex_least_norm(W);
  if (residual > 1e-8) return std::nullopt;
  return finish(std::move(alpha));
}

std::pair<bool, double> is_equilibrium(const FieldSample& s, double tol_eq) {
  double residual;
  if (s.regime == Regime::Surface) {
    residual = hull_distance(s.generators).distance;
  } else {
    residual = s.value.norm();
  }
  return {residual <= tol_eq, residual};
}

KktCertificate recover_multipliers(const Problem& p, const Vector& x,
                                   const std::vector<int>& generator_constraints,
                                   const Vector& coefficients) {
  const int m = p.num_inequalities();
  const int n = p.num_equalities();
  if (static_cast<int>(generator_constraints.size()) != coefficients.size())
    throw std::invalid_argument("coefficient/constraint-index length mismatch");

  double alpha_f = 0.0;
  for (std::size_t j = 0; j < generator_constraints.size(); ++j)
    if (generator_constraints[j] == -1) alpha_f += coefficients[static_cast<Eigen::Index>(j)];
  if (alpha_f <= 1e-10)
    throw DegenerateEquilibriumError(
        "degenerate equilibrium: objective weight vanishes, qualification failure");

  Vector mu = Vector::Zero(m);
  for (std::size_t j = 0; j < generator_constraints.size(); ++j) {
    const int ci = generator_constraints[j];
    if (ci >= 0) mu[ci] += coefficients[static_cast<Eigen::Index>(j)] / alpha_f;
  }

  Vector lambda(n);
  if (n > 0) {
    Projection proj = projection(p, x);
    Vector stat = p.objective().eval_grad(x).second;
    for (int i = 0; i < m; ++i)
      if (mu[i] != 0.0) stat += mu[i] * p.inequalities()[i].eval_grad(x).second;
    lambda = -(proj.gram_inverse * (proj.jac_h * stat));
  }
  return kkt_residuals(p, x, mu, lambda);
}

KktCertificate recover_multipliers(const Problem& p, const Vector& x) {
  return recover_multipliers(p, x, std::vector<int>{-1}, Vector::Ones(1));
}

}  // namespace kktflow
