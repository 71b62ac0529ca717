#include "kktflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "kktflow/filippov.hpp"

namespace kktflow {

Problem::Problem(Expression objective, std::vector<Expression> inequalities,
                 std::vector<Expression> equalities)
    : objective_(std::move(objective)),
      inequalities_(std::move(inequalities)),
      equalities_(std::move(equalities)) {
  const int N = objective_.n_vars();
  for (const auto& g : inequalities_)
    if (g.n_vars() != N) throw std::invalid_argument("inequality dimension mismatch");
  for (const auto& h : equalities_)
    if (h.n_vars() != N) throw std::invalid_argument("equality dimension mismatch");
  if (!equalities_.empty() && static_cast<int>(equalities_.size()) >= N)
    throw std::invalid_argument("need fewer equality constraints than variables (n < N)");
}

Vector Problem::equality_values(const Vector& x) const {
  Vector h(num_equalities());
  for (int j = 0; j < num_equalities(); ++j) h[j] = equalities_[j].value(x);
  return h;
}

Matrix Problem::equality_jacobian(const Vector& x) const {
  Matrix J(num_equalities(), n_vars());
  for (int j = 0; j < num_equalities(); ++j) J.row(j) = equalities_[j].eval_grad(x).second;
  return J;
}

Vector Problem::inequality_values(const Vector& x) const {
  Vector g(num_inequalities());
  for (int i = 0; i < num_inequalities(); ++i) g[i] = inequalities_[i].value(x);
  return g;
}

ActiveSet active_set(const Problem& p, const Vector& x, double tol_act) {
  const int m = p.num_inequalities();
  if (m < 1) throw std::invalid_argument("active_set requires at least one inequality");
  Vector values = p.inequality_values(x);
  ActiveSet out;
  out.level = values.maxCoeff();
  out.summed_gradient = Vector::Zero(p.n_vars());
  for (int i = 0; i < m; ++i) {
    if (values[i] >= out.level - tol_act) {
      out.indices.push_back(i);
      out.summed_gradient += p.inequalities()[i].eval_grad(x).second;
    }
  }
  return out;
}

QualificationReport check_qualifications(const Problem& p, const Vector& x, double tol,
                                         double surface_band) {
  QualificationReport rep;
  const int n = p.num_equalities();
  const int m = p.num_inequalities();

  if (n > 0) {
    Matrix Jh = p.equality_jacobian(x);
    Matrix gram = Jh * Jh.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    rep.gram_min_eigenvalue = es.eigenvalues().minCoeff();
    rep.gram_invertible = rep.gram_min_eigenvalue > tol;
  } else {
    rep.gram_min_eigenvalue = std::numeric_limits<double>::infinity();
    rep.gram_invertible = true;
  }

  if (m > 0) {
    const double G = p.inequality_values(x).maxCoeff();
    if (std::abs(G) <= surface_band * (1.0 + x.norm())) {
      rep.surface_checked = true;
      ActiveSet act = active_set(p, x, 1e-8 * (1.0 + std::abs(G)));
      const int k = static_cast<int>(act.indices.size());

      Matrix Jg(k, p.n_vars());
      std::vector<Vector> grads;
      grads.reserve(k);
      for (int r = 0; r < k; ++r) {
        Vector gr = p.inequalities()[act.indices[r]].eval_grad(x).second;
        Jg.row(r) = gr;
        grads.push_back(std::move(gr));
      }

      if (n > 0) {
        Matrix Jh = p.equality_jacobian(x);
        Matrix stacked(n + k, p.n_vars());
        stacked.topRows(n) = Jh;
        stacked.bottomRows(k) = Jg;
        auto rank_of = [](const Matrix& M) {
          Eigen::ColPivHouseholderQR<Matrix> qr(M);
          qr.setThreshold(1e-10);
          return static_cast<int>(qr.rank());
        };
        rep.rank_equalities = rank_of(Jh);
        rep.rank_active_inequalities = rank_of(Jg);
        rep.rank_stacked = rank_of(stacked);
        rep.spans_independent =
            rep.rank_stacked == rep.rank_equalities + rep.rank_active_inequalities;
      }

      HullDistance hd = hull_distance(grads);
      rep.hull_distance = hd.distance;
      rep.hull_excludes_zero = hd.distance > tol;
    }
  }
  return rep;
}

std::pair<double, double> feasibility_residual(const Problem& p, const Vector& x) {
  double ineq = 0.0;
  if (p.num_inequalities() > 0) ineq = std::max(0.0, p.inequality_values(x).maxCoeff());
  double eq = 0.0;
  if (p.num_equalities() > 0) eq = p.equality_values(x).cwiseAbs().maxCoeff();
  return {ineq, eq};
}

namespace {

std::string strip(const std::string& line) {
  std::string s = line;
  auto hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Problem parse_problem_text(const std::string& text, bool allow_nonsmooth) {
  std::istringstream in(text);
  std::string line;
  int n_vars = -1;
  std::vector<Expression> objective;
  std::vector<Expression> ineqs, eqs;
  std::size_t lineno = 0;

  auto parse_payload = [&](const std::string& payload) {
    Expression e = Expression::parse(payload, n_vars);
    if (e.contains_abs() && !allow_nonsmooth)
      throw ParseError("expression uses abs(), which breaks the smoothness assumptions "
                       "(pass --allow-nonsmooth to override)",
                       lineno);
    return e;
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty()) continue;
    std::istringstream ls(s);
    std::string keyword;
    ls >> keyword;
    std::string payload;
    std::getline(ls, payload);

    if (keyword == "vars") {
      if (n_vars != -1) throw ParseError("duplicate vars line", lineno);
      std::istringstream ps(payload);
      if (!(ps >> n_vars) || n_vars < 1)
        throw ParseError("vars expects a positive integer", lineno);
    } else if (keyword == "min" || keyword == "ineq" || keyword == "eq") {
      if (n_vars == -1) throw ParseError("vars line must come first", lineno);
      Expression e = parse_payload(payload);
      if (keyword == "min") {
        if (!objective.empty()) throw ParseError("duplicate min line", lineno);
        objective.push_back(std::move(e));
      } else if (keyword == "ineq") {
        ineqs.push_back(std::move(e));
      } else {
        eqs.push_back(std::move(e));
      }
    } else {
      throw ParseError("unknown keyword '" + keyword + "'", lineno);
    }
  }
  if (n_vars == -1) throw ParseError("missing vars line", 0);
  if (objective.empty()) throw ParseError("missing min line", 0);
  return Problem(std::move(objective.front()), std::move(ineqs), std::move(eqs));
}

Problem load_problem(const std::string& path, bool allow_nonsmooth) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), allow_nonsmooth);
}

std::string print_problem(const Problem& p) {
  std::ostringstream out;
  out << "vars " << p.n_vars() << "\n";
  out << "min " << p.objective().pretty() << "\n";
  for (const auto& g : p.inequalities()) out << "ineq " << g.pretty() << "\n";
  for (const auto& h : p.equalities()) out << "eq " << h.pretty() << "\n";
  return out.str();
}

}  // namespace kktflow
