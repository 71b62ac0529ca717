#include "kktflow/lp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace kktflow {

void LinearProgram::validate() const {
  const int N = n_vars();
  if (A.rows() != a.size() || B.rows() != b.size())
    throw std::invalid_argument("LP right-hand side length mismatch");
  if ((A.rows() > 0 && A.cols() != N) || (B.rows() > 0 && B.cols() != N))
    throw std::invalid_argument("LP matrix column count mismatch");
  if (num_equalities() > 0 && num_equalities() >= N)
    throw std::invalid_argument("LP needs fewer equality rows than variables");
}

namespace {

std::string format_coeff(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), std::abs(v));
  return std::string(buf, res.ptr);
}

/// Affine expression text "c1*x1 + c2*x2 - ... + c0" with every term kept,
/// so the transcription is a fixed function of the data.
std::string affine_text(const Vector& coeffs, double constant) {
  std::string out;
  for (int i = 0; i < coeffs.size(); ++i) {
    const double ci = coeffs[i];
    if (i == 0) {
      out += (ci < 0.0 ? "-" : "");
    } else {
      out += ci < 0.0 ? " - " : " + ";
    }
    out += format_coeff(ci) + "*x" + std::to_string(i + 1);
  }
  out += constant < 0.0 ? " - " : " + ";
  out += format_coeff(constant);
  return out;
}

}  // namespace

LpTranscription lp_to_problem(const LinearProgram& lp) {
  lp.validate();
  const int N = lp.n_vars();

  std::vector<Expression> ineqs, eqs;
  for (int i = 0; i < lp.num_inequalities(); ++i)
    ineqs.push_back(Expression::parse(affine_text(lp.B.row(i), -lp.b[i]), N));
  for (int j = 0; j < lp.num_equalities(); ++j)
    eqs.push_back(Expression::parse(affine_text(lp.A.row(j), -lp.a[j]), N));
  Expression objective = Expression::parse(affine_text(lp.c, 0.0), N);

  LpTranscription out{Problem(std::move(objective), std::move(ineqs), std::move(eqs)), {}};

  const int n = lp.num_equalities();
  if (n > 0) {
    Matrix gram = lp.A * lp.A.transpose();
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
      throw SingularGramError("A A^T is numerically singular", 0.0);
    out.fast.gram_inverse = llt.solve(Matrix::Identity(n, n));
    out.fast.H_const = lp.A.transpose() * out.fast.gram_inverse * lp.A;
    out.fast.H_const = 0.5 * (out.fast.H_const + out.fast.H_const.transpose().eval());
  } else {
    out.fast.gram_inverse = Matrix(0, 0);
    out.fast.H_const = Matrix::Zero(N, N);
  }
  out.fast.projected_cost = lp.c - out.fast.H_const * lp.c;
  out.fast.row_projections = Matrix(lp.num_inequalities(), N);
  for (int i = 0; i < lp.num_inequalities(); ++i) {
    Vector row = lp.B.row(i).transpose();
    out.fast.row_projections.row(i) = (row - out.fast.H_const * row).transpose();
  }
  return out;
}

FieldSample sample_fast(const LinearProgram& lp, const LpField& f, const Vector& x,
                        double band, double tol_act) {
  const int N = lp.n_vars();
  const int m = lp.num_inequalities();
  const int n = lp.num_equalities();

  FieldSample s;
  s.proj.matrix = f.H_const;
  s.proj.jac_h = lp.A;
  s.proj.gram_inverse = f.gram_inverse;

  s.h_values = n > 0 ? Vector(lp.A * x - lp.a) : Vector(0);
  s.equality_drift =
      n > 0 ? Vector(-(lp.A.transpose() * s.h_values)) : Vector(Vector::Zero(N));
  s.grad_f = lp.c;
  s.monitors.f = lp.c.dot(x);
  s.monitors.normh2 = s.h_values.squaredNorm();

  const Vector f_generator = s.equality_drift - f.projected_cost;

  if (m == 0) {
    s.regime = Regime::NoInequalities;
    s.value = f_generator;
    return s;
  }

  s.g_values = lp.B * x - lp.b;
  const double G = s.g_values.maxCoeff();
  s.monitors.g_max = G;

  const double eff_tol_act = tol_act * (1.0 + std::abs(G));
  s.active.level = G;
  s.active.summed_gradient = Vector::Zero(N);
  Vector summed_projection = Vector::Zero(N);
  for (int i = 0; i < m; ++i) {
    if (s.g_values[i] >= G - eff_tol_act) {
      s.active.indices.push_back(i);
      s.active.summed_gradient += lp.B.row(i).transpose();
      summed_projection += f.row_projections.row(i).transpose();
      s.active_gradients.push_back(lp.B.row(i).transpose());
    }
  }

  const double eff_band = band * (1.0 + x.norm());
  s.regime = G > eff_band ? Regime::Infeasible
                          : (G < -eff_band ? Regime::Interior : Regime::Surface);

  s.value = G > 0.0 ? Vector(s.equality_drift - summed_projection) : f_generator;

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
      push_unique(
          s.equality_drift - f.row_projections.row(s.active.indices[k]).transpose(),
          s.active.indices[k]);
    if (s.regime == Regime::Surface) {
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

QualificationReport check_corollary_hypotheses(const LinearProgram& lp, const Vector& x) {
  LpTranscription t = lp_to_problem(lp);
  return check_qualifications(t.problem, x, 1e-10);
}

namespace {

/// All size-k index subsets of {0..m-1}, visited in lexicographic order.
void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > m) return;
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

VertexOracleResult vertex_oracle(const LinearProgram& lp) {
  lp.validate();
  const int N = lp.n_vars();
  const int n = lp.num_equalities();
  const int m = lp.num_inequalities();
  const int need = N - n;  // inequality rows to activate for a basic point
  const double feas_tol = 1e-9;

  VertexOracleResult out;
  struct Vertex {
    Vector x;
    std::vector<int> active;
  };
  std::vector<Vertex> feasible;
  bool any_basic_feasible = false;

  if (need >= 0 && need <= m) {
    for_each_subset(m, need, [&](const std::vector<int>& subset) {
      Matrix M(N, N);
      Vector rhs(N);
      for (int j = 0; j < n; ++j) {
        M.row(j) = lp.A.row(j);
        rhs[j] = lp.a[j];
      }
      for (int k = 0; k < need; ++k) {
        M.row(n + k) = lp.B.row(subset[k]);
        rhs[n + k] = lp.b[subset[k]];
      }
      Eigen::FullPivLU<Matrix> lu(M);
      if (!lu.isInvertible()) return;
      Vector x = lu.solve(rhs);
      if (m > 0 && (lp.B * x - lp.b).maxCoeff() > feas_tol) return;
      any_basic_feasible = true;
      for (const Vertex& v : feasible)
        if ((v.x - x).lpNorm<Eigen::Infinity>() <= 1e-9) return;
      feasible.push_back({std::move(x), subset});
    });
  }

  if (!any_basic_feasible) {
    // coarse probe: is there any feasible point at all?
    bool probe_feasible = false;
    const int probe_grid = 7;
    std::vector<int> digit(N, 0);
    for (;;) {
      Vector x(N);
      for (int d = 0; d < N; ++d) x[d] = -10.0 + 20.0 * digit[d] / (probe_grid - 1);
      if (n > 0) {
        // project onto the affine equality set first
        Eigen::LLT<Matrix> llt(lp.A * lp.A.transpose());
        x -= lp.A.transpose() * llt.solve(lp.A * x - lp.a);
      }
      const bool eq_ok = n == 0 || (lp.A * x - lp.a).cwiseAbs().maxCoeff() <= 1e-7;
      if (eq_ok && (m == 0 || (lp.B * x - lp.b).maxCoeff() <= feas_tol)) {
        probe_feasible = true;
        break;
      }
      int d = 0;
      while (d < N && ++digit[d] == probe_grid) digit[d++] = 0;
      if (d == N) break;
    }
    if (!probe_feasible) {
      out.status = VertexOracleResult::Status::Infeasible;
      return out;
    }
    throw std::runtime_error(
        "vertex oracle: the feasible set is nonempty but has no vertex; "
        "cannot rank optima by enumeration");
  }

  // unboundedness: an improving edge ray out of some feasible vertex.
  // Edges come from dropping one active row; the ray direction spans the
  // null space of the remaining N-1 active rows.
  for (const Vertex& v : feasible) {
    for (std::size_t drop = 0; drop < v.active.size(); ++drop) {
      Matrix M(n + need - 1, N);
      for (int j = 0; j < n; ++j) M.row(j) = lp.A.row(j);
      int r = n;
      for (std::size_t k = 0; k < v.active.size(); ++k) {
        if (k == drop) continue;
        M.row(r++) = lp.B.row(v.active[k]);
      }
      Matrix null_space;
      if (M.rows() > 0) {
        Eigen::FullPivLU<Matrix> lu(M);
        null_space = lu.kernel();
      } else {
        null_space = Matrix::Identity(N, N);
      }
      for (int col = 0; col < null_space.cols(); ++col) {
        Vector d = null_space.col(col);
        if (d.norm() < 1e-12) continue;
        d.normalize();
        // orient the ray away from the dropped constraint
        const double toward = lp.B.row(v.active[drop]).dot(d);
        if (toward > 0.0) d = -d;
        if (m > 0 && (lp.B * d).maxCoeff() > 1e-10) continue;  // leaves the region
        if (lp.c.dot(d) < -1e-10) {
          out.status = VertexOracleResult::Status::Unbounded;
          return out;
        }
      }
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (const Vertex& v : feasible) best = std::min(best, lp.c.dot(v.x));
  for (const Vertex& v : feasible) {
    if (lp.c.dot(v.x) <= best + 1e-9 * (1.0 + std::abs(best)))
      out.optimal_vertices.push_back(v.x);
  }
  out.status = VertexOracleResult::Status::Optimal;
  out.x = out.optimal_vertices.front();
  out.value = best;
  out.unique = out.optimal_vertices.size() == 1;
  return out;
}

namespace {
std::string strip_comment(const std::string& line) {
  std::string s = line;
  auto hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

LinearProgram parse_lp_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool saw_marker = false;
  int N = -1;
  std::vector<double> c;
  std::vector<std::vector<double>> A_rows, B_rows;
  std::vector<double> a_rhs, b_rhs;

  auto read_numbers = [&](std::istringstream& ls, int count) {
    std::vector<double> vals;
    double v;
    while (static_cast<int>(vals.size()) < count && ls >> v) vals.push_back(v);
    if (static_cast<int>(vals.size()) != count)
      throw ParseError("expected " + std::to_string(count) + " numbers", lineno);
    return vals;
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip_comment(line);
    if (s.empty()) continue;
    std::istringstream ls(s);
    std::string keyword;
    ls >> keyword;
    if (!saw_marker) {
      if (keyword != "lp") throw ParseError("LP file must start with an 'lp' line", lineno);
      saw_marker = true;
      continue;
    }
    if (keyword == "n") {
      if (!(ls >> N) || N < 1) throw ParseError("n expects a positive integer", lineno);
    } else if (keyword == "min") {
      if (N < 1) throw ParseError("n line must come before min", lineno);
      c = read_numbers(ls, N);
    } else if (keyword == "eq" || keyword == "ineq") {
      if (N < 1) throw ParseError("n line must come before constraint rows", lineno);
      auto coeffs = read_numbers(ls, N);
      std::string sep;
      ls >> sep;
      const std::string want = keyword == "eq" ? "=" : "<=";
      if (sep != want) throw ParseError("expected '" + want + "' separator", lineno);
      double rhs;
      if (!(ls >> rhs)) throw ParseError("missing right-hand side", lineno);
      if (keyword == "eq") {
        A_rows.push_back(std::move(coeffs));
        a_rhs.push_back(rhs);
      } else {
        B_rows.push_back(std::move(coeffs));
        b_rhs.push_back(rhs);
      }
    } else {
      throw ParseError("unknown keyword '" + keyword + "'", lineno);
    }
  }
  if (!saw_marker) throw ParseError("missing 'lp' marker", 0);
  if (N < 1) throw ParseError("missing n line", 0);
  if (c.empty()) throw ParseError("missing min line", 0);

  LinearProgram lp;
  lp.c = Eigen::Map<Vector>(c.data(), N);
  lp.A = Matrix(A_rows.size(), N);
  lp.a = Vector(a_rhs.size());
  for (std::size_t r = 0; r < A_rows.size(); ++r) {
    lp.A.row(r) = Eigen::Map<Vector>(A_rows[r].data(), N).transpose();
    lp.a[r] = a_rhs[r];
  }
  lp.B = Matrix(B_rows.size(), N);
  lp.b = Vector(b_rhs.size());
  for (std::size_t r = 0; r < B_rows.size(); ++r) {
    lp.B.row(r) = Eigen::Map<Vector>(B_rows[r].data(), N).transpose();
    lp.b[r] = b_rhs[r];
  }
  lp.validate();
  return lp;
}

LinearProgram load_lp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open LP file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lp_text(buf.str());
}

bool looks_like_lp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  while (std::getline(in, line)) {
    std::string s = strip_comment(line);
    if (s.empty()) continue;
    std::istringstream ls(s);
    std::string first;
    ls >> first;
    return first == "lp";
  }
  return false;
}

}  // namespace kktflow
