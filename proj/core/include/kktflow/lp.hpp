#pragma once

#include <string>
#include <vector>

#include "kktflow/field.hpp"
#include "kktflow/model.hpp"
#include "kktflow/types.hpp"

namespace kktflow {

/// min c.x  subject to  A x = a,  B x <= b.
struct LinearProgram {
  Vector c;
  Matrix A;  // n x N
  Vector a;
  Matrix B;  // m x N
  Vector b;

  int n_vars() const { return static_cast<int>(c.size()); }
  int num_equalities() const { return static_cast<int>(A.rows()); }
  int num_inequalities() const { return static_cast<int>(B.rows()); }

  void validate() const;
};

/// Everything about the LP field that is constant in x, precomputed once.
struct LpField {
  Matrix H_const;          // A^T (A A^T)^{-1} A
  Matrix gram_inverse;     // (A A^T)^{-1}
  Vector projected_cost;   // (1 - H) c
  Matrix row_projections;  // row i = ((1 - H) B_i^T)^T
};

struct LpTranscription {
  Problem problem;   // affine expressions; the generic machinery runs on this
  LpField fast;      // precomputed path that skips expression evaluation
};

/// Transcribe the LP into the general problem form. The resulting Problem
/// reproduces the LP field exactly through the generic expression path; the
/// attached LpField gives the same samples without touching expressions.
LpTranscription lp_to_problem(const LinearProgram& lp);

/// Field sample through the precomputed matrices; agrees with the generic
/// path on the transcribed problem to within roundoff.
FieldSample sample_fast(const LinearProgram& lp, const LpField& f, const Vector& x,
                        double band, double tol_act);

/// The three hypotheses of the LP convergence statement, evaluated at x
/// (Gram invertibility is global since the Jacobian is constant).
QualificationReport check_corollary_hypotheses(const LinearProgram& lp, const Vector& x);

struct VertexOracleResult {
  enum class Status { Optimal, Unbounded, Infeasible };
  Status status = Status::Infeasible;
  Vector x;              // a minimizing vertex when Optimal
  double value = 0.0;
  bool unique = true;    // false when several vertices attain the optimum
  std::vector<Vector> optimal_vertices;
};

/**
 * Brute-force ground truth for desk-scale LPs: enumerate all basic points
 * (N - n active inequality rows stacked on A), keep the feasible ones, and
 * take the best objective. Unboundedness is detected through cost-improving
 * edge rays out of feasible vertices; infeasibility when there is no basic
 * feasible point and a grid probe finds no feasible x either. Throws on the
 * degenerate vertex-free-but-feasible case, which this oracle cannot rank.
 */
VertexOracleResult vertex_oracle(const LinearProgram& lp);

/// Parse the dense LP text format:
///   lp
///   n N
///   min c1 ... cN
///   eq a11 ... a1N = a1        (repeatable)
///   ineq b11 ... b1N <= b1     (repeatable)
/// '#' comments and blank lines are skipped.
LinearProgram parse_lp_text(const std::string& text);
LinearProgram load_lp(const std::string& path);

/// True if the file's first significant line is the `lp` marker.
bool looks_like_lp_file(const std::string& path);

}  // namespace kktflow
