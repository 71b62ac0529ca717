#include "kktflow/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kktflow {

namespace {

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const Json& arr) {
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
  return v;
}

}  // namespace

Json certificate_to_json(const KktCertificate& cert) {
  Json j;
  j["x"] = vector_to_json(cert.x);
  j["mu"] = vector_to_json(cert.mu);
  j["lambda"] = vector_to_json(cert.lambda);
  j["stationarity_residual"] = cert.stationarity_residual;
  j["complementarity_residual"] = cert.complementarity_residual;
  j["ineq_violation"] = cert.ineq_violation;
  j["eq_violation"] = cert.eq_violation;
  j["sign_violation"] = cert.sign_violation;
  return j;
}

Json qualification_to_json(const QualificationReport& rep) {
  Json j;
  j["gram_invertible"] = rep.gram_invertible;
  j["gram_min_eigenvalue"] = rep.gram_min_eigenvalue;
  j["spans_independent"] = rep.spans_independent;
  j["rank_stacked"] = rep.rank_stacked;
  j["rank_equalities"] = rep.rank_equalities;
  j["rank_active_inequalities"] = rep.rank_active_inequalities;
  j["hull_excludes_zero"] = rep.hull_excludes_zero;
  j["hull_distance"] = rep.hull_distance;
  j["surface_checked"] = rep.surface_checked;
  j["all_ok"] = rep.all_ok();
  return j;
}

Json trajectory_to_json(const Trajectory& traj) {
  Json j;
  j["status"] = status_name(traj.status);
  if (!traj.note.empty()) j["note"] = traj.note;
  j["final_time"] = traj.final_time;
  j["final_x"] = vector_to_json(traj.final_x);
  j["equilibrium_residual"] = traj.equilibrium_residual;
  j["steps_accepted"] = traj.steps_accepted;
  j["steps_rejected"] = traj.steps_rejected;
  if (traj.certificate) j["certificate"] = certificate_to_json(*traj.certificate);
  if (traj.qualification) j["qualification"] = qualification_to_json(*traj.qualification);
  return j;
}

Json solve_report(const std::string& problem_path, const Trajectory& traj) {
  Json j;
  j["kind"] = "solve";
  j["problem"] = problem_path;
  j["trajectory"] = trajectory_to_json(traj);
  Json eq = Json::array();
  if (traj.status == TrajectoryStatus::Converged && traj.certificate) {
    Json e;
    e["x"] = vector_to_json(traj.final_x);
    e["certificate"] = certificate_to_json(*traj.certificate);
    eq.push_back(e);
  }
  j["equilibria"] = eq;
  return j;
}

Json multistart_report(const std::string& problem_path, const MultistartResult& result) {
  Json j;
  j["kind"] = "multistart";
  j["problem"] = problem_path;
  Json trajs = Json::array();
  for (const Trajectory& tr : result.trajectories) trajs.push_back(trajectory_to_json(tr));
  j["trajectories"] = trajs;
  Json eqs = Json::array();
  for (const Equilibrium& eq : result.equilibria) {
    Json e;
    e["x"] = vector_to_json(eq.x);
    e["certificate"] = certificate_to_json(eq.certificate);
    e["trajectories"] = eq.trajectory_indices;
    eqs.push_back(e);
  }
  j["equilibria"] = eqs;
  return j;
}

Json oracle_report(const std::string& problem_path,
                   const std::vector<KktCertificate>& points) {
  Json j;
  j["kind"] = "oracle";
  j["problem"] = problem_path;
  Json eqs = Json::array();
  for (const KktCertificate& cert : points) {
    Json e;
    e["x"] = vector_to_json(cert.x);
    e["certificate"] = certificate_to_json(cert);
    eqs.push_back(e);
  }
  j["equilibria"] = eqs;
  return j;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("rename failed: " + path);
  }
}

std::string render_report(Json report) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  report["timestamp"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  return report.dump(2) + "\n";
}

CompareResult compare_reports(const Json& solver, const Json& oracle, double tol) {
  if (!solver.contains("equilibria") || !oracle.contains("equilibria"))
    throw std::runtime_error("report is missing an 'equilibria' list");
  const Json& se = solver["equilibria"];
  const Json& oe = oracle["equilibria"];

  CompareResult out;
  std::vector<bool> oracle_hit(oe.size(), false);
  for (std::size_t i = 0; i < se.size(); ++i) {
    Vector xs = vector_from_json(se[i]["x"]);
    int best = -1;
    double best_dist = tol;
    for (std::size_t k = 0; k < oe.size(); ++k) {
      Vector xo = vector_from_json(oe[k]["x"]);
      if (xo.size() != xs.size()) throw std::runtime_error("dimension mismatch between reports");
      const double dist = (xs - xo).lpNorm<Eigen::Infinity>();
      if (dist <= best_dist) {
        best_dist = dist;
        best = static_cast<int>(k);
      }
    }
    if (best >= 0) {
      out.matched.emplace_back(static_cast<int>(i), best);
      oracle_hit[best] = true;
    } else {
      out.unmatched_solver.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t k = 0; k < oe.size(); ++k)
    if (!oracle_hit[k]) out.unmatched_oracle.push_back(static_cast<int>(k));
  return out;
}

std::string render_compare(const CompareResult& result, const Json& solver,
                           const Json& oracle) {
  std::string out;
  auto point_str = [](const Json& e) { return e["x"].dump(); };
  out += "matched: " + std::to_string(result.matched.size()) + "\n";
  for (auto [si, oi] : result.matched)
    out += "  solver " + point_str(solver["equilibria"][si]) + "  ~  oracle " +
           point_str(oracle["equilibria"][oi]) + "\n";
  for (int si : result.unmatched_solver)
    out += "solver-only (no oracle match): " + point_str(solver["equilibria"][si]) + "\n";
  for (int oi : result.unmatched_oracle)
    out += "oracle-only (not reached by the flow): " + point_str(oracle["equilibria"][oi]) + "\n";
  out += result.solver_subset_of_oracle() ? "solver set is contained in the oracle set\n"
                                          : "solver reported points the oracle does not know\n";
  return out;
}

}  // namespace kktflow
