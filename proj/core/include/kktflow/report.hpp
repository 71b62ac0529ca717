#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kktflow/dynamics.hpp"
#include "kktflow/kkt.hpp"
#include "kktflow/model.hpp"

namespace kktflow {

// Reports use ordered JSON so a fixed input produces byte-identical output;
// the "timestamp" field is the one part excluded from that guarantee.
using Json = nlohmann::ordered_json;

Json certificate_to_json(const KktCertificate& cert);
Json qualification_to_json(const QualificationReport& rep);
Json trajectory_to_json(const Trajectory& traj);

/// Report for a single `solve` run.
Json solve_report(const std::string& problem_path, const Trajectory& traj);

/// Report for a `multistart` run: per-trajectory summaries plus the
/// deduplicated equilibria list.
Json multistart_report(const std::string& problem_path, const MultistartResult& result);

/// Report listing the oracle's KKT points, diffable against solver output.
Json oracle_report(const std::string& problem_path,
                   const std::vector<KktCertificate>& points);

/// Write text to path atomically (temp file in the same directory + rename).
void write_atomic(const std::string& path, const std::string& content);

/// Serialize with the volatile timestamp attached.
std::string render_report(Json report);

struct CompareResult {
  std::vector<std::pair<int, int>> matched;  // (solver index, oracle index)
  std::vector<int> unmatched_solver;
  std::vector<int> unmatched_oracle;
  bool solver_subset_of_oracle() const { return unmatched_solver.empty(); }
};

/// Match solver equilibria against oracle KKT points at the given distance.
/// Exit-code contract: success means every solver point has an oracle match
/// (the flow only finds the stable subset, so the oracle may have extras).
CompareResult compare_reports(const Json& solver, const Json& oracle, double tol = 1e-4);

std::string render_compare(const CompareResult& result, const Json& solver,
                           const Json& oracle);

}  // namespace kktflow
