#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kktflow/field.hpp"
#include "kktflow/filippov.hpp"
#include "kktflow/kkt.hpp"
#include "kktflow/model.hpp"

namespace kktflow {

struct IntegratorConfig {
  double step_init = 1e-2;
  double step_min = 1e-12;
  double step_max = 1.0;

  double band = 1e-7;     // surface half-width, scaled by (1 + |x|)
  double tol_act = 1e-8;  // activity tolerance, scaled by (1 + |G|)
  double tol_eq = 1e-8;   // equilibrium residual, scaled by (1 + |grad f|)

  double t_max = 1e4;
  double escape_radius = 1e6;
  double event_refine_tol = 1e-9;

  double rel_tol = 1e-8;  // embedded RK 4(5) error control
  double abs_tol = 1e-10;

  long max_steps = 2000000;   // safety budget; exhaustion reports MaxTime
  int record_limit = 65536;   // stored states are thinned beyond this

  void validate() const;
};

enum class TrajectoryStatus { Converged, Diverged, MaxTime, CycleSuspected, Failed };

const char* status_name(TrajectoryStatus s);

struct StateRecord {
  double t = 0.0;
  Vector x;
  Regime regime = Regime::NoInequalities;
  double f = 0.0;
  double g_max = 0.0;
  double normh2 = 0.0;
  double speed = 0.0;  // |selected velocity| at this state
};

struct Trajectory {
  std::vector<StateRecord> states;
  TrajectoryStatus status = TrajectoryStatus::Failed;
  std::string note;  // failure reason or termination detail

  Vector final_x;
  double final_time = 0.0;
  double equilibrium_residual = 0.0;

  std::optional<KktCertificate> certificate;      // present when Converged
  std::optional<QualificationReport> qualification;  // at the final point

  long steps_accepted = 0;
  long steps_rejected = 0;
};

using FieldFn = std::function<FieldSample(const Vector&)>;

/**
 * Integrate x' = psi(x) from x0: adaptive embedded RK 4(5) on the smooth
 * branches, bisection localization when a constraint changes sign across a
 * step, and tangent sliding steps (with projection back onto the active
 * surface) inside the surface band. Terminates Converged after the
 * equilibrium test holds on 3 consecutive accepted steps, Diverged beyond
 * the escape radius, MaxTime at t_max (or on step-budget exhaustion), and
 * CycleSuspected when the state revisits an earlier point. Any feasibility
 * of x0 is acceptable.
 */
Trajectory integrate(const Problem& p, const Vector& x0, const IntegratorConfig& cfg);

/// Same, with a replacement field evaluator (e.g. the LP fast path).
Trajectory integrate(const Problem& p, const Vector& x0, const IntegratorConfig& cfg,
                     const FieldFn& field);

struct Equilibrium {
  Vector x;
  KktCertificate certificate;
  std::vector<int> trajectory_indices;  // starts that reached this point
};

struct MultistartResult {
  std::vector<Trajectory> trajectories;
  std::vector<Equilibrium> equilibria;  // deduplicated at distance 1e-5
};

/// Trajectories are independent; with threads > 1 they run concurrently and
/// are merged in start order, so results do not depend on scheduling.
MultistartResult multistart(const Problem& p, const std::vector<Vector>& starts,
                            const IntegratorConfig& cfg, int threads = 1);

/// CSV columns: t, x1..xN, f, G, normh2, regime; floats with 17 significant
/// digits.
void write_trajectory_csv(const Trajectory& traj, int n_vars, std::ostream& out);

}  // namespace kktflow
