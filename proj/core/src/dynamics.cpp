#include "kktflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>

namespace kktflow {

void IntegratorConfig::validate() const {
  if (!(0.0 < step_min && step_min <= step_init && step_init <= step_max))
    throw std::invalid_argument("require 0 < step_min <= step_init <= step_max");
  for (double tol : {band, tol_act, tol_eq, event_refine_tol, rel_tol, abs_tol})
    if (!(tol > 0.0)) throw std::invalid_argument("all tolerances must be positive");
  if (!(t_max > 0.0) || !(escape_radius > 0.0))
    throw std::invalid_argument("t_max and escape_radius must be positive");
}

const char* status_name(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Converged: return "converged";
    case TrajectoryStatus::Diverged: return "diverged";
    case TrajectoryStatus::MaxTime: return "max-time";
    case TrajectoryStatus::CycleSuspected: return "cycle-suspected";
    case TrajectoryStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

// Dormand-Prince 4(5) pair with its 4th-order dense-output interpolant.
struct Dopri5 {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

struct RkStep {
  Vector x_new;
  double err = 0.0;  // normalized error estimate
  // dense-output coefficients: x(theta) for theta in [0,1]
  Vector r1, r2, r3, r4, r5;

  Vector dense(double theta) const {
    const double t1 = 1.0 - theta;
    return r1 + theta * (r2 + t1 * (r3 + theta * (r4 + t1 * r5)));
  }
};

class Integrator {
public:
  Integrator(const Problem& p, const IntegratorConfig& cfg, FieldFn field)
      : p_(p), cfg_(cfg), field_(std::move(field)) {}

  Trajectory run(const Vector& x0) {
    cfg_.validate();
    x_ = x0;
    h_ = cfg_.step_init;
    slide_h_ = cfg_.step_init;

    if (!x_.allFinite()) return fail("initial point is not finite");

    for (;;) {
      FieldSample s;
      try {
        s = field_(x_);
      } catch (const EvalDomainError& e) {
        return fail(std::string("evaluation domain error: ") + e.what() + " in " + e.where());
      } catch (const SingularGramError& e) {
        return fail(std::string(e.what()) + " (smallest pivot " +
                    std::to_string(e.smallest_pivot()) + ")");
      }

      if (!s.value.allFinite()) return fail("field value is not finite");

      const double tol_eq_eff = cfg_.tol_eq * (1.0 + s.grad_f.norm());
      auto [eq_flag, eq_residual] = is_equilibrium(s, tol_eq_eff);
      traj_.equilibrium_residual = eq_residual;
      if (traj_.steps_accepted > 0) {
        consecutive_eq_ = eq_flag ? consecutive_eq_ + 1 : 0;
        if (consecutive_eq_ >= 3) return finish_converged(s);
      }

      if (x_.norm() > cfg_.escape_radius) return finish(TrajectoryStatus::Diverged, "");
      if (t_ >= cfg_.t_max) return finish(TrajectoryStatus::MaxTime, "");
      if (traj_.steps_accepted >= cfg_.max_steps)
        return finish(TrajectoryStatus::MaxTime, "step budget exhausted");
      if (cycle_suspected(s, tol_eq_eff))
        return finish(TrajectoryStatus::CycleSuspected, "");

      try {
        if (s.regime == Regime::Surface) {
          surface_step(s);
        } else {
          smooth_step(s);
        }
      } catch (const EvalDomainError& e) {
        return fail(std::string("evaluation domain error: ") + e.what() + " in " + e.where());
      } catch (const SingularGramError& e) {
        return fail(std::string(e.what()) + " at a sliding point (smallest pivot " +
                    std::to_string(e.smallest_pivot()) + ")");
      } catch (const StepFailure& e) {
        return fail(e.message);
      }
    }
  }

private:
  struct StepFailure {
    std::string message;
  };

  double eff_band(const Vector& x) const { return cfg_.band * (1.0 + x.norm()); }

  // ---- recording ----------------------------------------------------------

  /// Records the state a step departs from, with the speed of the selected
  /// motion; the terminal state is appended separately at termination.
  void record(const FieldSample& s, double speed) {
    if (traj_.steps_accepted % record_stride_ != 0) return;
    if (static_cast<int>(traj_.states.size()) >= cfg_.record_limit) {
      // halve the retained history, keep every other entry
      std::vector<StateRecord> kept;
      kept.reserve(traj_.states.size() / 2 + 1);
      for (std::size_t i = 0; i < traj_.states.size(); i += 2) kept.push_back(traj_.states[i]);
      traj_.states = std::move(kept);
      record_stride_ *= 2;
      if (traj_.steps_accepted % record_stride_ != 0) return;
    }
    traj_.states.push_back(
        {t_, x_, s.regime, s.monitors.f, s.monitors.g_max, s.monitors.normh2, speed});
  }

  void accept(double dt, const FieldSample& s_before, double speed) {
    record(s_before, speed);
    t_ += dt;
    arc_length_ += speed * dt;
    ++traj_.steps_accepted;
  }

  // ---- termination helpers -------------------------------------------------

  Trajectory fail(std::string reason) {
    finalize_common();
    traj_.status = TrajectoryStatus::Failed;
    traj_.note = std::move(reason);
    return std::move(traj_);
  }

  Trajectory finish(TrajectoryStatus status, std::string note) {
    finalize_common();
    traj_.status = status;
    traj_.note = std::move(note);
    return std::move(traj_);
  }

  Trajectory finish_converged(const FieldSample& s) {
    finalize_common();
    try {
      if (s.regime == Regime::Surface) {
        HullDistance hd = hull_distance(s.generators);
        traj_.certificate = recover_multipliers(p_, x_, s.generator_constraints, hd.witness);
      } else if (s.regime == Regime::Infeasible) {
        // equilibrium of the infeasible branch: no objective generator is
        // involved; report unit weights on the tied constraints
        Vector mu = Vector::Zero(p_.num_inequalities());
        for (int i : s.active.indices) mu[i] = 1.0;
        Vector lambda(p_.num_equalities());
        if (p_.num_equalities() > 0) {
          Vector stat = s.grad_f + s.active.summed_gradient;
          lambda = -(s.proj.gram_inverse * (s.proj.jac_h * stat));
        }
        traj_.certificate = kkt_residuals(p_, x_, mu, lambda);
        traj_.note = "equilibrium with G > 0 (unstable class)";
      } else {
        traj_.certificate = recover_multipliers(p_, x_);
      }
    } catch (const DegenerateEquilibriumError& e) {
      traj_.status = TrajectoryStatus::Failed;
      traj_.note = e.what();
      return std::move(traj_);
    }
    traj_.status = TrajectoryStatus::Converged;
    traj_.qualification = check_qualifications(p_, x_, 1e-10, cfg_.band);
    return std::move(traj_);
  }

  void finalize_common() {
    traj_.final_x = x_;
    traj_.final_time = t_;
    // make sure the terminal state is present even under thinning
    if (traj_.states.empty() || traj_.states.back().t < t_) {
      try {
        FieldSample s = field_(x_);
        traj_.states.push_back({t_, x_, s.regime, s.monitors.f, s.monitors.g_max,
                                s.monitors.normh2, s.value.norm()});
      } catch (...) {
        // leave the recorded history as-is if the final point cannot be sampled
      }
    }
  }

  bool cycle_suspected(const FieldSample& s, double tol_eq_eff) {
    if (traj_.steps_accepted == 0 || traj_.steps_accepted % 64 != 0) return false;
    const double speed = s.value.norm();
    bool hit = false;
    if (speed > tol_eq_eff) {
      for (const auto& snap : snapshots_) {
        if (t_ - snap.t <= 10.0 * cfg_.step_init) continue;
        // require real travel between the visits, not just slow drift
        if (arc_length_ - snap.arc < 1e-3) continue;
        if ((x_ - snap.x).norm() <= 1e-6) {
          hit = true;
          break;
        }
      }
    }
    if (!hit) {
      snapshots_.push_back({t_, arc_length_, x_});
      if (snapshots_.size() > 4096) {
        std::vector<Snapshot> kept;
        kept.reserve(snapshots_.size() / 2 + 1);
        for (std::size_t i = 0; i < snapshots_.size(); i += 2) kept.push_back(snapshots_[i]);
        snapshots_ = std::move(kept);
      }
    }
    return hit;
  }

  // ---- smooth stepping -----------------------------------------------------

  Vector rhs(const Vector& y) const { return field_(y).value; }

  RkStep try_rk_step(const Vector& y, const Vector& k1, double h) const {
    using D = Dopri5;
    const Vector k2 = rhs(y + h * (D::a21 * k1));
    const Vector k3 = rhs(y + h * (D::a31 * k1 + D::a32 * k2));
    const Vector k4 = rhs(y + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
    const Vector k5 = rhs(y + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
    const Vector k6 =
        rhs(y + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5));
    RkStep out;
    out.x_new = y + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
    const Vector k7 = rhs(out.x_new);

    const Vector err_vec =
        h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
    double sum = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double scale =
          cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(out.x_new[i]));
      const double q = err_vec[i] / scale;
      sum += q * q;
    }
    out.err = std::sqrt(sum / static_cast<double>(y.size()));

    out.r1 = y;
    out.r2 = out.x_new - y;
    out.r3 = h * k1 - out.r2;
    out.r4 = out.r2 - h * k7 - out.r3;
    out.r5 = h * (D::d1 * k1 + D::d3 * k3 + D::d4 * k4 + D::d5 * k5 + D::d6 * k6 + D::d7 * k7);
    return out;
  }

  void smooth_step(const FieldSample& s) {
    const Vector k1 = s.value;
    const double speed = k1.norm();
    double h = std::clamp(h_, cfg_.step_min, cfg_.step_max);
    h = std::min(h, cfg_.t_max - t_ > 0.0 ? cfg_.t_max - t_ : h);

    for (int attempt = 0; attempt < 64; ++attempt) {
      RkStep step;
      bool eval_ok = true;
      try {
        step = try_rk_step(x_, k1, h);
      } catch (const EvalDomainError&) {
        eval_ok = false;
      } catch (const SingularGramError&) {
        eval_ok = false;
      }
      if (!eval_ok || !step.x_new.allFinite()) {
        ++traj_.steps_rejected;
        h *= 0.5;
        if (h < cfg_.step_min)
          throw StepFailure{"field evaluation keeps failing while shrinking the step"};
        continue;
      }
      if (step.err > 1.0 && h > cfg_.step_min) {
        ++traj_.steps_rejected;
        h = std::max(h * std::clamp(0.9 * std::pow(step.err, -0.2), 0.2, 1.0), cfg_.step_min);
        continue;
      }

      // locate the earliest constraint sign change inside the step; the
      // interpolant midpoint is also checked so a thin band crossed and
      // re-crossed within one step is not tunneled through
      double dt = h;
      Vector x_next = step.x_new;
      if (p_.num_inequalities() > 0 && s.g_values.size() > 0) {
        const double band0 = eff_band(x_);
        Vector g_new = p_.inequality_values(x_next);
        Vector g_mid = p_.inequality_values(step.dense(0.5));
        double theta_min = 2.0;
        int which = -1;
        for (int i = 0; i < p_.num_inequalities(); ++i) {
          if (std::abs(s.g_values[i]) <= band0) continue;  // already inside this band
          const bool crossed_mid = s.g_values[i] * g_mid[i] < 0.0;
          const bool crossed_end = s.g_values[i] * g_new[i] < 0.0;
          if (crossed_mid || crossed_end) {
            const double theta =
                locate_event(step, i, s.g_values[i], crossed_mid ? 0.5 : 1.0);
            if (theta < theta_min) {
              theta_min = theta;
              which = i;
            }
          }
        }
        if (which >= 0) {
          x_next = step.dense(theta_min);
          dt = theta_min * h;
        }
      }

      const double grow = step.err > 0.0 ? std::clamp(0.9 * std::pow(step.err, -0.2), 0.2, 5.0) : 5.0;
      h_ = std::clamp(h * grow, cfg_.step_min, cfg_.step_max);
      accept(dt, s, speed);
      x_ = x_next;
      return;
    }
    throw StepFailure{"step size control failed to accept a step"};
  }

  /// Bisection on the dense output for the crossing of constraint `which`.
  /// Returns theta in (0, hi0]; the landing satisfies |g| <= event_refine_tol
  /// unless the bracket collapses first.
  double locate_event(const RkStep& step, int which, double g_at_start, double hi0) const {
    const Expression& g = p_.inequalities()[which];
    double lo = 0.0, hi = hi0;
    double theta = hi0;
    for (int it = 0; it < 80; ++it) {
      theta = 0.5 * (lo + hi);
      const double val = g.value(step.dense(theta));
      if (std::abs(val) <= cfg_.event_refine_tol) return theta;
      if ((val > 0.0) == (g_at_start > 0.0)) {
        lo = theta;
      } else {
        hi = theta;
      }
      if (hi - lo < 1e-15) break;
    }
    return hi;  // land just past the crossing
  }

  // ---- sliding -------------------------------------------------------------

  void surface_step(const FieldSample& s) {
    auto sol = sliding_select(s.generators, s.active_gradients, s.proj);
    if (!sol) {
      // no tangent combination: the trajectory crosses the band instead
      smooth_step(s);
      return;
    }
    if (should_exit_surface(s, *sol)) {
      smooth_step(s);
      return;
    }
    sliding_step(s, *sol);
  }

  bool should_exit_surface(const FieldSample& s, const SlidingSolution& sol) const {
    if (sol.objective_weight < 1.0 - 1e-9) return false;
    // pure objective motion that pulls inward on every active surface
    for (const Vector& gi : s.active_gradients) {
      const Vector pf = -s.proj.complement(s.grad_f);
      if (pf.dot(gi) > 1e-12) return false;
    }
    return true;
  }

  /// Velocity of the sliding field at y, for the active set `indices`;
  /// nullopt when y's sample no longer slides (left the band, empty
  /// selection, or exit condition).
  std::optional<Vector> sliding_velocity_at(const Vector& y) const {
    FieldSample sy = field_(y);
    if (sy.regime != Regime::Surface) return std::nullopt;
    auto sol = sliding_select(sy.generators, sy.active_gradients, sy.proj);
    if (!sol) return std::nullopt;
    return sol->velocity;
  }

  /// One Newton correction pulling y back onto the active surfaces and the
  /// equality manifold.
  Vector surface_correction(const Vector& y, const std::vector<int>& active) const {
    const int k = static_cast<int>(active.size());
    const int n = p_.num_equalities();
    if (k + n == 0) return y;
    Vector c(k + n);
    Matrix J(k + n, p_.n_vars());
    for (int r = 0; r < k; ++r) {
      auto [gv, gg] = p_.inequalities()[active[r]].eval_grad(y);
      c[r] = gv;
      J.row(r) = gg;
    }
    for (int j = 0; j < n; ++j) {
      auto [hv, hg] = p_.equalities()[j].eval_grad(y);
      c[k + j] = hv;
      J.row(k + j) = hg;
    }
    Matrix JJt = J * J.transpose();
    Eigen::LDLT<Matrix> ldlt(JJt);
    if (ldlt.info() != Eigen::Success)
      throw SingularGramError("active-surface Jacobian is rank deficient", 0.0);
    return y - J.transpose() * ldlt.solve(c);
  }

  void sliding_step(const FieldSample& s, const SlidingSolution& sol) {
    const Vector v1 = sol.velocity;
    const double speed = v1.norm();
    double dt = std::clamp(slide_h_, cfg_.step_min, cfg_.step_max);
    dt = std::min(dt, cfg_.t_max - t_ > 0.0 ? cfg_.t_max - t_ : dt);

    if (speed < 1e-18) {  // parked on the equilibrium; let the counter run out
      accept(dt, s, speed);
      return;
    }

    for (int attempt = 0; attempt < 64; ++attempt) {
      // Heun predictor-corrector along the sliding field; the embedded
      // Euler/Heun difference supplies the error estimate. A plain Euler
      // step has no tangential error control and rings at moderate
      // curvature.
      bool usable = true;
      Vector v2 = v1;
      Vector x_pred = x_ + dt * v1;
      try {
        x_pred = surface_correction(x_pred, s.active.indices);
        auto v2_opt = sliding_velocity_at(x_pred);
        if (v2_opt) {
          v2 = *v2_opt;
        } else {
          usable = dt <= 16.0 * cfg_.step_min;  // fall back to a tiny Euler move
        }
      } catch (const EvalDomainError&) {
        usable = false;
      } catch (const SingularGramError&) {
        usable = false;
      }
      if (!usable) {
        ++traj_.steps_rejected;
        dt *= 0.25;
        if (dt < cfg_.step_min)
          throw StepFailure{"sliding step keeps failing while shrinking the step"};
        continue;
      }

      Vector x_new = x_ + 0.5 * dt * (v1 + v2);

      // a previously inactive constraint may activate mid-slide
      double frac = 1.0;
      if (p_.num_inequalities() > 0) {
        const double band0 = eff_band(x_);
        Vector g_new = p_.inequality_values(x_new);
        for (int i = 0; i < p_.num_inequalities(); ++i) {
          if (std::abs(s.g_values[i]) <= band0) continue;
          if (s.g_values[i] * g_new[i] < 0.0) {
            const double f = chord_event(x_, x_new, i, s.g_values[i]);
            frac = std::min(frac, f);
          }
        }
        if (frac < 1.0) x_new = x_ + frac * (x_new - x_);
      }

      bool corrected_ok = true;
      try {
        x_new = surface_correction(x_new, s.active.indices);
      } catch (const SingularGramError&) {
        corrected_ok = false;
      } catch (const EvalDomainError&) {
        corrected_ok = false;
      }

      double drift = 0.0;
      if (corrected_ok) {
        for (int i : s.active.indices)
          drift = std::max(drift, std::abs(p_.inequalities()[i].value(x_new)));
      }
      const double err_est = 0.5 * dt * (v2 - v1).norm() /
                             (cfg_.abs_tol + cfg_.rel_tol * std::max(1.0, x_.norm()));

      if (!corrected_ok || drift > 10.0 * eff_band(x_new) ||
          (err_est > 1.0 && dt > cfg_.step_min)) {
        ++traj_.steps_rejected;
        dt = std::max(0.25 * dt, cfg_.step_min);
        if (!corrected_ok && dt <= cfg_.step_min)
          throw StepFailure{"surface correction failed at the smallest sliding step"};
        continue;
      }

      slide_h_ = std::clamp(
          dt * (err_est > 0.0 ? std::clamp(0.9 * std::pow(err_est, -0.5), 0.2, 5.0) : 5.0),
          cfg_.step_min, cfg_.step_max);
      accept(frac * dt, s, speed);
      x_ = x_new;
      return;
    }
    throw StepFailure{"sliding step size control failed to accept a step"};
  }

  /// Bisection along the straight chord from a to b for g_i = 0.
  double chord_event(const Vector& a, const Vector& b, int which, double g_at_start) const {
    const Expression& g = p_.inequalities()[which];
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double val = g.value(a + mid * (b - a));
      if (std::abs(val) <= cfg_.event_refine_tol) return mid;
      if ((val > 0.0) == (g_at_start > 0.0)) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo < 1e-15) break;
    }
    return hi;
  }

  // ---- members -------------------------------------------------------------

  const Problem& p_;
  IntegratorConfig cfg_;
  FieldFn field_;

  Vector x_;
  double t_ = 0.0;
  double h_ = 0.0;        // smooth step size
  double slide_h_ = 0.0;  // sliding step size
  double arc_length_ = 0.0;

  int consecutive_eq_ = 0;
  long record_stride_ = 1;

  struct Snapshot {
    double t;
    double arc;
    Vector x;
  };
  std::vector<Snapshot> snapshots_;

  Trajectory traj_;
};

}  // namespace

Trajectory integrate(const Problem& p, const Vector& x0, const IntegratorConfig& cfg,
                     const FieldFn& field) {
  return Integrator(p, cfg, field).run(x0);
}

Trajectory integrate(const Problem& p, const Vector& x0, const IntegratorConfig& cfg) {
  return integrate(p, x0, cfg, [&p, &cfg](const Vector& x) {
    return sample(p, x, cfg.band, cfg.tol_act);
  });
}

MultistartResult multistart(const Problem& p, const std::vector<Vector>& starts,
                            const IntegratorConfig& cfg, int threads) {
  if (starts.empty()) throw std::invalid_argument("multistart needs at least one start");
  MultistartResult out;
  out.trajectories.resize(starts.size());

  if (threads > 1) {
    std::vector<std::future<Trajectory>> futures;
    futures.reserve(starts.size());
    for (const Vector& x0 : starts)
      futures.push_back(std::async(std::launch::async,
                                   [&p, &cfg, x0]() { return integrate(p, x0, cfg); }));
    for (std::size_t i = 0; i < futures.size(); ++i) out.trajectories[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i)
      out.trajectories[i] = integrate(p, starts[i], cfg);
  }

  // merge converged endpoints in start order; representative = first hit
  for (std::size_t i = 0; i < out.trajectories.size(); ++i) {
    const Trajectory& tr = out.trajectories[i];
    if (tr.status != TrajectoryStatus::Converged || !tr.certificate) continue;
    bool merged = false;
    for (Equilibrium& eq : out.equilibria) {
      if ((eq.x - tr.final_x).norm() <= 1e-5) {
        eq.trajectory_indices.push_back(static_cast<int>(i));
        merged = true;
        break;
      }
    }
    if (!merged)
      out.equilibria.push_back({tr.final_x, *tr.certificate, {static_cast<int>(i)}});
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, int n_vars, std::ostream& out) {
  out << "t";
  for (int i = 1; i <= n_vars; ++i) out << ",x" << i;
  out << ",f,G,normh2,regime\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const StateRecord& st : traj.states) {
    put(st.t);
    for (int i = 0; i < n_vars; ++i) {
      out << ',';
      put(st.x[i]);
    }
    out << ',';
    put(st.f);
    out << ',';
    put(st.g_max);
    out << ',';
    put(st.normh2);
    out << ',' << regime_name(st.regime) << '\n';
  }
}

}  // namespace kktflow
