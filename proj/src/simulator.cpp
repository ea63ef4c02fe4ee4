#include "invlab/simulator.hpp"

#include "invlab/audits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace invlab {

namespace {

constexpr double kRefineWidth = 1e-12;  // terminal time-bracket width for events
constexpr double kGridTiny = 1e-12;     // below this a grid collapses to one point

Vector held_velocity(const Instance& instance, double t, const Vector& x, const Vector& u) {
  return instance.drift.at(x, t) + instance.control.apply(u) +
         instance.endogenous.effect(x, instance.capability.at(t));
}

// One partial RK4 step of size sigma from (t0, x0) under the held control.
// At sigma equal to the full step this reproduces the discrete step exactly,
// so bisecting sigma localizes the event on the integrator's own path.
Vector partial_step(const Instance& instance, const Vector& u, double t0, const Vector& x0,
                    double sigma) {
  DerivFn deriv = [&](double tau, const Vector& y) {
    return held_velocity(instance, tau, y, u);
  };
  return rk4_step(deriv, t0, x0, sigma);
}

// flipped(x0) must be false and flipped at sigma = step must be true.
CrossingPoint bisect_event(const Instance& instance, const Vector& u, double t0,
                           const Vector& x0, double step,
                           const std::function<bool(const Vector&)>& flipped) {
  double lo = 0.0;
  double hi = step;
  Vector x_hi = partial_step(instance, u, t0, x0, hi);
  for (int iter = 0; iter < 80 && hi - lo > kRefineWidth; ++iter) {
    double mid = 0.5 * (lo + hi);
    Vector x_mid = partial_step(instance, u, t0, x0, mid);
    if (flipped(x_mid)) {
      hi = mid;
      x_hi = std::move(x_mid);
    } else {
      lo = mid;
    }
  }
  CrossingPoint point;
  point.time = t0 + hi;
  point.state = std::move(x_hi);
  point.level = instance.safe_set.level(point.state);
  return point;
}

bool phi_member(const Instance& instance, const Vector& x) {
  return instance.phi->contains(split_internal(x, instance.partition).second);
}

}  // namespace

std::string event_type_name(EventType type) {
  switch (type) {
    case EventType::BoundaryCrossing: return "boundary-crossing";
    case EventType::GammaContact: return "gamma-contact";
    case EventType::PhiExit: return "phi-exit";
    case EventType::Clip: return "clip";
  }
  return "unknown";
}

std::string termination_name(Termination termination) {
  switch (termination) {
    case Termination::Horizon: return "horizon";
    case Termination::Exit: return "exit";
    case Termination::Error: return "error";
  }
  return "unknown";
}

const TrajectoryEvent* Trajectory::first_event(EventType type) const {
  for (const TrajectoryEvent& event : events)
    if (event.type == type) return &event;
  return nullptr;
}

Vector rk4_step(const DerivFn& deriv, double t, const Vector& x, double dt) {
  Vector k1 = deriv(t, x);
  Vector k2 = deriv(t + 0.5 * dt, x + (0.5 * dt) * k1);
  Vector k3 = deriv(t + 0.5 * dt, x + (0.5 * dt) * k2);
  Vector k4 = deriv(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory simulate(const Instance& instance, const Policy& policy, const Vector& x0,
                    double horizon, double dt) {
  require_dimension(x0, instance.dimension(), "initial state");
  if (!std::isfinite(dt) || dt <= 0.0) fail(ErrorCode::Config, "dt must be positive");
  if (!std::isfinite(horizon) || horizon <= 0.0)
    fail(ErrorCode::Config, "horizon must be positive");
  if (policy.control_dim() != instance.control.control_dim())
    fail(ErrorCode::Dimension, "policy control dimension does not match the input matrix");
  if (instance.safe_set.level(x0) > 0.0)
    fail(ErrorCode::Config, "initial state lies outside the safe set");

  ChannelEnv env = instance.env();
  Trajectory traj;
  traj.dt = dt;
  traj.policy_id = policy.id();

  HistorySummary history;
  Vector x = x0;
  long clip_event = -1;
  bool track_phi = instance.phi.has_value();
  bool in_phi = track_phi && phi_member(instance, x);

  long steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
  if (steps < 1) steps = 1;

  for (long i = 0; i < steps; ++i) {
    double t = static_cast<double>(i) * dt;
    double t_next = (i + 1 == steps) ? horizon : static_cast<double>(i + 1) * dt;
    double step = t_next - t;
    if (step <= 0.0) break;

    ControlSample sample = policy.evaluate(t, x, history, env);
    if (sample.effective_norm > policy.bound() + tol::bound_slack)
      fail(ErrorCode::Policy,
           "held control exceeds the authority bound at t = " + format_double(t));

    double g_now = instance.safe_set.level(x);
    traj.samples.push_back({t, x, instance.capability.at(t), sample.u, g_now});
    traj.max_control_norm = std::max(traj.max_control_norm, sample.effective_norm);
    if (sample.clipped) {
      traj.clip_count += 1;
      if (clip_event < 0) {
        clip_event = static_cast<long>(traj.events.size());
        traj.events.push_back({EventType::Clip, t, x, 1});
      } else {
        traj.events[static_cast<std::size_t>(clip_event)].count += 1;
      }
    }

    Vector x_next = partial_step(instance, sample.u, t, x, step);
    if (!all_finite(x_next)) {
      traj.terminated = Termination::Error;
      traj.error_message = "non-finite state while stepping from t = " + format_double(t);
      break;
    }

    double g_next = instance.safe_set.level(x_next);
    if (g_next > 0.0) {
      // the first outward crossing ends the run at the refined contact state
      CrossingPoint cp = bisect_event(instance, sample.u, t, x, step, [&](const Vector& y) {
        return instance.safe_set.level(y) > 0.0;
      });
      traj.events.push_back({EventType::BoundaryCrossing, cp.time, cp.state, 1});
      if (instance.gamma.predicate && instance.gamma.predicate(cp.state))
        traj.events.push_back({EventType::GammaContact, cp.time, cp.state, 1});
      traj.samples.push_back(
          {cp.time, cp.state, instance.capability.at(cp.time), sample.u, cp.level});
      traj.terminated = Termination::Exit;
      break;
    }

    if (track_phi) {
      bool in_phi_next = phi_member(instance, x_next);
      if (in_phi && !in_phi_next) {
        CrossingPoint cp = bisect_event(instance, sample.u, t, x, step, [&](const Vector& y) {
          return !phi_member(instance, y);
        });
        traj.events.push_back({EventType::PhiExit, cp.time, cp.state, 1});
      }
      in_phi = in_phi_next;
    }

    history.samples += 1;
    history.last_time = t_next;
    history.min_inward_margin = std::min(history.min_inward_margin, -g_next);
    if (sample.clipped) history.clips += 1;
    x = std::move(x_next);
  }

  if (traj.terminated == Termination::Horizon) {
    // u is held across each step, so the last held value is still in force
    // at the horizon.
    Vector u_final = traj.samples.empty() ? Vector::Zero(instance.control.control_dim())
                                          : traj.samples.back().u;
    traj.samples.push_back({horizon, x, instance.capability.at(horizon), u_final,
                            instance.safe_set.level(x)});
  }
  return traj;
}

Trajectory simulate(const Instance& instance, const Policy& policy) {
  return simulate(instance, policy, instance.initial_state, instance.numerics.horizon,
                  instance.numerics.dt);
}

CrossingPoint refine_crossing(const Instance& instance, const Policy& policy, double t1,
                              const Vector& x1, double t2, const HistorySummary& history) {
  require_dimension(x1, instance.dimension(), "bracket state");
  if (!std::isfinite(t1) || !std::isfinite(t2) || t1 < 0.0 || t2 <= t1)
    fail(ErrorCode::Config, "refinement window must satisfy 0 <= t1 < t2");

  ControlSample sample = policy.evaluate(t1, x1, history, instance.env());
  double g1 = instance.safe_set.level(x1);
  Vector x2 = partial_step(instance, sample.u, t1, x1, t2 - t1);
  double g2 = instance.safe_set.level(x2);
  bool out1 = g1 > 0.0;
  if (out1 == (g2 > 0.0))
    fail(ErrorCode::Bracket, "g does not change sign across the window: g(t1) = " +
                                 format_double(g1) + ", g(t2) = " + format_double(g2));
  return bisect_event(instance, sample.u, t1, x1, t2 - t1, [&](const Vector& y) {
    return (instance.safe_set.level(y) > 0.0) != out1;
  });
}

InvarianceAudit invariance_audit(const Trajectory& trajectory) {
  InvarianceAudit audit;
  audit.samples = trajectory.samples.size();
  if (trajectory.samples.empty()) {
    audit.invariant = false;
    return audit;
  }
  audit.worst_margin = std::numeric_limits<double>::infinity();
  for (const TrajectorySample& s : trajectory.samples) {
    if (-s.g < audit.worst_margin) {
      audit.worst_margin = -s.g;
      audit.worst_time = s.t;
    }
    if (s.g > tol::boundary_band) audit.invariant = false;
  }
  audit.exited = trajectory.first_event(EventType::BoundaryCrossing) != nullptr;
  if (audit.exited) audit.invariant = false;
  return audit;
}

ExitConfirmation confirm_exit(const Instance& instance, const Policy& policy,
                              double contact_time, const Vector& contact_state, int steps) {
  require_dimension(contact_state, instance.dimension(), "contact state");
  if (steps < 1) fail(ErrorCode::Config, "exit confirmation needs at least one step");

  ChannelEnv env = instance.env();
  HistorySummary history;
  history.last_time = contact_time;
  Vector x = contact_state;
  double t = contact_time;
  double dt = instance.numerics.dt;

  for (int i = 0; i < steps; ++i) {
    ControlSample sample = policy.evaluate(t, x, history, env);
    x = partial_step(instance, sample.u, t, x, dt);
    if (!all_finite(x))
      fail(ErrorCode::Divergence, "non-finite state while confirming the exit");
    t += dt;
    history.samples += 1;
    history.last_time = t;
    history.min_inward_margin =
        std::min(history.min_inward_margin, -instance.safe_set.level(x));
  }

  ExitConfirmation out;
  out.time = t;
  out.final_state = x;
  out.final_level = instance.safe_set.level(x);
  out.exited = out.final_level > tol::boundary_band;
  return out;
}

std::vector<Vector> default_candidates(const Instance& instance) {
  int want = std::max(1, instance.numerics.candidate_count);
  std::vector<Vector> out;
  auto push_if_interior = [&](const Vector& x) {
    if (static_cast<int>(out.size()) >= want) return;
    if (instance.safe_set.classify(x) != Region::Interior) return;
    for (const Vector& y : out)
      if (y.size() == x.size() && (y - x).norm() == 0.0) return;
    out.push_back(x);
  };

  push_if_interior(instance.initial_state);
  const Vector& center = instance.safe_set.center();
  for (double factor : {0.7, 0.5, 0.35, 0.25, 0.15, 0.1, 0.05})
    push_if_interior(center + factor * (instance.initial_state - center));

  SplitRng rng(derive_seed(instance.numerics.seed, "a3-candidates"));
  int attempts = 0;
  while (static_cast<int>(out.size()) < want && attempts++ < 1000)
    push_if_interior(sample_interior_point(instance.safe_set, rng));

  if (out.empty()) fail(ErrorCode::Config, "no interior candidate start available");
  return out;
}

Certificate certify_a3(const Instance& instance, const Policy& policy,
                       const std::vector<Vector>& candidates, const ThresholdResult& threshold,
                       ReachWitness* witness) {
  if (candidates.empty())
    fail(ErrorCode::Config, "reachability search needs at least one candidate start");
  if (!threshold.t_kappa.has_value()) {
    // nothing to reach: the schedule never crosses the threshold, which makes
    // the search vacuously unsuccessful rather than ill-posed
    Certificate cert;
    cert.check_id = "A3";
    cert.verdict = Verdict::Fail;
    cert.parameters["policy"] = policy.id();
    cert.parameters["kappa_star"] = threshold.kappa_star;
    cert.evidence["found"] = false;
    cert.declarations.push_back(
        "semi-decision: exhausting the candidate list refutes nothing, it only fails to "
        "produce a witness");
    cert.narrative = "not certified: the capability schedule never reaches the supercritical "
                     "level within the horizon";
    return cert;
  }
  double t_kappa = *threshold.t_kappa;
  double horizon = instance.numerics.horizon;
  if (t_kappa > horizon)
    fail(ErrorCode::Config, "the supercritical time " + format_double(t_kappa) +
                                " lies beyond the horizon " + format_double(horizon));
  for (const Vector& candidate : candidates)
    if (instance.safe_set.classify(candidate) != Region::Interior)
      fail(ErrorCode::Config, "candidate starts must be strictly interior");

  Certificate cert;
  cert.check_id = "A3";
  cert.parameters["policy"] = policy.id();
  cert.parameters["policy_kind"] = policy.kind_name();
  cert.parameters["candidates"] = candidates.size();
  cert.parameters["kappa_star"] = threshold.kappa_star;
  cert.parameters["t_kappa"] = t_kappa;
  cert.parameters["horizon"] = horizon;
  cert.parameters["dt"] = instance.numerics.dt;

  Json log = Json::array();
  bool found = false;

  for (std::size_t ci = 0; ci < candidates.size() && !found; ++ci) {
    const Vector& start = candidates[ci];
    Trajectory traj = simulate(instance, policy, start, horizon, instance.numerics.dt);

    Json entry = Json::object();
    entry["candidate"] = ci;
    entry["start"] = vector_json(start);

    if (traj.terminated == Termination::Error) {
      entry["outcome"] = "diverged: " + traj.error_message;
      log.push_back(entry);
      continue;
    }
    const TrajectoryEvent* crossing = traj.first_event(EventType::BoundaryCrossing);
    if (!crossing) {
      entry["outcome"] = "no boundary contact within the horizon";
      log.push_back(entry);
      continue;
    }
    double tc = crossing->time;
    const Vector& xc = crossing->state;
    entry["contact_time"] = tc;

    bool interior_before = true;
    for (const TrajectorySample& s : traj.samples) {
      if (s.t >= tc) break;
      if (s.g >= 0.0) {
        interior_before = false;
        break;
      }
    }
    if (!interior_before) {
      entry["outcome"] = "touched the boundary before first contact";
      log.push_back(entry);
      continue;
    }
    if (tc < t_kappa - tol::crossing_time) {
      entry["outcome"] = "first contact precedes the supercritical time";
      log.push_back(entry);
      continue;
    }
    if (instance.gamma.predicate && !instance.gamma.predicate(xc)) {
      entry["outcome"] = "first contact misses the target boundary region";
      log.push_back(entry);
      continue;
    }

    // control held across the crossing step
    Vector u_held = Vector::Zero(instance.control.control_dim());
    for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
      if (it->t < tc) {
        u_held = it->u;
        break;
      }
    }
    double kappa_c = instance.capability.at(tc);
    Vector normal = instance.safe_set.outward_normal(xc);
    double rate = held_velocity(instance, tc, xc, u_held).dot(normal);

    entry["outcome"] = "witness";
    entry["kappa"] = kappa_c;
    entry["outward_rate"] = rate;
    log.push_back(entry);
    found = true;

    cert.verdict = Verdict::Pass;
    cert.evidence["witness"] = Json{{"candidate", ci},
                                    {"start", vector_json(start)},
                                    {"contact", vector_json(xc)},
                                    {"u_held", vector_json(u_held)},
                                    {"t_reach", tc},
                                    {"kappa", kappa_c},
                                    {"outward_rate", rate}};
    cert.narrative = "candidate " + std::to_string(ci) +
                     " first touches the boundary inside the target region at t = " +
                     format_double(tc) + " >= t_kappa = " + format_double(t_kappa) +
                     ", staying strictly interior before";

    if (witness) {
      witness->candidate_index = static_cast<int>(ci);
      witness->start = start;
      witness->contact = xc;
      witness->u_held = u_held;
      witness->t_reach = tc;
      witness->kappa = kappa_c;
      witness->outward_rate = rate;
    }
  }

  cert.evidence["candidates"] = log;
  cert.evidence["found"] = found;
  cert.declarations.push_back(
      "semi-decision: exhausting the candidate list refutes nothing, it only fails to produce "
      "a witness");
  if (!found) {
    cert.verdict = Verdict::Fail;
    cert.narrative = "no candidate start produced a first contact inside the target region at "
                     "or after the supercritical time";
  }
  return cert;
}

namespace {

std::string describe_containment(const InvarianceAudit& audit, const Trajectory& traj) {
  if (traj.terminated == Termination::Error) return "diverged: " + traj.error_message;
  if (audit.invariant)
    return "stayed inside the safe set (worst margin " + format_double(audit.worst_margin) +
           " at t = " + format_double(audit.worst_time) + ")";
  const TrajectoryEvent* exit = traj.first_event(EventType::BoundaryCrossing);
  if (exit) return "left the safe set at t = " + format_double(exit->time);
  return "reached the boundary band without a recorded crossing";
}

void add_premise_declarations(const Instance& instance, Certificate& cert) {
  if (instance.safe_set.kind() == SafeSet::Kind::Custom) {
    cert.declarations.push_back(
        std::string("safe set compactness and boundary smoothness are declared by the "
                    "configuration (declared_compact = ") +
        (instance.safe_set.declared_compact() ? "true" : "false") + "), not checked");
  } else {
    cert.declarations.push_back("safe set '" + instance.safe_set.describe() +
                                "' is compact with smooth boundary by construction");
  }
  cert.declarations.push_back(
      "existence and uniqueness of maximal solutions over the horizon is declared; fixed-step "
      "trajectories are the numerical surrogate");
  if (!instance.endogenous.admissibility_builtin())
    cert.declarations.push_back(
        "custom endogenous family: admissibility (joint continuity, monotone scaling) is "
        "declared and only probed, not proven");
  cert.declarations.push_back(
      "the policy suite is a finite surrogate for the class of externally enforced strategies");
}

}  // namespace

HarnessReport run_harness(const Instance& instance) {
  bool has_restoring = false;
  bool has_aggregate = false;
  for (const Policy& p : instance.policies) {
    if (p.kind() == Policy::Kind::RestoringOptimal) has_restoring = true;
    if (p.kind() == Policy::Kind::Aggregate) has_aggregate = true;
  }
  if (!has_restoring)
    fail(ErrorCode::Config,
         "the policy suite must include the restoring-optimal policy: the escape claim is "
         "vacuous against weaker opposition");

  HarnessReport report;
  report.a1 = certify_a1(instance);
  report.h1 = certify_h1(instance);
  report.h2 = certify_h2(instance);

  std::vector<Vector> samples =
      instance.gamma_samples(instance.numerics.boundary_samples, "gamma-samples");
  report.parameters["seed"] = instance.numerics.seed;
  report.parameters["seed_stream"] = "gamma-samples";
  report.parameters["boundary_samples"] = samples.size();
  report.parameters["sample_hash"] = hash_vectors(samples);
  report.parameters["horizon"] = instance.numerics.horizon;
  report.parameters["dt"] = instance.numerics.dt;

  std::vector<Policy> suite = instance.policies;
  if (!has_aggregate) {
    suite.push_back(Policy::aggregate(instance.policies).with_id("suite-aggregate"));
    report.aggregate_synthesized = true;
  }

  double horizon = instance.numerics.horizon;
  double kappa0 = instance.capability.at(0.0);
  double kappa_end = instance.capability.at(horizon);
  double eps = tol::strictness;
  double margin_end = min_margin(instance, samples, kappa_end);

  auto containment_rows = [&]() {
    for (const Policy& p : suite) {
      Trajectory traj = simulate(instance, p);
      InvarianceAudit audit = invariance_audit(traj);
      PolicyOutcome row;
      row.policy_id = p.id();
      row.kind = p.kind_name();
      row.synthesized = report.aggregate_synthesized && &p == &suite.back();
      row.within_instance_authority =
          p.bound() <= instance.control_authority + tol::bound_slack;
      row.has_containment = true;
      row.containment = audit;
      row.note = describe_containment(audit, traj);
      report.outcomes.push_back(row);
    }
  };

  if (margin_end <= eps) {
    // Not supercritical by the horizon. Whether capability growth would get
    // there later decides which premise failed.
    bool ever_supercritical = false;
    double kappa_sup = instance.capability.supremum();
    if (std::isfinite(kappa_sup)) {
      ever_supercritical = min_margin(instance, samples, kappa_sup) > eps;
    } else {
      for (double probe = std::max(1.0, 2.0 * std::max(kappa_end, 1.0)); probe <= 1e12;
           probe *= 2.0) {
        if (min_margin(instance, samples, probe) > eps) {
          ever_supercritical = true;
          break;
        }
      }
    }

    std::vector<double> grid =
        kappa_end - kappa0 > kGridTiny
            ? linspace(kappa0, kappa_end, std::max(2, instance.numerics.kappa_grid_points))
            : std::vector<double>{kappa0};
    report.a2 = certify_a2(instance, samples, grid);

    report.lemma1.check_id = "Lemma1";
    report.lemma1.narrative = "not evaluated: the supercritical gap was not certified";

    Certificate thm;
    thm.check_id = "Theorem1";
    thm.parameters["kappa_at_horizon"] = kappa_end;
    thm.parameters["min_margin_at_horizon"] = margin_end;
    add_premise_declarations(instance, thm);
    if (ever_supercritical) {
      report.verdict = "not instantiated (horizon below T_kappa)";
      thm.verdict = Verdict::NotCheckable;
      thm.narrative = "the schedule reaches a supercritical level only after the horizon, so "
                      "the escape mechanism is never engaged within it";
    } else {
      report.verdict = "not instantiated (A2 fails)";
      thm.verdict = Verdict::Fail;
      thm.narrative = "subcritical regime: the endogenous push never exceeds the combined "
                      "inward authority at any attainable capability level";
    }
    report.theorem1 = thm;
    containment_rows();
    return report;
  }

  double margin0 = min_margin(instance, samples, kappa0);
  if (margin0 > eps) {
    report.already_supercritical = true;
    report.threshold_found = true;
    report.threshold.kappa_star = kappa0;
    report.threshold.t_kappa = 0.0;
    report.threshold.margin_at_star = margin0;
    report.threshold.parameters["note"] =
        "already supercritical at t = 0; the threshold is reported as kappa(0)";
    report.threshold.parameters["boundary_samples"] = samples.size();
    report.threshold.parameters["sample_hash"] = hash_vectors(samples);
  } else {
    report.threshold = find_kappa_star(instance, samples, kappa0, kappa_end);
    report.threshold_found = true;
  }
  double t_kappa = std::min(report.threshold.t_kappa.value(), horizon);
  report.threshold.t_kappa = t_kappa;

  double kappa_at_t = instance.capability.at(t_kappa);
  std::vector<double> kappa_grid =
      kappa_end - kappa_at_t > kGridTiny
          ? linspace(kappa_at_t, kappa_end, std::max(2, instance.numerics.kappa_grid_points))
          : std::vector<double>{kappa_at_t};
  report.a2 = certify_a2(instance, samples, kappa_grid);

  if (report.a2.verdict != Verdict::Pass) {
    report.verdict = "not instantiated (A2 fails)";
    report.lemma1.check_id = "Lemma1";
    report.lemma1.narrative = "not evaluated: the supercritical gap was not certified";
    Certificate thm;
    thm.check_id = "Theorem1";
    thm.verdict = Verdict::Fail;
    thm.narrative = "the gap certificate failed on the supercritical window";
    add_premise_declarations(instance, thm);
    report.theorem1 = thm;
    containment_rows();
    return report;
  }

  std::vector<double> time_grid =
      horizon - t_kappa > kGridTiny
          ? linspace(t_kappa, horizon, std::max(2, instance.numerics.time_grid_points))
          : std::vector<double>{t_kappa};
  report.lemma1 = lemma1_certificate(instance, samples, time_grid, report.a2);

  std::vector<Vector> candidates = default_candidates(instance);
  report.parameters["candidates"] = candidates.size();

  Certificate thm;
  thm.check_id = "Theorem1";
  thm.parameters["kappa_star"] = report.threshold.kappa_star;
  thm.parameters["t_kappa"] = t_kappa;
  thm.parameters["u_max"] = instance.control_authority;
  thm.parameters["drift_bound"] = instance.drift_bound.value;
  thm.parameters["horizon"] = horizon;
  thm.parameters["dt"] = instance.numerics.dt;
  thm.parameters["policies"] = suite.size();
  add_premise_declarations(instance, thm);

  bool all_ok = report.lemma1.verdict == Verdict::Pass;
  std::string failure;
  if (!all_ok) failure = "outward positivity fails on the grid";

  for (const Policy& p : suite) {
    PolicyOutcome row;
    row.policy_id = p.id();
    row.kind = p.kind_name();
    row.synthesized = report.aggregate_synthesized && &p == &suite.back();
    row.within_instance_authority = p.bound() <= instance.control_authority + tol::bound_slack;
    if (!row.within_instance_authority && row.synthesized)
      thm.declarations.push_back(
          "the synthesized aggregate's combined authority exceeds the instance bound; its "
          "escape is extra evidence, not covered by the gap certificate");

    ReachWitness w;
    Certificate a3 = certify_a3(instance, p, candidates, report.threshold, &w);
    if (a3.verdict == Verdict::Pass) {
      row.contact_found = true;
      row.contact_time = w.t_reach;
      row.contact_point = w.contact;
      row.contact_capability = w.kappa;
      row.outward_rate = w.outward_rate;
      ExitConfirmation exit = confirm_exit(instance, p, w.t_reach, w.contact);
      row.exit_confirmed = exit.exited;

      MarginSample ms;
      ms.boundary_point = w.contact;
      ms.capability = w.kappa;
      ms.time = w.t_reach;
      ms.outward_component = w.outward_rate;
      ms.inward_authority = 0.0;
      ms.margin = w.outward_rate;
      thm.margins.push_back(ms);

      if (!(w.outward_rate > eps)) {
        row.note = "contact found but the crossing is not outward";
        if (all_ok) failure = "no outward crossing for policy '" + p.id() + "'";
        all_ok = false;
      } else if (!exit.exited) {
        row.note = "contact found but the exit did not persist";
        if (all_ok) failure = "exit not confirmed for policy '" + p.id() + "'";
        all_ok = false;
      } else {
        row.note = "escape witnessed and exit confirmed";
      }
    } else {
      row.note = "no escape witness found";
      if (all_ok) failure = "no escape witness for policy '" + p.id() + "'";
      all_ok = false;
    }
    report.a3.push_back(std::move(a3));
    report.outcomes.push_back(row);
  }

  thm.verdict = all_ok ? Verdict::Pass : Verdict::Fail;
  if (all_ok) {
    thm.narrative = "externally enforced containment fails on this instance: every policy in "
                    "the suite, including the strongest admissible opposition, is escaped at "
                    "or after the supercritical time; premises certified numerically";
    report.verdict = "theorem-instantiated";
  } else {
    thm.narrative = failure;
    report.verdict = "not instantiated (" + failure + ")";
  }
  thm.evidence["min_margin"] = report.lemma1.evidence.contains("min_margin")
                                   ? report.lemma1.evidence["min_margin"]
                                   : Json();
  report.theorem1 = thm;
  report.instantiated = all_ok;
  return report;
}

}  // namespace invlab
