#include "invlab/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace invlab {

namespace {

const char* kPhiCaveat =
    "; whether terminal-objective invariance fully captures safety-compatibility remains an "
    "open question";

Policy audit_zero_policy(const Instance& instance) {
  return Policy::zero(instance.control.control_dim(), instance.control_authority)
      .with_id("zero-audit");
}

}  // namespace

Certificate check_r1_no_external(const Instance& instance) {
  Instance stripped = instance.with_policies({audit_zero_policy(instance)});
  Trajectory traj = simulate(stripped, stripped.policies.front());
  InvarianceAudit audit = invariance_audit(traj);
  const TrajectoryEvent* exit = traj.first_event(EventType::BoundaryCrossing);

  Certificate cert;
  cert.check_id = "R1";
  cert.parameters["policy"] = traj.policy_id;
  cert.parameters["horizon"] = instance.numerics.horizon;
  cert.parameters["dt"] = instance.numerics.dt;
  cert.evidence["max_control_norm"] = traj.max_control_norm;
  cert.evidence["worst_margin"] = audit.worst_margin;
  cert.evidence["worst_margin_time"] = audit.worst_time;
  if (exit) cert.evidence["first_exit_time"] = exit->time;
  cert.declarations.push_back(
      "finite surrogate: invariance is audited over the scenario horizon, not for all time");

  if (traj.terminated == Termination::Error) {
    cert.verdict = Verdict::Fail;
    cert.narrative = "zero-policy rerun diverged: " + traj.error_message;
  } else if (audit.invariant) {
    cert.verdict = Verdict::Pass;
    cert.narrative = "the safe set is invariant over the horizon with zero external control; "
                     "safety does not depend on continued enforcement here";
  } else {
    cert.verdict = Verdict::Fail;
    cert.narrative =
        exit ? "with the external channel silenced the state leaves the safe set at t = " +
                   format_double(exit->time)
             : "the safe-set level exceeds the boundary band without a recorded crossing";
  }
  return cert;
}

Certificate check_r2_genesis(const Vector& x0, const StatePartition& partition,
                             const PhiPredicate& phi) {
  Vector internal = split_internal(x0, partition).second;
  require_dimension(internal, phi.internal_dim(), "internal state");
  bool member = phi.contains(internal);

  Certificate cert;
  cert.check_id = "R2";
  cert.parameters["predicate"] = phi.describe();
  cert.evidence["internal_state"] = vector_json(internal);
  cert.declarations.push_back(
      "genesis interventions are declared setup steps; only their result, the initial internal "
      "configuration, is checked");

  cert.verdict = member ? Verdict::Pass : Verdict::Fail;
  cert.narrative = (member ? std::string("the initial internal configuration lies inside the "
                                         "safety-compatible set")
                           : std::string("the initial internal configuration lies outside the "
                                         "safety-compatible set")) +
                   kPhiCaveat;
  return cert;
}

Certificate check_r3_invariance(const Trajectory& trajectory, const StatePartition& partition,
                                const PhiPredicate& phi) {
  if (trajectory.samples.empty()) fail(ErrorCode::Config, "cannot audit an empty trajectory");
  if (trajectory.max_control_norm > tol::bound_slack)
    fail(ErrorCode::Ordering,
         "persistence must be audited on a zero-control trajectory; this one applied ||B u|| "
         "up to " + format_double(trajectory.max_control_norm));

  bool all_member = true;
  double first_bad_sample = 0.0;
  for (const TrajectorySample& s : trajectory.samples) {
    if (!phi.contains(split_internal(s.x, partition).second)) {
      all_member = false;
      first_bad_sample = s.t;
      break;
    }
  }
  const TrajectoryEvent* exit = trajectory.first_event(EventType::PhiExit);

  Certificate cert;
  cert.check_id = "R3";
  cert.parameters["policy"] = trajectory.policy_id;
  cert.parameters["samples"] = trajectory.samples.size();
  cert.parameters["predicate"] = phi.describe();
  cert.evidence["max_control_norm"] = trajectory.max_control_norm;
  cert.declarations.push_back(
      "finite surrogate: membership is checked at every recorded sample, standing in for all "
      "t in the horizon");

  if (all_member && trajectory.terminated != Termination::Error) {
    cert.verdict = Verdict::Pass;
    cert.narrative = std::string("the internal configuration stays inside the "
                                 "safety-compatible set at every sample") +
                     kPhiCaveat;
  } else if (!all_member) {
    double exit_time = exit ? exit->time : first_bad_sample;
    cert.evidence["first_exit_time"] = exit_time;
    cert.verdict = Verdict::Fail;
    cert.narrative = "the internal configuration leaves the safety-compatible set at t = " +
                     format_double(exit_time) + kPhiCaveat;
  } else {
    cert.verdict = Verdict::Fail;
    cert.narrative = "the trajectory diverged before the horizon: " + trajectory.error_message;
  }
  return cert;
}

Certificate check_r4_scaling(const Instance& instance, const std::vector<double>& levels) {
  if (levels.size() < 2)
    fail(ErrorCode::Config, "capability robustness needs at least two levels");
  double prev = -std::numeric_limits<double>::infinity();
  for (double level : levels) {
    if (!std::isfinite(level) || level < 0.0)
      fail(ErrorCode::Config, "capability levels must be finite and non-negative");
    if (level <= prev) fail(ErrorCode::Config, "capability levels must be strictly increasing");
    prev = level;
  }

  Certificate cert;
  cert.check_id = "R4";
  cert.parameters["levels"] = levels;
  cert.parameters["horizon"] = instance.numerics.horizon;
  cert.parameters["dt"] = instance.numerics.dt;
  cert.declarations.push_back(
      "finite surrogate: open-ended capability growth is audited at the listed pinned levels "
      "only");

  bool have_failure = false;
  double first_failing = 0.0;
  Json rows = Json::array();
  for (double level : levels) {
    Instance pinned =
        instance.with_constant_capability(level).with_policies({audit_zero_policy(instance)});
    Trajectory traj = simulate(pinned, pinned.policies.front());
    InvarianceAudit audit = invariance_audit(traj);
    const TrajectoryEvent* exit = traj.first_event(EventType::BoundaryCrossing);
    bool ok = audit.invariant && traj.terminated == Termination::Horizon;

    Json row = Json::object();
    row["level"] = level;
    row["invariant"] = ok;
    row["worst_margin"] = audit.worst_margin;
    if (exit) row["exit_time"] = exit->time;
    if (traj.terminated == Termination::Error) row["diverged"] = true;
    rows.push_back(row);

    if (!ok && !have_failure) {
      have_failure = true;
      first_failing = level;
    }
  }
  cert.evidence["levels"] = rows;

  if (have_failure) {
    cert.evidence["first_failing_level"] = first_failing;
    cert.verdict = Verdict::Fail;
    cert.narrative = "zero-control invariance breaks at pinned capability " +
                     format_double(first_failing);
  } else {
    cert.verdict = Verdict::Pass;
    cert.narrative = "the safe set stays invariant under zero control at every pinned "
                     "capability level";
  }
  return cert;
}

RequirementsReport run_requirements(const Instance& instance) {
  if (!instance.phi.has_value())
    fail(ErrorCode::Config,
         "the requirements audit needs an internal predicate block on the scenario");

  std::vector<double> levels = instance.numerics.r4_levels;
  if (levels.empty()) levels = {0.0, 1.0, 10.0};

  RequirementsReport report;
  report.parameters["r4_levels"] = levels;
  report.parameters["horizon"] = instance.numerics.horizon;
  report.parameters["dt"] = instance.numerics.dt;

  report.r1 = check_r1_no_external(instance);
  report.r2 = check_r2_genesis(instance.initial_state, instance.partition, *instance.phi);

  Instance stripped = instance.with_policies({audit_zero_policy(instance)});
  Trajectory traj = simulate(stripped, stripped.policies.front());
  report.r3 = check_r3_invariance(traj, instance.partition, *instance.phi);

  report.r4 = check_r4_scaling(instance, levels);

  if (instance.strategy.has_value()) {
    report.has_classification = true;
    report.claimed = instance.strategy->claimed;
    report.classification = classify_strategy(*instance.strategy, instance.policies);
  }

  std::vector<std::string> failing;
  for (const Certificate* c : {&report.r1, &report.r2, &report.r3, &report.r4})
    if (c->verdict != Verdict::Pass) failing.push_back(c->check_id);

  if (failing.empty()) {
    report.verdict = "intrinsic sustainment requirements hold";
  } else {
    std::string joined;
    for (std::size_t i = 0; i < failing.size(); ++i) joined += (i ? ", " : "") + failing[i];
    report.verdict = "requirements fail (" + joined + ")";
  }
  return report;
}

}  // namespace invlab
