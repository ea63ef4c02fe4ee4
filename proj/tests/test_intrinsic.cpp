#include <catch2/catch_amalgamated.hpp>

#include "invlab/intrinsic.hpp"

#include <cmath>

using namespace invlab;

namespace {

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// x_dot = -x - kappa x: contraction at every capability level.
Instance contraction_instance() {
  Matrix a(1, 1);
  a << -1.0;
  Numerics numerics;
  numerics.dt = 1e-3;
  numerics.horizon = 10.0;
  Instance inst(StatePartition(1, 0), vec1(0.5), SafeSet::ball(vec1(0.0), 1.0),
                BoundaryRegion::full(), Drift::linear(a), declared_drift_bound(1.0),
                ControlChannel(Matrix::Identity(1, 1)), 1.0,
                EndogenousChannel::target_seeking(vec1(0.0)), CapabilitySchedule::linear(0.0, 1.0),
                {Policy::zero(1, 1.0)}, numerics);
  inst.phi = PhiPredicate::ball(vec1(0.0), 0.6);
  return inst;
}

// Safety held only by the restoring policy: the zero-policy rerun leaves.
Instance enforced_instance() {
  Numerics numerics;
  numerics.dt = 1e-3;
  numerics.horizon = 10.0;
  return Instance(StatePartition(1, 0), vec1(0.9), SafeSet::ball(vec1(0.0), 1.0),
                  BoundaryRegion::full(), Drift::zero(1), declared_drift_bound(0.0),
                  ControlChannel(Matrix::Identity(1, 1)), 1.0,
                  EndogenousChannel::linear_gain(1, 1.0), CapabilitySchedule::constant(0.5),
                  {Policy::restoring_optimal(1, 1.0).with_id("keeper")}, numerics);
}

// Two-state system whose internal coordinate creeps at a constant rate,
// independent of capability: x_int(t) = x_int(0) + rate * t.
Instance creeping_instance(double rate, double x_int0, double horizon) {
  StatePartition partition(2, 1);
  Matrix b(2, 1);
  b << 1.0, 0.0;
  Numerics numerics;
  numerics.dt = 1e-3;
  numerics.horizon = horizon;
  Instance inst(partition, vec2(0.0, x_int0), SafeSet::ball(vec2(0.0, 0.0), 1.0),
                BoundaryRegion::full(), Drift::zero(2), declared_drift_bound(0.0),
                ControlChannel(b), 1.0, EndogenousChannel::internal_drift(partition, vec1(rate)),
                CapabilitySchedule::constant(1.0), {Policy::zero(1, 1.0)}, numerics);
  inst.phi = PhiPredicate::ball(vec1(0.0), 0.2);
  return inst;
}

}  // namespace

TEST_CASE("zero-policy rerun passes when the dynamics contract", "[intrinsic]") {
  Certificate cert = check_r1_no_external(contraction_instance());
  CHECK(cert.check_id == "R1");
  CHECK(cert.verdict == Verdict::Pass);
  CHECK(cert.evidence["max_control_norm"].get<double>() == 0.0);
  CHECK(cert.evidence["worst_margin"].get<double>() == Catch::Approx(0.75).margin(1e-9));
  CHECK(cert.evidence["worst_margin_time"].get<double>() == 0.0);
  CHECK_FALSE(cert.evidence.contains("first_exit_time"));
  CHECK(cert.narrative.find("does not depend on continued enforcement") != std::string::npos);
}

TEST_CASE("zero-policy rerun fails when safety was enforced", "[intrinsic]") {
  // without the keeper x_dot = 0.5 x, so the state leaves the unit interval
  // from 0.9 at t = 2 ln(10/9)
  Certificate cert = check_r1_no_external(enforced_instance());
  CHECK(cert.verdict == Verdict::Fail);
  double expected = 2.0 * std::log(10.0 / 9.0);
  CHECK(cert.evidence["first_exit_time"].get<double>() == Catch::Approx(expected).margin(1e-6));
  CHECK(cert.narrative.find("leaves the safe set") != std::string::npos);
}

TEST_CASE("genesis membership uses the closed-ball convention", "[intrinsic]") {
  StatePartition partition(2, 1);
  PhiPredicate phi = PhiPredicate::ball(vec1(0.0), 0.2);

  CHECK(check_r2_genesis(vec2(0.9, 0.0), partition, phi).verdict == Verdict::Pass);
  CHECK(check_r2_genesis(vec2(0.9, 0.3), partition, phi).verdict == Verdict::Fail);
  // boundary contact still counts as inside
  CHECK(check_r2_genesis(vec2(0.9, 0.2), partition, phi).verdict == Verdict::Pass);

  Certificate cert = check_r2_genesis(vec2(0.9, 0.1), partition, phi);
  CHECK(cert.check_id == "R2");
  CHECK(cert.evidence["internal_state"][0].get<double>() == 0.1);
  // the open question about phi's adequacy is restated on every verdict
  CHECK(cert.narrative.find("open question") != std::string::npos);

  PhiPredicate half = PhiPredicate::halfspace(vec1(1.0), 0.1);
  CHECK(check_r2_genesis(vec2(0.9, 0.05), partition, half).verdict == Verdict::Pass);
  CHECK(check_r2_genesis(vec2(0.9, 0.15), partition, half).verdict == Verdict::Fail);

  PhiPredicate wide = PhiPredicate::ball(vec2(0.0, 0.0), 0.2);
  CHECK_THROWS_AS(check_r2_genesis(vec2(0.9, 0.0), partition, wide), Error);
}

TEST_CASE("persistence audit finds the refined predicate exit", "[intrinsic]") {
  // x_int(t) = 0.1 t leaves the closed 0.2-ball at t = 2
  Instance inst = creeping_instance(0.1, 0.0, 4.0);
  Trajectory traj = simulate(inst, inst.default_policy());
  REQUIRE(traj.terminated == Termination::Horizon);
  const TrajectoryEvent* exit = traj.first_event(EventType::PhiExit);
  REQUIRE(exit != nullptr);
  CHECK(exit->time == Catch::Approx(2.0).margin(1e-6));

  Certificate cert = check_r3_invariance(traj, inst.partition, *inst.phi);
  CHECK(cert.check_id == "R3");
  CHECK(cert.verdict == Verdict::Fail);
  CHECK(cert.evidence["first_exit_time"].get<double>() == Catch::Approx(2.0).margin(1e-6));
  CHECK(cert.narrative.find("leaves the safety-compatible set at t = ") != std::string::npos);
}

TEST_CASE("persistence audit passes motion toward the reference", "[intrinsic]") {
  // x_int(t) = 0.1 - 0.05 t stays within the 0.2-ball over horizon 4
  Instance inst = creeping_instance(-0.05, 0.1, 4.0);
  Trajectory traj = simulate(inst, inst.default_policy());
  Certificate cert = check_r3_invariance(traj, inst.partition, *inst.phi);
  CHECK(cert.verdict == Verdict::Pass);
  CHECK(cert.narrative.find("stays inside the safety-compatible set") != std::string::npos);

  // constant internal state is trivially persistent
  Instance still = creeping_instance(0.0, 0.1, 4.0);
  Trajectory flat = simulate(still, still.default_policy());
  CHECK(check_r3_invariance(flat, still.partition, *still.phi).verdict == Verdict::Pass);
}

TEST_CASE("persistence audit refuses controlled trajectories", "[intrinsic]") {
  Instance inst = creeping_instance(0.1, 0.0, 4.0);
  Policy pusher = Policy::constant(vec1(-0.5), 1.0);
  Trajectory controlled = simulate(inst, pusher);

  try {
    check_r3_invariance(controlled, inst.partition, *inst.phi);
    FAIL("expected an ordering error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Ordering);
  }

  CHECK_THROWS_AS(check_r3_invariance(Trajectory{}, inst.partition, *inst.phi), Error);
}

TEST_CASE("capability scaling audit reports the first failing level", "[intrinsic]") {
  // x_dot = (kappa - 1) x: contracts below kappa = 1, grows above it
  Matrix a(1, 1);
  a << -1.0;
  Numerics numerics;
  numerics.dt = 1e-3;
  numerics.horizon = 10.0;
  Instance inst(StatePartition(1, 0), vec1(0.9), SafeSet::ball(vec1(0.0), 1.0),
                BoundaryRegion::full(), Drift::linear(a), declared_drift_bound(1.0),
                ControlChannel(Matrix::Identity(1, 1)), 1.0,
                EndogenousChannel::linear_gain(1, 1.0), CapabilitySchedule::constant(0.5),
                {Policy::zero(1, 1.0)}, numerics);

  Certificate cert = check_r4_scaling(inst, {0.5, 2.0});
  CHECK(cert.check_id == "R4");
  CHECK(cert.verdict == Verdict::Fail);
  CHECK(cert.evidence["first_failing_level"].get<double>() == 2.0);
  const Json& rows = cert.evidence["levels"];
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["invariant"].get<bool>());
  CHECK_FALSE(rows[1]["invariant"].get<bool>());
  CHECK(rows[1].contains("exit_time"));
  CHECK(cert.narrative.find("breaks at pinned capability") != std::string::npos);

  // without the inward drift every positive level pushes the state out
  Instance bare(StatePartition(1, 0), vec1(0.9), SafeSet::ball(vec1(0.0), 1.0),
                BoundaryRegion::full(), Drift::zero(1), declared_drift_bound(0.0),
                ControlChannel(Matrix::Identity(1, 1)), 1.0,
                EndogenousChannel::linear_gain(1, 1.0), CapabilitySchedule::constant(0.5),
                {Policy::zero(1, 1.0)}, numerics);
  Certificate first = check_r4_scaling(bare, {0.5, 2.0});
  CHECK(first.verdict == Verdict::Fail);
  CHECK(first.evidence["first_failing_level"].get<double>() == 0.5);

  // endogenous inward push: invariant at every level
  Certificate all_pass = check_r4_scaling(contraction_instance(), {0.0, 1.0, 10.0});
  CHECK(all_pass.verdict == Verdict::Pass);
  CHECK_FALSE(all_pass.evidence.contains("first_failing_level"));

  CHECK_THROWS_AS(check_r4_scaling(inst, {1.0}), Error);
  CHECK_THROWS_AS(check_r4_scaling(inst, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(check_r4_scaling(inst, {2.0, 1.0}), Error);
  CHECK_THROWS_AS(check_r4_scaling(inst, {-1.0, 1.0}), Error);
}

TEST_CASE("classification hinges on the sustain-stage policy alone", "[intrinsic]") {
  std::vector<Policy> suite = {Policy::zero(1, 1.0).with_id("idle"),
                               Policy::restoring_optimal(1, 1.0).with_id("keeper")};

  StrategyDeclaration none;
  none.claimed = StrategyClass::Intrinsic;
  ClassificationResult quiet = classify_strategy(none, suite);
  CHECK(quiet.assigned == StrategyClass::Intrinsic);
  CHECK_FALSE(quiet.mismatch);

  StrategyDeclaration enforced;
  enforced.sustain_policy_id = "keeper";
  enforced.claimed = StrategyClass::ExternallyEnforced;
  ClassificationResult active = classify_strategy(enforced, suite);
  CHECK(active.assigned == StrategyClass::ExternallyEnforced);
  CHECK_FALSE(active.mismatch);

  // claiming intrinsic while a live policy sustains safety is a mismatch
  enforced.claimed = StrategyClass::Intrinsic;
  ClassificationResult caught = classify_strategy(enforced, suite);
  CHECK(caught.assigned == StrategyClass::ExternallyEnforced);
  CHECK(caught.mismatch);

  // a provably zero sustain policy cannot enforce anything
  StrategyDeclaration idle;
  idle.sustain_policy_id = "idle";
  idle.claimed = StrategyClass::Intrinsic;
  CHECK(classify_strategy(idle, suite).assigned == StrategyClass::Intrinsic);

  // genesis interventions are echoed, never reclassified
  StrategyDeclaration genesis;
  genesis.genesis_interventions = {"initialize internal configuration"};
  genesis.claimed = StrategyClass::Intrinsic;
  ClassificationResult seeded = classify_strategy(genesis, suite);
  CHECK(seeded.assigned == StrategyClass::Intrinsic);
  CHECK(seeded.rationale.find("genesis interventions do not affect the class") !=
        std::string::npos);

  StrategyDeclaration missing;
  missing.sustain_policy_id = "ghost";
  CHECK_THROWS_AS(classify_strategy(missing, suite), Error);
}

TEST_CASE("requirements report aggregates the four audits", "[intrinsic]") {
  Instance good = contraction_instance();
  good.numerics.r4_levels = {0.0, 1.0, 10.0};
  StrategyDeclaration declared;
  declared.claimed = StrategyClass::Intrinsic;
  good.strategy = declared;

  RequirementsReport report = run_requirements(good);
  CHECK(report.r1.verdict == Verdict::Pass);
  CHECK(report.r2.verdict == Verdict::Pass);
  CHECK(report.r3.verdict == Verdict::Pass);
  CHECK(report.r4.verdict == Verdict::Pass);
  CHECK(report.verdict == "intrinsic sustainment requirements hold");
  CHECK(report.has_classification);
  CHECK(report.classification.assigned == StrategyClass::Intrinsic);
  CHECK_FALSE(report.classification.mismatch);

  Instance creeping = creeping_instance(0.1, 0.0, 4.0);
  creeping.numerics.r4_levels = {0.0, 1.0};
  RequirementsReport failing = run_requirements(creeping);
  CHECK(failing.r1.verdict == Verdict::Pass);
  CHECK(failing.r2.verdict == Verdict::Pass);
  CHECK(failing.r3.verdict == Verdict::Fail);
  CHECK(failing.r4.verdict == Verdict::Pass);  // the safe set itself is never left
  CHECK(failing.verdict == "requirements fail (R3)");
  CHECK_FALSE(failing.has_classification);

  Instance no_phi = enforced_instance();
  CHECK_THROWS_AS(run_requirements(no_phi), Error);
}
