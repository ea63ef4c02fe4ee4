#include <catch2/catch_amalgamated.hpp>

#include "invlab/supercritical.hpp"

#include "invlab/policies.hpp"

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

// Unit interval [-1, 1] with f = 0, B = [1], h = kappa * x. On the boundary
// the outward push is exactly kappa, so the gap margin is kappa - (u_max + M_f).
Instance line_instance(CapabilitySchedule schedule, double u_max = 1.0, double drift_bound = 0.0) {
  Matrix b(1, 1);
  b << 1.0;
  return Instance(StatePartition(1, 0), vec1(0.0), SafeSet::ball(vec1(0.0), 1.0),
                  BoundaryRegion::full(), Drift::zero(1), declared_drift_bound(drift_bound),
                  ControlChannel(b), u_max, EndogenousChannel::linear_gain(1, 1.0),
                  std::move(schedule), {Policy::zero(1, u_max)}, Numerics{});
}

std::vector<Vector> line_boundary() { return {vec1(-1.0), vec1(1.0)}; }

template <typename Fn>
ErrorCode thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Domain;
}

}  // namespace

TEST_CASE("gap margin closed forms on the unit interval", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::constant(1.5));

  MarginSample s = a2_margin(inst, vec1(1.0), 1.5);
  CHECK(s.margin == Catch::Approx(0.5).margin(1e-12));
  CHECK(s.outward_component == Catch::Approx(1.5).margin(1e-12));
  CHECK(s.inward_authority == Catch::Approx(1.0).margin(1e-12));
  CHECK(s.capability == 1.5);
  CHECK(s.time == 0.0);
  CHECK(s.boundary_point(0) == 1.0);

  // kappa equal to the combined authority sits exactly on the floor.
  CHECK(a2_margin(inst, vec1(-1.0), 1.0).margin == Catch::Approx(0.0).margin(1e-12));

  CHECK(min_margin(inst, line_boundary(), 1.5) == Catch::Approx(0.5).margin(1e-12));

  CHECK_THROWS_AS(a2_margin(inst, vec2(1.0, 0.0), 1.5), Error);
  CHECK_THROWS_AS(min_margin(inst, {}, 1.5), Error);
}

TEST_CASE("gap margin on the disk with drift bound", "[supercritical]") {
  // u_max = 2 and declared M_f = 0.5; at kappa = 3 every boundary point of the
  // unit circle has margin 3 - 2.5 = 0.5 under the radial linear-gain channel.
  Matrix a = -0.3 * Matrix::Identity(2, 2);
  Matrix b = Matrix::Identity(2, 2);
  Instance inst(StatePartition(2, 0), vec2(0.5, 0.0), SafeSet::ball(vec2(0.0, 0.0), 1.0),
                BoundaryRegion::full(), Drift::linear(a), declared_drift_bound(0.5),
                ControlChannel(b), 2.0, EndogenousChannel::linear_gain(2, 1.0),
                CapabilitySchedule::linear(0.0, 1.0), {Policy::zero(2, 2.0)}, Numerics{});

  const double s = std::sqrt(0.5);
  for (const Vector& point : {vec2(0.0, 1.0), vec2(-1.0, 0.0), vec2(s, s)}) {
    MarginSample m = a2_margin(inst, point, 3.0);
    CHECK(m.margin == Catch::Approx(0.5).margin(1e-9));
    CHECK(m.inward_authority == Catch::Approx(2.5).margin(1e-12));
  }
}

TEST_CASE("gap certificate over a capability grid", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::constant(1.5));
  std::vector<Vector> samples = line_boundary();

  Certificate pass = certify_a2(inst, samples, {1.2, 2.0, 5.0});
  CHECK(pass.check_id == "A2");
  CHECK(pass.verdict == Verdict::Pass);
  CHECK(pass.evidence["min_margin"].get<double>() == Catch::Approx(0.2).margin(1e-12));
  CHECK(pass.evidence["argmin"]["kappa"].get<double>() == 1.2);
  CHECK(pass.margins.size() == 3);  // worst sample per grid level
  CHECK(pass.parameters["sample_hash"] == hash_vectors(samples));
  CHECK_FALSE(pass.declarations.empty());

  // A level exactly at u_max + M_f fails the strict floor.
  Certificate fail_floor = certify_a2(inst, samples, {1.0, 2.0});
  CHECK(fail_floor.verdict == Verdict::Fail);
  CHECK(fail_floor.narrative.find("strict-positivity floor") != std::string::npos);

  // Inward-pointing channel: margins are negative at every level.
  Instance inward(StatePartition(1, 0), vec1(0.0), SafeSet::ball(vec1(0.0), 1.0),
                  BoundaryRegion::full(), Drift::zero(1), declared_drift_bound(0.0),
                  ControlChannel(Matrix::Identity(1, 1)), 1.0,
                  EndogenousChannel::target_seeking(vec1(0.0)), CapabilitySchedule::constant(4.0),
                  {Policy::zero(1, 1.0)}, Numerics{});
  Certificate neg = certify_a2(inward, samples, {1.0, 4.0});
  CHECK(neg.verdict == Verdict::Fail);
  CHECK(neg.evidence["min_margin"].get<double>() < 0.0);

  Certificate empty = certify_a2(inst, {}, {1.5});
  CHECK(empty.verdict == Verdict::NotCheckable);

  CHECK_THROWS_AS(certify_a2(inst, samples, {}), Error);
  CHECK_THROWS_AS(certify_a2(inst, samples, {2.0, 1.0}), Error);
  CHECK_THROWS_AS(certify_a2(inst, samples, {-1.0, 1.0}), Error);
}

TEST_CASE("threshold bisection recovers u_max + M_f", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::linear(0.0, 1.0));
  std::vector<Vector> samples = line_boundary();

  ThresholdResult r = find_kappa_star(inst, samples, 0.0, 4.0);
  CHECK(r.kappa_star == Catch::Approx(1.0).margin(1e-6));
  CHECK(r.kappa_star > 1.0);  // upper bracket end stays strictly supercritical
  CHECK(r.margin_at_star > tol::strictness);
  CHECK(r.margin_monotone_on_grid);
  REQUIRE(r.t_kappa.has_value());
  // kappa(t) = t, so the threshold time equals the threshold level.
  CHECK(*r.t_kappa == Catch::Approx(r.kappa_star).margin(1e-9));
  CHECK(r.parameters["iterations"].get<int>() >= 20);

  Instance stronger = line_instance(CapabilitySchedule::linear(0.0, 1.0), 2.0, 0.5);
  ThresholdResult r2 = find_kappa_star(stronger, samples, 0.0, 4.0);
  CHECK(r2.kappa_star == Catch::Approx(2.5).margin(1e-6));
  CHECK(*r2.t_kappa == Catch::Approx(2.5).margin(1e-5));
}

TEST_CASE("threshold time is absent when the schedule never gets there", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::constant(0.5));
  ThresholdResult r = find_kappa_star(inst, line_boundary(), 0.0, 4.0);
  CHECK(r.kappa_star == Catch::Approx(1.0).margin(1e-6));
  CHECK_FALSE(r.t_kappa.has_value());
}

TEST_CASE("threshold bisection validates its bracket and preconditions", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::linear(0.0, 1.0));
  std::vector<Vector> samples = line_boundary();

  CHECK(thrown_code([&] { find_kappa_star(inst, samples, 2.0, 4.0); }) == ErrorCode::Bracket);
  CHECK(thrown_code([&] { find_kappa_star(inst, samples, 0.0, 0.5); }) == ErrorCode::Bracket);
  CHECK_THROWS_AS(find_kappa_star(inst, samples, 3.0, 1.0), Error);
  CHECK_THROWS_AS(find_kappa_star(inst, samples, -1.0, 4.0), Error);
  CHECK_THROWS_AS(find_kappa_star(inst, {}, 0.0, 4.0), Error);

  // A schedule that dips disqualifies the threshold-time read-off.
  Instance dipping = line_instance(
      CapabilitySchedule::piecewise_linear({{0.0, 0.0}, {1.0, 2.0}, {2.0, 0.5}}));
  CHECK(thrown_code([&] { find_kappa_star(dipping, samples, 0.0, 4.0); }) == ErrorCode::Config);

  // ||h|| decreasing in kappa breaks the monotonicity the bisection relies on.
  Instance shrinking(StatePartition(1, 0), vec1(0.0), SafeSet::ball(vec1(0.0), 1.0),
                     BoundaryRegion::full(), Drift::zero(1), declared_drift_bound(0.0),
                     ControlChannel(Matrix::Identity(1, 1)), 1.0,
                     EndogenousChannel::custom(
                         1, 1, [](const Vector& x, double kappa) { return x / (1.0 + kappa); }),
                     CapabilitySchedule::linear(0.0, 1.0), {Policy::zero(1, 1.0)}, Numerics{});
  CHECK(thrown_code([&] { find_kappa_star(shrinking, samples, 0.0, 4.0); }) ==
        ErrorCode::Ordering);
}

TEST_CASE("outward-positivity certificate under the opposing control", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::constant(1.5));
  std::vector<Vector> samples = line_boundary();
  Certificate gap = certify_a2(inst, samples, {1.5});
  REQUIRE(gap.verdict == Verdict::Pass);

  Certificate lemma = lemma1_certificate(inst, samples, {0.0, 0.5, 1.0}, gap);
  CHECK(lemma.check_id == "Lemma1");
  CHECK(lemma.verdict == Verdict::Pass);
  // Worst outward velocity: kappa - u_max = 0.5 at every sampled time.
  CHECK(lemma.evidence["min_margin"].get<double>() == Catch::Approx(0.5).margin(1e-9));
  CHECK(lemma.margins.size() == 3);  // worst sample per grid time
  for (const MarginSample& m : lemma.margins) {
    CHECK(m.margin == Catch::Approx(0.5).margin(1e-9));
    CHECK(m.inward_authority == Catch::Approx(1.0).margin(1e-9));
  }

  // Pointwise drift enters the velocity directly, not through M_f: with
  // f = -0.3 x and kappa = 2 the outward rate is 2 - 1 - 0.3 = 0.7.
  Matrix a(1, 1);
  a << -0.3;
  Instance drifting(StatePartition(1, 0), vec1(0.0), SafeSet::ball(vec1(0.0), 1.0),
                    BoundaryRegion::full(), Drift::linear(a), declared_drift_bound(0.33),
                    ControlChannel(Matrix::Identity(1, 1)), 1.0,
                    EndogenousChannel::linear_gain(1, 1.0), CapabilitySchedule::constant(2.0),
                    {Policy::zero(1, 1.0)}, Numerics{});
  Certificate drift_gap = certify_a2(drifting, samples, {2.0});
  REQUIRE(drift_gap.verdict == Verdict::Pass);  // margin 2 - 1.33 = 0.67
  Certificate drift_lemma = lemma1_certificate(drifting, samples, {0.0, 1.0}, drift_gap);
  CHECK(drift_lemma.verdict == Verdict::Pass);
  CHECK(drift_lemma.evidence["min_margin"].get<double>() == Catch::Approx(0.7).margin(1e-9));
}

TEST_CASE("outward-positivity requires a matching passed gap certificate", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::constant(1.5));
  std::vector<Vector> samples = line_boundary();

  Certificate failed = certify_a2(inst, samples, {1.0});
  REQUIRE(failed.verdict == Verdict::Fail);
  CHECK(thrown_code([&] { lemma1_certificate(inst, samples, {0.0, 1.0}, failed); }) ==
        ErrorCode::Ordering);

  Certificate wrong_id = certify_a2(inst, samples, {1.5});
  wrong_id.check_id = "A1";
  CHECK(thrown_code([&] { lemma1_certificate(inst, samples, {0.0, 1.0}, wrong_id); }) ==
        ErrorCode::Ordering);

  // Gap certified on one sample set cannot back a claim about another.
  Certificate gap = certify_a2(inst, samples, {1.5});
  CHECK(thrown_code([&] { lemma1_certificate(inst, {vec1(1.0)}, {0.0, 1.0}, gap); }) ==
        ErrorCode::Ordering);

  CHECK_THROWS_AS(lemma1_certificate(inst, samples, {}, gap), Error);
  CHECK_THROWS_AS(lemma1_certificate(inst, samples, {1.0, 0.0}, gap), Error);
}

TEST_CASE("no admissible control beats the opposing extremal", "[supercritical]") {
  // Non-trivial input matrix on the disk: the lemma margin computed with the
  // restoring-optimal extremal must lower-bound the outward velocity under any
  // admissible control.
  Matrix b(2, 2);
  b << 1.0, 0.3, 0.0, 1.0;
  Instance inst(StatePartition(2, 0), vec2(0.0, 0.0), SafeSet::ball(vec2(0.0, 0.0), 1.0),
                BoundaryRegion::full(), Drift::zero(2), declared_drift_bound(0.0),
                ControlChannel(b), 1.5, EndogenousChannel::linear_gain(2, 1.0),
                CapabilitySchedule::constant(4.0), {Policy::zero(2, 1.5)}, Numerics{});

  std::vector<Vector> samples = inst.gamma_samples(16, "gamma-samples");
  SplitRng rng(derive_seed(9001, "lemma-dominance"));
  const double kappa = 4.0;

  for (const Vector& point : samples) {
    Vector normal = inst.safe_set.outward_normal(point);
    Vector u_star = restoring_optimal_control(inst.control, normal, inst.control_authority);
    double base = inst.endogenous.effect(point, kappa).dot(normal);
    double extremal_rate = base + inst.control.apply(u_star).dot(normal);
    CHECK(extremal_rate > 0.0);

    for (int trial = 0; trial < 100; ++trial) {
      Vector u(2);
      u << rng.gaussian(), rng.gaussian();
      double effect = inst.control.apply(u).norm();
      if (effect > tol::projection_floor)
        u *= rng.uniform(0.0, 1.0) * inst.control_authority / effect;
      double rate = base + inst.control.apply(u).dot(normal);
      CHECK(rate >= extremal_rate - 1e-9);
    }
  }
}

TEST_CASE("gap and threshold artifacts reproduce bit for bit", "[supercritical]") {
  Instance inst = line_instance(CapabilitySchedule::linear(0.0, 1.0));
  std::vector<Vector> samples = inst.gamma_samples(24, "gamma-samples");
  CHECK(samples.size() == 24);

  std::string gap_once = to_json(certify_a2(inst, samples, {1.2, 2.0, 5.0})).dump();
  std::string gap_again = to_json(certify_a2(inst, samples, {1.2, 2.0, 5.0})).dump();
  CHECK(gap_once == gap_again);

  ThresholdResult r1 = find_kappa_star(inst, samples, 0.0, 4.0);
  ThresholdResult r2 = find_kappa_star(inst, samples, 0.0, 4.0);
  CHECK(r1.kappa_star == r2.kappa_star);
  CHECK(r1.parameters.dump() == r2.parameters.dump());

  Certificate gap = certify_a2(inst, samples, {1.2, 2.0, 5.0});
  std::string lemma_once = to_json(lemma1_certificate(inst, samples, {0.0, 1.0, 2.0}, gap)).dump();
  std::string lemma_again = to_json(lemma1_certificate(inst, samples, {0.0, 1.0, 2.0}, gap)).dump();
  CHECK(lemma_once == lemma_again);
}
