#include <catch2/catch_amalgamated.hpp>

#include "invlab/channels.hpp"
#include "invlab/common.hpp"
#include "invlab/policies.hpp"
#include "invlab/safe_set.hpp"
#include "invlab/state_model.hpp"

#include <cmath>
#include <vector>

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

}  // namespace

TEST_CASE("restoring extremal closed form", "[policies]") {
  ControlChannel identity2(Matrix::Identity(2, 2));
  Vector u = restoring_optimal_control(identity2, vec2(0.0, 1.0), 1.0);
  Vector bu = identity2.apply(u);
  CHECK(bu(0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(bu(1) == Catch::Approx(-1.0).margin(1e-12));

  ControlChannel scalar(Matrix::Identity(1, 1));
  CHECK(restoring_optimal_control(scalar, vec1(1.0), 2.0)(0) ==
        Catch::Approx(-2.0).margin(1e-12));

  // B spans only the first axis, the normal is orthogonal to it
  Matrix b(2, 1);
  b << 1.0, 0.0;
  ControlChannel rank1(b);
  CHECK(restoring_optimal_control(rank1, vec2(0.0, 1.0), 1.0).norm() == 0.0);

  CHECK_THROWS_AS(restoring_optimal_control(identity2, vec2(0.0, 2.0), 1.0), Error);
}

TEST_CASE("no admissible control beats the extremal", "[policies]") {
  SplitRng rng(derive_seed(77, "extremality"));
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform01() * 2.0);  // 2 or 3
    int m = 1 + static_cast<int>(rng.uniform01() * 3.0);  // 1..3
    Matrix b(n, m);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < m; ++c) b(r, c) = rng.gaussian();
    if (b.norm() < 1e-6) continue;
    ControlChannel control(b);
    Vector normal = rng.gaussian_vector(n);
    if (normal.norm() < 1e-9) continue;
    normal.normalize();
    double u_max = rng.uniform(0.5, 3.0);

    Vector u_star = restoring_optimal_control(control, normal, u_max);
    double best = control.apply(u_star).dot(normal);

    for (int k = 0; k < 5; ++k) {
      Vector u = rng.gaussian_vector(m);
      double authority = control.apply(u).norm();
      if (authority > 1e-12) u *= u_max / authority;  // onto the bound sphere
      CHECK(control.apply(u).dot(normal) >= best - 1e-9);
    }
  }
}

TEST_CASE("zero and constant policies", "[policies]") {
  ControlChannel scalar(Matrix::Identity(1, 1));
  ChannelEnv env;
  env.control = &scalar;
  HistorySummary history;

  Policy zero = Policy::zero(1, 1.0);
  for (double t : {0.0, 1.0, 7.5}) {
    ControlSample cs = zero.evaluate(t, vec1(0.4), history, env);
    CHECK(cs.u.norm() == 0.0);
    CHECK_FALSE(cs.clipped);
  }
  CHECK(zero.provably_zero());

  Policy small = Policy::constant(vec1(0.5), 1.0);
  ControlSample cs = small.evaluate(0.0, vec1(0.0), history, env);
  CHECK(cs.u(0) == 0.5);
  CHECK_FALSE(cs.clipped);

  Policy big = Policy::constant(vec1(3.0), 1.0);
  ControlSample clipped = big.evaluate(0.0, vec1(0.0), history, env);
  CHECK(clipped.u(0) == Catch::Approx(1.0).margin(1e-12));  // radial clip to the bound
  CHECK(clipped.clipped);
  CHECK(clipped.raw_norm == Catch::Approx(3.0));
  CHECK(clipped.effective_norm == Catch::Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(zero.evaluate(-1.0, vec1(0.0), history, env), Error);
}

TEST_CASE("restoring policy cancels and then saturates", "[policies]") {
  auto drift = Drift::zero(1);
  ControlChannel scalar(Matrix::Identity(1, 1));
  auto channel = EndogenousChannel::linear_gain(1, 1.0);
  auto set = SafeSet::ball(vec1(0.0), 1.0);
  auto low = CapabilitySchedule::constant(0.5);
  auto high = CapabilitySchedule::constant(5.0);

  ChannelEnv env;
  env.drift = &drift;
  env.control = &scalar;
  env.endogenous = &channel;
  env.safe_set = &set;
  env.capability = &low;
  HistorySummary history;

  Policy restoring = Policy::restoring_optimal(1, 1.0);

  // subcritical interior point: exact cancellation of the outward push
  ControlSample hold = restoring.evaluate(0.0, vec1(0.9), history, env);
  CHECK(hold.u(0) == Catch::Approx(-0.45).margin(1e-12));
  CHECK_FALSE(hold.clipped);

  // supercritical boundary point: clamp active, equal to the extremal
  env.capability = &high;
  ControlSample saturated = restoring.evaluate(0.0, vec1(1.0), history, env);
  Vector extremal = restoring_optimal_control(scalar, vec1(1.0), 1.0);
  CHECK(saturated.u(0) == Catch::Approx(extremal(0)).margin(1e-12));
  CHECK(saturated.effective_norm == Catch::Approx(1.0).margin(1e-12));
  CHECK_FALSE(saturated.clipped);  // the clamp is the policy's own, not the clipping layer

  // inward-pointing field draws no control at all
  auto inward = EndogenousChannel::target_seeking(vec1(0.0));
  env.endogenous = &inward;
  CHECK(restoring.evaluate(0.0, vec1(0.9), history, env).u.norm() == 0.0);
}

TEST_CASE("aggregation sums children and bounds", "[policies]") {
  CHECK(Policy::aggregate({Policy::zero(1, 1.0), Policy::zero(1, 2.0)}).bound() == 3.0);

  ControlChannel scalar(Matrix::Identity(1, 1));
  ChannelEnv env;
  env.control = &scalar;
  HistorySummary history;
  Policy two_zeros = Policy::aggregate({Policy::zero(1, 1.0), Policy::zero(1, 1.0)});
  CHECK(two_zeros.evaluate(0.3, vec1(0.2), history, env).u.norm() == 0.0);
  CHECK(two_zeros.provably_zero());

  // three saturated restoring children attain the summed bound
  auto drift = Drift::zero(2);
  ControlChannel identity2(Matrix::Identity(2, 2));
  auto channel = EndogenousChannel::linear_gain(2, 1.0);
  auto set = SafeSet::ball(vec2(0.0, 0.0), 1.0);
  auto high = CapabilitySchedule::constant(5.0);
  ChannelEnv env2;
  env2.drift = &drift;
  env2.control = &identity2;
  env2.endogenous = &channel;
  env2.safe_set = &set;
  env2.capability = &high;

  Policy triple = Policy::aggregate({Policy::restoring_optimal(2, 1.0),
                                     Policy::restoring_optimal(2, 1.0),
                                     Policy::restoring_optimal(2, 1.0)});
  CHECK(triple.bound() == 3.0);
  ControlSample cs = triple.evaluate(0.0, vec2(0.0, 1.0), history, env2);
  Vector bu = identity2.apply(cs.u);
  CHECK(bu(0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(bu(1) == Catch::Approx(-3.0).margin(1e-12));
  CHECK(cs.effective_norm == Catch::Approx(3.0).margin(1e-12));
  CHECK_FALSE(cs.clipped);

  CHECK_THROWS_AS(Policy::aggregate({}), Error);
}

TEST_CASE("bound audit separates raw and clipped views", "[policies]") {
  ControlChannel scalar(Matrix::Identity(1, 1));
  ChannelEnv env;
  env.control = &scalar;
  std::vector<Vector> states = {vec1(0.0), vec1(0.5), vec1(-0.9)};
  auto times = linspace(0.0, 1.0, 3);

  BoundAudit zero = verify_policy_bound(Policy::zero(1, 1.0), env, states, times);
  CHECK(zero.within_bound);
  CHECK(zero.max_effective_norm == 0.0);
  CHECK(zero.clip_count == 0);

  auto drift = Drift::zero(1);
  auto channel = EndogenousChannel::linear_gain(1, 1.0);
  auto set = SafeSet::ball(vec1(0.0), 1.0);
  auto high = CapabilitySchedule::constant(5.0);
  env.drift = &drift;
  env.endogenous = &channel;
  env.safe_set = &set;
  env.capability = &high;
  BoundAudit restoring =
      verify_policy_bound(Policy::restoring_optimal(1, 1.0), env, {vec1(0.9), vec1(1.0)}, times);
  CHECK(restoring.within_bound);
  CHECK(restoring.max_effective_norm == Catch::Approx(1.0).margin(1e-12));

  // adversarial double demanding ten times its authority
  Policy wild = Policy::custom("wild", 1, 1.0,
                               [](double, const Vector&, const HistorySummary&) {
                                 return Vector(vec1(10.0));
                               });
  BoundAudit audited = verify_policy_bound(wild, env, states, times);
  CHECK_FALSE(audited.raw_within_bound);
  CHECK(audited.within_bound);
  CHECK(audited.max_raw_norm == Catch::Approx(10.0));
  CHECK(audited.max_effective_norm <= 1.0 + 1e-12);
  CHECK(audited.clip_count == audited.evaluations);
}
