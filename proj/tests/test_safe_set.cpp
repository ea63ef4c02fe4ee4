#include <catch2/catch_amalgamated.hpp>

#include "invlab/common.hpp"
#include "invlab/safe_set.hpp"

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

std::vector<SafeSet> builtin_sets() {
  return {
      SafeSet::ball(vec2(0.0, 0.0), 1.0),
      SafeSet::ball(vec2(0.5, -1.0), 2.0),
      SafeSet::ellipsoid(vec2(0.0, 0.0), vec2(1.0, 2.0)),
      SafeSet::pnorm_ball(vec2(0.0, 0.0), 1.0, 4),
      SafeSet::pnorm_ball(vec2(1.0, 1.0), 0.5, 6),
  };
}

}  // namespace

TEST_CASE("level function closed forms", "[safe_set]") {
  auto interval = SafeSet::ball(vec1(0.0), 1.0);
  CHECK(interval.level(vec1(0.5)) == -0.75);
  CHECK(interval.level(vec1(1.0)) == 0.0);

  auto ellipse = SafeSet::ellipsoid(vec2(0.0, 0.0), vec2(1.0, 2.0));
  CHECK(ellipse.level(vec2(0.0, 2.0)) == 0.0);

  CHECK_THROWS_AS(interval.level(vec2(0.0, 0.0)), Error);
}

TEST_CASE("region classification", "[safe_set]") {
  auto disk = SafeSet::ball(vec2(0.0, 0.0), 1.0);
  CHECK(disk.classify(vec2(0.0, 0.0)) == Region::Interior);
  CHECK(disk.classify(vec2(1.0, 0.0)) == Region::Boundary);
  CHECK(disk.classify(vec2(2.0, 0.0)) == Region::Exterior);
}

TEST_CASE("outward normals at axis points", "[safe_set]") {
  auto disk = SafeSet::ball(vec2(0.0, 0.0), 1.0);
  Vector n = disk.outward_normal(vec2(0.0, 1.0));
  CHECK(n(0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(n(1) == Catch::Approx(1.0).margin(1e-12));

  auto interval = SafeSet::ball(vec1(0.0), 1.0);
  CHECK(interval.outward_normal(vec1(1.0))(0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(interval.outward_normal(vec1(-1.0))(0) == Catch::Approx(-1.0).margin(1e-12));

  // analytic gradient (2, 0) normalized
  auto ellipse = SafeSet::ellipsoid(vec2(0.0, 0.0), vec2(1.0, 2.0));
  Vector ne = ellipse.outward_normal(vec2(1.0, 0.0));
  CHECK(ne(0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(ne(1) == Catch::Approx(0.0).margin(1e-12));

  CHECK_THROWS_AS(disk.outward_normal(vec2(0.5, 0.0)), Error);  // not a boundary point
}

TEST_CASE("normals match finite differences and point outward", "[safe_set]") {
  for (const SafeSet& set : builtin_sets()) {
    std::vector<Vector> pts =
        sample_boundary_region(set, BoundaryRegion::full(), 100, derive_seed(11, "fd-check"));
    for (const Vector& x : pts) {
      CHECK(std::abs(set.level(x)) <= tol::boundary_band);
      Vector n = set.outward_normal(x);
      CHECK(std::abs(n.norm() - 1.0) <= 1e-12);

      Vector fd(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector hi = x, lo = x;
        hi(i) += tol::fd_step;
        lo(i) -= tol::fd_step;
        fd(i) = (set.level(hi) - set.level(lo)) / (2.0 * tol::fd_step);
      }
      fd.normalize();
      CHECK((fd - n).norm() <= 1e-4);

      CHECK(set.level(x + 1e-6 * n) > set.level(x));
    }
  }
}

TEST_CASE("boundary sampling is deterministic and on the surface", "[safe_set]") {
  auto disk = SafeSet::ball(vec2(0.0, 0.0), 1.0);
  auto pts = sample_boundary_region(disk, BoundaryRegion::full(), 4, 1);
  REQUIRE(pts.size() == 4);
  for (const Vector& p : pts) CHECK(std::abs(p.norm() - 1.0) <= 1e-9);

  auto again = sample_boundary_region(disk, BoundaryRegion::full(), 4, 1);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i] == again[i]);

  auto other_seed = sample_boundary_region(disk, BoundaryRegion::full(), 4, 2);
  bool all_equal = true;
  for (std::size_t i = 0; i < pts.size(); ++i) all_equal = all_equal && pts[i] == other_seed[i];
  CHECK_FALSE(all_equal);
}

TEST_CASE("boundary region predicate filters samples", "[safe_set]") {
  auto interval = SafeSet::ball(vec1(0.0), 1.0);
  auto right = sample_boundary_region(interval, BoundaryRegion::halfspace(vec1(1.0), 0.0), 3, 5);
  REQUIRE(right.size() == 3);
  for (const Vector& p : right) CHECK(p(0) == Catch::Approx(1.0).margin(1e-9));

  auto disk = SafeSet::ball(vec2(0.0, 0.0), 1.0);
  CHECK_THROWS_AS(
      sample_boundary_region(disk, BoundaryRegion::halfspace(vec2(0.0, 1.0), 2.0), 1, 5), Error);
}

TEST_CASE("drift bound estimation", "[safe_set]") {
  auto disk = SafeSet::ball(vec2(0.0, 0.0), 1.0);
  auto grid = linspace(0.0, 1.0, 5);

  auto zero = estimate_drift_bound([](const Vector& x, double) { return Vector::Zero(x.size()); },
                                   disk, grid, 64, 3);
  CHECK(zero.value == 0.0);
  CHECK(zero.method == DriftBound::Method::Sampled);

  FieldFn contract = [](const Vector& x, double) { return Vector(-0.3 * x); };
  auto sampled = estimate_drift_bound(contract, disk, grid, 4096, 3);
  CHECK(sampled.value == Catch::Approx(0.33).epsilon(0.02));

  auto declared = declared_drift_bound(0.5);
  CHECK(declared.value == 0.5);
  CHECK(declared.method == DriftBound::Method::Declared);

  // dominance: fresh interior draws stay under the sampled bound
  SplitRng rng(derive_seed(9, "drift-dominance"));
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    Vector x = sample_interior_point(disk, rng);
    for (double t : grid)
      if (contract(x, t).norm() > sampled.value) ++violations;
  }
  CHECK(violations <= 10);
}

TEST_CASE("custom sets carry the compactness declaration", "[safe_set]") {
  auto level = [](const Vector& x) { return x.squaredNorm() - 1.0; };
  auto grad = [](const Vector& x) { return Vector(2.0 * x); };
  auto sampler = [](SplitRng& rng) {
    double angle = rng.uniform(0.0, 2.0 * M_PI);
    return vec2(std::cos(angle), std::sin(angle));
  };
  auto set = SafeSet::custom(2, level, grad, sampler, vec2(0.0, 0.0), false, "unit disk");
  CHECK_FALSE(set.declared_compact());
  CHECK(set.level(vec2(0.0, 0.0)) == -1.0);
  CHECK(set.classify(vec2(1.0, 0.0)) == Region::Boundary);
}
