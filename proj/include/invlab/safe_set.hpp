#pragma once

#include "invlab/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace invlab {

enum class Region { Interior, Boundary, Exterior };

// Compact safe set S = {x : g(x) <= 0} with smooth level function g.
// Built-in kinds are compact by construction; custom sets carry a caller
// declaration of compactness that is echoed in reports, never proven.
class SafeSet {
 public:
  enum class Kind { Ball, Ellipsoid, PNormBall, Custom };
  using LevelFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using BoundarySampleFn = std::function<Vector(SplitRng&)>;

  // g(x) = ||x - c||^2 - r^2
  static SafeSet ball(Vector center, double radius);
  // g(x) = sum_i ((x_i - c_i) / a_i)^2 - 1
  static SafeSet ellipsoid(Vector center, Vector semi_axes);
  // g(x) = sum_i ((x_i - c_i) / r)^p - 1, p even
  static SafeSet pnorm_ball(Vector center, double radius, int p);
  // Sets must be star-shaped about interior_point for the interior sampler.
  static SafeSet custom(int dimension, LevelFn level, GradientFn gradient,
                        BoundarySampleFn boundary_sampler, Vector interior_point,
                        bool declared_compact, std::string description);

  int dimension() const { return dimension_; }
  Kind kind() const { return kind_; }

  double level(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  // Interior: g < -band, Boundary: |g| <= band, Exterior: g > band.
  Region classify(const Vector& x) const;
  // Unit outward normal grad g / ||grad g||. Requires |g(x)| <= 1e-6 and a
  // non-degenerate gradient.
  Vector outward_normal(const Vector& x) const;
  Vector sample_boundary_point(SplitRng& rng) const;

  const Vector& center() const { return center_; }
  bool declared_compact() const { return declared_compact_; }
  std::string describe() const;

  double radius() const { return radius_; }
  const Vector& semi_axes() const { return semi_axes_; }
  int pnorm() const { return pnorm_; }

 private:
  SafeSet() = default;
  Kind kind_ = Kind::Ball;
  int dimension_ = 0;
  Vector center_;
  double radius_ = 0.0;
  Vector semi_axes_;
  int pnorm_ = 2;
  LevelFn level_;
  GradientFn gradient_;
  BoundarySampleFn boundary_sampler_;
  bool declared_compact_ = true;
  std::string description_;
};

// Subset of the boundary selected by a predicate on boundary points.
struct BoundaryRegion {
  std::function<bool(const Vector&)> predicate;
  std::string description;

  static BoundaryRegion full();
  // Keeps boundary points with <coeffs, x> > offset.
  static BoundaryRegion halfspace(Vector coeffs, double offset);
};

// Rejection sampling on the boundary. Identical (seed, count) gives an
// identical point list. Exhausting the attempt budget (1e6) raises an
// empty-region error.
std::vector<Vector> sample_boundary_region(const SafeSet& set, const BoundaryRegion& region,
                                           int count, uint64_t seed);

Vector sample_interior_point(const SafeSet& set, SplitRng& rng);

struct DriftBound {
  double value = 0.0;
  enum class Method { Declared, Sampled } method = Method::Declared;
  long sample_count = 0;
  double safety_factor = 1.0;
};

DriftBound declared_drift_bound(double value);

using FieldFn = std::function<Vector(const Vector&, double)>;

// value = safety_factor * max ||field(x, t)|| over interior samples x and the
// time grid. A sampled surrogate for the true supremum; the method and counts
// are recorded so reports can say so.
DriftBound estimate_drift_bound(const FieldFn& field, const SafeSet& set,
                                const std::vector<double>& time_grid, int sample_count,
                                uint64_t seed, double safety_factor = 1.1);

}  // namespace invlab
