#include "invlab/safe_set.hpp"

#include <cmath>

namespace invlab {

namespace {

Vector unit_direction(SplitRng& rng, int n) {
  // Retry on near-zero draws so normalization stays well conditioned.
  for (;;) {
    Vector v = rng.gaussian_vector(n);
    double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

}  // namespace

SafeSet SafeSet::ball(Vector center, double radius) {
  if (center.size() < 1) fail(ErrorCode::Config, "ball center must have dimension >= 1");
  if (!all_finite(center)) fail(ErrorCode::Config, "ball center must be finite");
  if (!(radius > 0.0)) fail(ErrorCode::Config, "ball radius must be positive");
  SafeSet s;
  s.kind_ = Kind::Ball;
  s.dimension_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

SafeSet SafeSet::ellipsoid(Vector center, Vector semi_axes) {
  if (center.size() < 1) fail(ErrorCode::Config, "ellipsoid center must have dimension >= 1");
  if (center.size() != semi_axes.size()) {
    fail(ErrorCode::Dimension, "ellipsoid center and semi-axes must share a dimension");
  }
  if (!all_finite(center) || !all_finite(semi_axes)) {
    fail(ErrorCode::Config, "ellipsoid parameters must be finite");
  }
  for (Eigen::Index i = 0; i < semi_axes.size(); ++i) {
    if (!(semi_axes[i] > 0.0)) fail(ErrorCode::Config, "ellipsoid semi-axes must be positive");
  }
  SafeSet s;
  s.kind_ = Kind::Ellipsoid;
  s.dimension_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.semi_axes_ = std::move(semi_axes);
  return s;
}

SafeSet SafeSet::pnorm_ball(Vector center, double radius, int p) {
  if (center.size() < 1) fail(ErrorCode::Config, "p-norm ball center must have dimension >= 1");
  if (!all_finite(center)) fail(ErrorCode::Config, "p-norm ball center must be finite");
  if (!(radius > 0.0)) fail(ErrorCode::Config, "p-norm ball radius must be positive");
  if (p < 2 || p % 2 != 0) fail(ErrorCode::Config, "p-norm ball needs an even p >= 2");
  SafeSet s;
  s.kind_ = Kind::PNormBall;
  s.dimension_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  s.pnorm_ = p;
  return s;
}

SafeSet SafeSet::custom(int dimension, LevelFn level, GradientFn gradient,
                        BoundarySampleFn boundary_sampler, Vector interior_point,
                        bool declared_compact, std::string description) {
  if (dimension < 1) fail(ErrorCode::Config, "custom set dimension must be >= 1");
  if (!level || !gradient) fail(ErrorCode::Config, "custom set needs level and gradient callables");
  require_dimension(interior_point, dimension, "custom set interior point");
  SafeSet s;
  s.kind_ = Kind::Custom;
  s.dimension_ = dimension;
  s.center_ = std::move(interior_point);
  s.level_ = std::move(level);
  s.gradient_ = std::move(gradient);
  s.boundary_sampler_ = std::move(boundary_sampler);
  s.declared_compact_ = declared_compact;
  s.description_ = std::move(description);
  return s;
}

double SafeSet::level(const Vector& x) const {
  require_dimension(x, dimension_, "state");
  if (!all_finite(x)) fail(ErrorCode::Domain, "level evaluated at a non-finite state");
  switch (kind_) {
    case Kind::Ball:
      return (x - center_).squaredNorm() - radius_ * radius_;
    case Kind::Ellipsoid: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        double z = (x[i] - center_[i]) / semi_axes_[i];
        sum += z * z;
      }
      return sum - 1.0;
    }
    case Kind::PNormBall: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        double z = (x[i] - center_[i]) / radius_;
        sum += std::pow(z, pnorm_);
      }
      return sum - 1.0;
    }
    case Kind::Custom:
      return level_(x);
  }
  fail(ErrorCode::Config, "unreachable safe set kind");
}

Vector SafeSet::gradient(const Vector& x) const {
  require_dimension(x, dimension_, "state");
  switch (kind_) {
    case Kind::Ball:
      return 2.0 * (x - center_);
    case Kind::Ellipsoid: {
      Vector g(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        g[i] = 2.0 * (x[i] - center_[i]) / (semi_axes_[i] * semi_axes_[i]);
      }
      return g;
    }
    case Kind::PNormBall: {
      Vector g(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        double z = (x[i] - center_[i]) / radius_;
        g[i] = static_cast<double>(pnorm_) / radius_ * std::pow(z, pnorm_ - 1);
      }
      return g;
    }
    case Kind::Custom:
      return gradient_(x);
  }
  fail(ErrorCode::Config, "unreachable safe set kind");
}

Region SafeSet::classify(const Vector& x) const {
  double g = level(x);
  if (g > tol::boundary_band) return Region::Exterior;
  if (g < -tol::boundary_band) return Region::Interior;
  return Region::Boundary;
}

Vector SafeSet::outward_normal(const Vector& x) const {
  double g = level(x);
  if (std::abs(g) > 1e-6) {
    fail(ErrorCode::Domain, "outward normal requested away from the boundary (|g| = " +
                                format_double(std::abs(g)) + ")");
  }
  Vector grad = gradient(x);
  double norm = grad.norm();
  if (norm <= tol::gradient_floor) {
    fail(ErrorCode::Domain, "degenerate boundary point: gradient norm below 1e-9");
  }
  return grad / norm;
}

Vector SafeSet::sample_boundary_point(SplitRng& rng) const {
  switch (kind_) {
    case Kind::Ball:
      return center_ + radius_ * unit_direction(rng, dimension_);
    case Kind::Ellipsoid: {
      Vector u = unit_direction(rng, dimension_);
      Vector x = center_;
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += semi_axes_[i] * u[i];
      return x;
    }
    case Kind::PNormBall: {
      Vector u = unit_direction(rng, dimension_);
      double pn = 0.0;
      for (Eigen::Index i = 0; i < u.size(); ++i) pn += std::pow(std::abs(u[i]), pnorm_);
      pn = std::pow(pn, 1.0 / pnorm_);
      return center_ + (radius_ / pn) * u;
    }
    case Kind::Custom:
      if (!boundary_sampler_) {
        fail(ErrorCode::Config, "custom safe set has no boundary sampler");
      }
      return boundary_sampler_(rng);
  }
  fail(ErrorCode::Config, "unreachable safe set kind");
}

std::string SafeSet::describe() const {
  switch (kind_) {
    case Kind::Ball:
      return "ball(radius " + format_double(radius_) + ")";
    case Kind::Ellipsoid:
      return "ellipsoid";
    case Kind::PNormBall:
      return "pnorm-ball(p " + std::to_string(pnorm_) + ", radius " + format_double(radius_) + ")";
    case Kind::Custom:
      return description_.empty() ? std::string("custom") : description_;
  }
  return "unknown";
}

BoundaryRegion BoundaryRegion::full() {
  BoundaryRegion r;
  r.predicate = [](const Vector&) { return true; };
  r.description = "full boundary";
  return r;
}

BoundaryRegion BoundaryRegion::halfspace(Vector coeffs, double offset) {
  if (coeffs.size() < 1) fail(ErrorCode::Config, "halfspace coefficients must be non-empty");
  if (!all_finite(coeffs) || !std::isfinite(offset)) {
    fail(ErrorCode::Config, "halfspace parameters must be finite");
  }
  if (coeffs.norm() <= 0.0) fail(ErrorCode::Config, "halfspace coefficients must be non-zero");
  BoundaryRegion r;
  Vector a = std::move(coeffs);
  r.predicate = [a, offset](const Vector& x) {
    require_dimension(x, a.size(), "boundary point");
    return a.dot(x) > offset;
  };
  r.description = "halfspace <a,x> > " + format_double(offset);
  return r;
}

std::vector<Vector> sample_boundary_region(const SafeSet& set, const BoundaryRegion& region,
                                           int count, uint64_t seed) {
  if (count < 1) fail(ErrorCode::Config, "boundary sample count must be >= 1");
  if (!region.predicate) fail(ErrorCode::Config, "boundary region has no predicate");
  SplitRng rng(seed);
  std::vector<Vector> points;
  points.reserve(count);
  long attempts = 0;
  while (static_cast<int>(points.size()) < count) {
    if (++attempts > tol::sampler_budget) {
      fail(ErrorCode::EmptyRegion,
           "boundary region sampling exhausted " + std::to_string(tol::sampler_budget) +
               " attempts; the region appears to have zero measure (" + region.description + ")");
    }
    Vector x = set.sample_boundary_point(rng);
    if (std::abs(set.level(x)) > tol::boundary_band) continue;
    if (!region.predicate(x)) continue;
    points.push_back(std::move(x));
  }
  return points;
}

Vector sample_interior_point(const SafeSet& set, SplitRng& rng) {
  Vector b = set.sample_boundary_point(rng);
  double rho = std::pow(rng.uniform01(), 1.0 / set.dimension());
  if (rho >= 1.0) rho = std::nextafter(1.0, 0.0);
  return set.center() + rho * (b - set.center());
}

DriftBound declared_drift_bound(double value) {
  if (!(value >= 0.0)) fail(ErrorCode::Config, "declared drift bound must be non-negative");
  DriftBound b;
  b.value = value;
  b.method = DriftBound::Method::Declared;
  return b;
}

DriftBound estimate_drift_bound(const FieldFn& field, const SafeSet& set,
                                const std::vector<double>& time_grid, int sample_count,
                                uint64_t seed, double safety_factor) {
  if (!field) fail(ErrorCode::Config, "drift bound estimation needs a field");
  if (time_grid.empty()) fail(ErrorCode::Config, "drift bound estimation needs a non-empty time grid");
  if (sample_count < 1) fail(ErrorCode::Config, "drift bound estimation needs sample_count >= 1");
  if (!(safety_factor >= 1.0)) fail(ErrorCode::Config, "drift bound safety factor must be >= 1");
  SplitRng rng(seed);
  double max_norm = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    Vector x = sample_interior_point(set, rng);
    for (double t : time_grid) {
      Vector f = field(x, t);
      if (!all_finite(f)) {
        fail(ErrorCode::InvalidField, "drift evaluated to a non-finite value during bound estimation");
      }
      max_norm = std::max(max_norm, f.norm());
    }
  }
  DriftBound b;
  b.value = safety_factor * max_norm;
  b.method = DriftBound::Method::Sampled;
  b.sample_count = static_cast<long>(sample_count) * static_cast<long>(time_grid.size());
  b.safety_factor = safety_factor;
  return b;
}

}  // namespace invlab
