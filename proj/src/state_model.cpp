#include "invlab/state_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace invlab {

StatePartition::StatePartition(int n_, int n_env_) : n(n_), n_env(n_env_) {
  if (n < 1) fail(ErrorCode::Config, "state dimension must be at least 1");
  if (n_env < 0 || n_env > n) {
    fail(ErrorCode::Config, "environment block size must lie in [0, n]");
  }
}

std::pair<Vector, Vector> split_internal(const Vector& x, const StatePartition& p) {
  require_dimension(x, p.n, "state");
  return {x.head(p.n_env), x.tail(p.internal_size())};
}

CapabilitySchedule CapabilitySchedule::constant(double level) {
  if (!(level >= 0.0)) fail(ErrorCode::Config, "capability level must be non-negative");
  return CapabilitySchedule(Kind::Constant, level, 0.0, 0.0);
}

CapabilitySchedule CapabilitySchedule::linear(double initial, double rate) {
  if (!(initial >= 0.0)) fail(ErrorCode::Config, "capability initial value must be non-negative");
  if (!(rate >= 0.0)) fail(ErrorCode::Config, "capability rate must be non-negative");
  return CapabilitySchedule(Kind::Linear, initial, rate, 0.0);
}

CapabilitySchedule CapabilitySchedule::logistic(double limit, double growth, double midpoint) {
  if (!(limit >= 0.0)) fail(ErrorCode::Config, "logistic limit must be non-negative");
  if (!(growth >= 0.0)) fail(ErrorCode::Config, "logistic growth must be non-negative");
  if (!std::isfinite(midpoint)) fail(ErrorCode::Config, "logistic midpoint must be finite");
  return CapabilitySchedule(Kind::Logistic, limit, growth, midpoint);
}

CapabilitySchedule CapabilitySchedule::piecewise_linear(std::vector<std::array<double, 2>> knots) {
  if (knots.empty()) fail(ErrorCode::Config, "piecewise schedule needs at least one knot");
  for (size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i][0]) || !std::isfinite(knots[i][1])) {
      fail(ErrorCode::Config, "piecewise knots must be finite");
    }
    if (!(knots[i][1] >= 0.0)) fail(ErrorCode::Config, "capability values must be non-negative");
    if (!(knots[i][0] >= 0.0)) fail(ErrorCode::Config, "piecewise knot times must be non-negative");
    if (i > 0 && !(knots[i][0] > knots[i - 1][0])) {
      fail(ErrorCode::Config, "piecewise knot times must be strictly increasing");
    }
  }
  CapabilitySchedule s(Kind::PiecewiseLinear, 0.0, 0.0, 0.0);
  s.knots_ = std::move(knots);
  return s;
}

double CapabilitySchedule::at(double t) const {
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "capability schedules are defined for t >= 0");
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::Linear:
      return a_ + b_ * t;
    case Kind::Logistic:
      return a_ / (1.0 + std::exp(-b_ * (t - c_)));
    case Kind::PiecewiseLinear: {
      if (t <= knots_.front()[0]) return knots_.front()[1];
      if (t >= knots_.back()[0]) return knots_.back()[1];
      size_t hi = 1;
      while (knots_[hi][0] < t) ++hi;
      const auto& a = knots_[hi - 1];
      const auto& b = knots_[hi];
      double w = (t - a[0]) / (b[0] - a[0]);
      return a[1] + w * (b[1] - a[1]);
    }
  }
  fail(ErrorCode::Config, "unreachable schedule kind");
}

double CapabilitySchedule::supremum() const {
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::Linear:
      return b_ > 0.0 ? std::numeric_limits<double>::infinity() : a_;
    case Kind::Logistic:
      return b_ > 0.0 ? a_ : at(0.0);
    case Kind::PiecewiseLinear: {
      double best = 0.0;
      for (const auto& k : knots_) best = std::max(best, k[1]);
      return best;
    }
  }
  fail(ErrorCode::Config, "unreachable schedule kind");
}

std::optional<double> CapabilitySchedule::first_time_at_least(double level) const {
  if (!std::isfinite(level)) fail(ErrorCode::Domain, "level must be finite");
  if (at(0.0) >= level) return 0.0;
  switch (kind_) {
    case Kind::Constant:
      return std::nullopt;
    case Kind::Linear:
      if (b_ <= 0.0) return std::nullopt;
      return (level - a_) / b_;
    case Kind::Logistic: {
      // at(0) < level here, so level > 0 and growth > 0 are required to climb.
      if (b_ <= 0.0 || level >= a_) return std::nullopt;
      double guess = c_ - std::log(a_ / level - 1.0) / b_;
      double lo = 0.0;
      double hi = std::max(guess, 0.0) + 1.0;
      while (at(hi) < level) {
        hi = hi * 2.0 + 1.0;
        if (hi > 1e18) return std::nullopt;
      }
      for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        double mid = 0.5 * (lo + hi);
        if (at(mid) >= level) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    case Kind::PiecewiseLinear: {
      // at(0) < level here, and values before the first knot clamp to the
      // first knot value, so the first crossing lies inside a knot segment.
      for (size_t i = 1; i < knots_.size(); ++i) {
        double tprev = knots_[i - 1][0], vprev = knots_[i - 1][1];
        double tcur = knots_[i][0], vcur = knots_[i][1];
        if (vcur >= level) {
          double w = (level - vprev) / (vcur - vprev);
          return tprev + w * (tcur - tprev);
        }
      }
      return std::nullopt;
    }
  }
  fail(ErrorCode::Config, "unreachable schedule kind");
}

MonotoneReport verify_schedule_monotone(const CapabilitySchedule& schedule,
                                        const std::vector<double>& grid) {
  if (grid.size() < 2) fail(ErrorCode::Config, "monotonicity audit needs at least two grid times");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) fail(ErrorCode::Config, "grid times must be non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      fail(ErrorCode::Config, "grid times must be strictly increasing");
    }
  }
  MonotoneReport report;
  double prev = schedule.at(grid[0]);
  for (size_t i = 1; i < grid.size(); ++i) {
    double cur = schedule.at(grid[i]);
    if (cur < prev - tol::monotone_slack) {
      report.monotone = false;
      report.first_violation = std::make_pair(grid[i - 1], grid[i]);
      return report;
    }
    prev = cur;
  }
  return report;
}

}  // namespace invlab
