#pragma once

#include "invlab/common.hpp"

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace invlab {

// Contiguous split of the state: coordinates [0, n_env) are the environment
// block, [n_env, n) the internal block.
struct StatePartition {
  int n = 1;
  int n_env = 0;

  StatePartition() = default;
  StatePartition(int n_, int n_env_);
  int internal_size() const { return n - n_env; }
};

std::pair<Vector, Vector> split_internal(const Vector& x, const StatePartition& p);

// Non-negative capability signal kappa(t) on [0, inf). Constant, linear and
// logistic forms are non-decreasing by construction; piecewise-linear is not,
// so verify_schedule_monotone exists to audit it.
class CapabilitySchedule {
 public:
  enum class Kind { Constant, Linear, Logistic, PiecewiseLinear };

  static CapabilitySchedule constant(double level);
  static CapabilitySchedule linear(double initial, double rate);
  // limit / (1 + exp(-growth * (t - midpoint)))
  static CapabilitySchedule logistic(double limit, double growth, double midpoint);
  static CapabilitySchedule piecewise_linear(std::vector<std::array<double, 2>> knots);

  double at(double t) const;

  // First t >= 0 with at(t) >= level; nullopt when the schedule never gets
  // there. Exact for constant/linear/piecewise; logistic uses the closed-form
  // inverse polished by bisection to 1e-12.
  std::optional<double> first_time_at_least(double level) const;

  double supremum() const;
  Kind kind() const { return kind_; }

  double const_level() const { return a_; }
  double lin_initial() const { return a_; }
  double lin_rate() const { return b_; }
  double log_limit() const { return a_; }
  double log_growth() const { return b_; }
  double log_midpoint() const { return c_; }
  const std::vector<std::array<double, 2>>& knots() const { return knots_; }

 private:
  CapabilitySchedule(Kind kind, double a, double b, double c)
      : kind_(kind), a_(a), b_(b), c_(c) {}
  Kind kind_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  std::vector<std::array<double, 2>> knots_;
};

struct MonotoneReport {
  bool monotone = true;
  // Adjacent grid times (t_i, t_{i+1}) of the first decrease.
  std::optional<std::pair<double, double>> first_violation;
};

MonotoneReport verify_schedule_monotone(const CapabilitySchedule& schedule,
                                        const std::vector<double>& grid);

}  // namespace invlab
