#pragma once

#include "invlab/channels.hpp"
#include "invlab/safe_set.hpp"
#include "invlab/state_model.hpp"

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace invlab {

// Aggregates of the past trajectory only. The evaluator interface carries no
// horizon or future access by shape.
struct HistorySummary {
  std::size_t samples = 0;
  double last_time = 0.0;
  double min_inward_margin = std::numeric_limits<double>::infinity();  // min of -g seen
  std::size_t clips = 0;
};

struct ControlSample {
  Vector u;
  double effective_norm = 0.0;  // ||B u|| after clipping
  double raw_norm = 0.0;        // ||B u|| before clipping
  bool clipped = false;
};

// Channels a policy may consult. control is required by every evaluation
// (the clipping layer measures ||B u||); the rest only by restoring-optimal.
struct ChannelEnv {
  const Drift* drift = nullptr;
  const ControlChannel* control = nullptr;
  const EndogenousChannel* endogenous = nullptr;
  const SafeSet* safe_set = nullptr;
  const CapabilitySchedule* capability = nullptr;
};

// u minimizing <B u, n> subject to ||B u|| <= u_max: the admissible worst
// case against the outward direction n. Returns zero when n has no component
// in range(B).
Vector restoring_optimal_control(const ControlChannel& control, const Vector& unit_normal,
                                 double u_max);

class Policy {
 public:
  enum class Kind { Zero, Constant, RestoringOptimal, Aggregate, Custom };
  using CustomFn = std::function<Vector(double, const Vector&, const HistorySummary&)>;

  static Policy zero(int control_dim, double u_max);
  static Policy constant(Vector u0, double u_max);
  // Cancels the outward normal component of f + G h with the smallest
  // control norm, clamped at u_max. At a supercritical boundary point the
  // clamp is active and the output equals restoring_optimal_control.
  static Policy restoring_optimal(int control_dim, double u_max);
  // Sum of the children's controls; bound is the sum of child bounds.
  static Policy aggregate(std::vector<Policy> children);
  static Policy custom(std::string id, int control_dim, double u_max, CustomFn fn);

  Policy with_id(std::string id) const;

  // Any candidate with ||B u|| above the bound is radially scaled onto the
  // bound sphere and the sample is marked clipped.
  ControlSample evaluate(double t, const Vector& x, const HistorySummary& history,
                         const ChannelEnv& env) const;

  double bound() const { return bound_; }
  int control_dim() const { return control_dim_; }
  Kind kind() const { return kind_; }
  const std::string& id() const { return id_; }
  bool provably_zero() const;
  const std::vector<std::shared_ptr<const Policy>>& children() const { return children_; }
  const Vector& constant_value() const { return constant_; }
  std::string kind_name() const;

 private:
  Policy() = default;
  Vector raw_control(double t, const Vector& x, const HistorySummary& history,
                     const ChannelEnv& env) const;

  Kind kind_ = Kind::Zero;
  std::string id_;
  int control_dim_ = 0;
  double bound_ = 0.0;
  Vector constant_;
  std::vector<std::shared_ptr<const Policy>> children_;
  CustomFn custom_;
};

struct BoundAudit {
  bool within_bound = true;    // after the clipping layer
  bool raw_within_bound = true;  // before it
  double max_effective_norm = 0.0;
  double max_raw_norm = 0.0;
  long clip_count = 0;
  long evaluations = 0;
};

BoundAudit verify_policy_bound(const Policy& policy, const ChannelEnv& env,
                               const std::vector<Vector>& states,
                               const std::vector<double>& times);

}  // namespace invlab
