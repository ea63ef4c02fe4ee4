#include "invlab/instance.hpp"

namespace invlab {

Instance::Instance(StatePartition partition_, Vector initial_state_, SafeSet safe_set_,
                   BoundaryRegion gamma_, Drift drift_, DriftBound drift_bound_,
                   ControlChannel control_, double control_authority_,
                   EndogenousChannel endogenous_, CapabilitySchedule capability_,
                   std::vector<Policy> policies_, Numerics numerics_)
    : partition(partition_),
      initial_state(std::move(initial_state_)),
      safe_set(std::move(safe_set_)),
      gamma(std::move(gamma_)),
      drift(std::move(drift_)),
      drift_bound(drift_bound_),
      control(std::move(control_)),
      control_authority(control_authority_),
      endogenous(std::move(endogenous_)),
      capability(std::move(capability_)),
      policies(std::move(policies_)),
      numerics(std::move(numerics_)) {
  int n = partition.n;
  require_dimension(initial_state, n, "initial state");
  if (safe_set.dimension() != n) fail(ErrorCode::Dimension, "safe set dimension mismatch");
  if (drift.dimension() != n) fail(ErrorCode::Dimension, "drift dimension mismatch");
  if (control.state_dim() != n) fail(ErrorCode::Dimension, "control matrix row count mismatch");
  if (endogenous.state_dim() != n) fail(ErrorCode::Dimension, "endogenous channel dimension mismatch");
  if (endogenous.coupling().rows() != n) fail(ErrorCode::Dimension, "coupling matrix row count mismatch");
  if (!(control_authority > 0.0)) fail(ErrorCode::Config, "control authority must be positive");
  if (!(drift_bound.value >= 0.0)) fail(ErrorCode::Config, "drift bound must be non-negative");
  if (policies.empty()) fail(ErrorCode::Config, "instance needs at least one policy");
  for (const Policy& p : policies) {
    if (p.control_dim() != control.control_dim()) {
      fail(ErrorCode::Dimension, "policy '" + p.id() + "' control dimension mismatch");
    }
  }
  if (!(numerics.dt > 0.0)) fail(ErrorCode::Config, "dt must be positive");
  if (!(numerics.horizon > 0.0)) fail(ErrorCode::Config, "horizon must be positive");
}

ChannelEnv Instance::env() const {
  ChannelEnv e;
  e.drift = &drift;
  e.control = &control;
  e.endogenous = &endogenous;
  e.safe_set = &safe_set;
  e.capability = &capability;
  return e;
}

const Policy* Instance::find_policy(const std::string& id) const {
  for (const Policy& p : policies) {
    if (p.id() == id) return &p;
  }
  return nullptr;
}

std::vector<Vector> Instance::gamma_samples(int count, const std::string& stream_label) const {
  return sample_boundary_region(safe_set, gamma, count, derive_seed(numerics.seed, stream_label));
}

Instance Instance::with_policies(std::vector<Policy> replacement) const {
  Instance copy = *this;
  if (replacement.empty()) fail(ErrorCode::Config, "instance needs at least one policy");
  for (const Policy& p : replacement) {
    if (p.control_dim() != control.control_dim()) {
      fail(ErrorCode::Dimension, "policy '" + p.id() + "' control dimension mismatch");
    }
  }
  copy.policies = std::move(replacement);
  return copy;
}

Instance Instance::with_constant_capability(double level) const {
  Instance copy = *this;
  copy.capability = CapabilitySchedule::constant(level);
  return copy;
}

Instance Instance::with_initial_state(Vector x0) const {
  Instance copy = *this;
  require_dimension(x0, partition.n, "initial state");
  copy.initial_state = std::move(x0);
  return copy;
}

}  // namespace invlab
