#pragma once

#include "invlab/channels.hpp"
#include "invlab/phi.hpp"
#include "invlab/policies.hpp"
#include "invlab/safe_set.hpp"
#include "invlab/state_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace invlab {

struct Numerics {
  double dt = 1e-3;
  double horizon = 10.0;
  uint64_t seed = 0;
  int boundary_samples = 128;
  int candidate_count = 8;
  int kappa_grid_points = 33;
  int time_grid_points = 33;
  int audit_samples = 256;       // states per policy-bound / channel audit
  double h1_delta = 1e-6;
  double h1_tolerance = 1e-3;    // probe variation above this flags a jump
  std::vector<double> r4_levels; // empty selects the default ladder {0, 1, 10}
};

// One complete runnable configuration: dynamics, safe set, boundary region,
// capability schedule, policy suite and numerics.
struct Instance {
  StatePartition partition;
  Vector initial_state;
  SafeSet safe_set;
  BoundaryRegion gamma;
  Drift drift;
  DriftBound drift_bound;
  ControlChannel control;
  double control_authority = 1.0;  // U_max, bound on ||B u||
  EndogenousChannel endogenous;
  CapabilitySchedule capability;
  std::vector<Policy> policies;
  std::optional<PhiPredicate> phi;
  std::optional<StrategyDeclaration> strategy;
  Numerics numerics;
  std::string fingerprint;  // canonical document hash; empty for hand-built instances

  Instance(StatePartition partition_, Vector initial_state_, SafeSet safe_set_,
           BoundaryRegion gamma_, Drift drift_, DriftBound drift_bound_,
           ControlChannel control_, double control_authority_,
           EndogenousChannel endogenous_, CapabilitySchedule capability_,
           std::vector<Policy> policies_, Numerics numerics_);

  int dimension() const { return partition.n; }
  ChannelEnv env() const;
  const Policy& default_policy() const { return policies.front(); }
  const Policy* find_policy(const std::string& id) const;

  // Boundary-region samples drawn from the named seed substream.
  std::vector<Vector> gamma_samples(int count, const std::string& stream_label) const;

  Instance with_policies(std::vector<Policy> replacement) const;
  Instance with_constant_capability(double level) const;
  Instance with_initial_state(Vector x0) const;
};

}  // namespace invlab
