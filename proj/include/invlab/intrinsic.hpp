#pragma once

#include "invlab/certificate.hpp"
#include "invlab/instance.hpp"
#include "invlab/simulator.hpp"

#include <vector>

namespace invlab {

// Audits for intrinsically sustained strategies: safety must persist with the
// external channel silenced.

// Reruns the instance under the zero policy, bit-identical numerics
// otherwise; pass iff the safe set is invariant over the horizon.
Certificate check_r1_no_external(const Instance& instance);

// The internal state must start inside the predicate; genesis-stage
// interventions may have produced that state and are only echoed.
Certificate check_r2_genesis(const Vector& x0, const StatePartition& partition,
                             const PhiPredicate& phi);

// Predicate persistence along an already-computed zero-control trajectory:
// pass iff the internal block is in phi at every sample. Refuses trajectories
// with any control effort, since persistence under control says nothing
// about intrinsic sustainment.
Certificate check_r3_invariance(const Trajectory& trajectory, const StatePartition& partition,
                                const PhiPredicate& phi);

// Robustness across pinned capability levels: safe-set invariance under the
// zero policy at every level. Records the first failing level.
Certificate check_r4_scaling(const Instance& instance, const std::vector<double>& levels);

struct RequirementsReport {
  Certificate r1;
  Certificate r2;
  Certificate r3;
  Certificate r4;
  bool has_classification = false;
  StrategyClass claimed = StrategyClass::Intrinsic;
  ClassificationResult classification;
  std::string verdict;
  Json parameters = Json::object();
};

// Runs all four audits plus the strategy classification when the instance
// declares one. R2/R3 need the internal predicate; R4 levels come from
// numerics.r4_levels, empty selecting {0, 1, 10}.
RequirementsReport run_requirements(const Instance& instance);

}  // namespace invlab
