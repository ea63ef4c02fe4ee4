#pragma once

#include "invlab/certificate.hpp"
#include "invlab/instance.hpp"
#include "invlab/supercritical.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace invlab {

enum class EventType { BoundaryCrossing, GammaContact, PhiExit, Clip };

std::string event_type_name(EventType type);

struct TrajectoryEvent {
  EventType type;
  double time = 0.0;
  Vector state;
  long count = 1;  // clip events coalesce: first occurrence plus a counter
};

enum class Termination { Horizon, Exit, Error };

std::string termination_name(Termination termination);

struct TrajectorySample {
  double t = 0.0;
  Vector x;
  double kappa = 0.0;
  Vector u;  // control held over [t, t + dt)
  double g = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<TrajectoryEvent> events;
  double dt = 0.0;
  Termination terminated = Termination::Horizon;
  std::string policy_id;
  double max_control_norm = 0.0;  // max ||B u|| over held controls
  long clip_count = 0;
  std::string error_message;

  const TrajectoryEvent* first_event(EventType type) const;
};

using DerivFn = std::function<Vector(double, const Vector&)>;

Vector rk4_step(const DerivFn& deriv, double t, const Vector& x, double dt);

// Fixed-step RK4 with the control sampled at each step start and held across
// the step; kappa is evaluated live at each stage time. The authority bound
// is asserted on every held control. Integration stops at the horizon or at
// the first outward boundary crossing, whichever comes first; the crossing
// (and any exit from the internal predicate) is bisected to 1e-12 in time by
// re-integrating partial steps with the held control, and the refined
// contact state becomes the final sample. Divergence is recorded on the
// trajectory, not thrown.
Trajectory simulate(const Instance& instance, const Policy& policy, const Vector& x0,
                    double horizon, double dt);
Trajectory simulate(const Instance& instance, const Policy& policy);

struct CrossingPoint {
  double time = 0.0;
  Vector state;
  double level = 0.0;  // g at the refined point
};

// Refines a safe-set boundary crossing inside one step. g must change sign
// between x1 and the state reached at t2 under the control held from
// (t1, x1).
CrossingPoint refine_crossing(const Instance& instance, const Policy& policy, double t1,
                              const Vector& x1, double t2,
                              const HistorySummary& history = {});

struct InvarianceAudit {
  bool invariant = true;
  double worst_margin = 0.0;  // min over samples of -g
  double worst_time = 0.0;
  bool exited = false;
  std::size_t samples = 0;
};

InvarianceAudit invariance_audit(const Trajectory& trajectory);

struct ExitConfirmation {
  bool exited = false;
  double time = 0.0;
  double final_level = 0.0;
  Vector final_state;
};

// Continues integration a few steps past a boundary contact and checks the
// state is strictly outside afterwards.
ExitConfirmation confirm_exit(const Instance& instance, const Policy& policy,
                              double contact_time, const Vector& contact_state, int steps = 10);

struct ReachWitness {
  int candidate_index = -1;
  Vector start;
  Vector contact;
  Vector u_held;  // control active across the crossing step
  double t_reach = 0.0;
  double kappa = 0.0;
  double outward_rate = 0.0;  // <x_dot, n> at contact under the held control
};

// Initial states tried by the reachability search: the instance initial
// state, a radial ladder toward the safe-set center, then seeded interior
// draws, truncated to numerics.candidate_count.
std::vector<Vector> default_candidates(const Instance& instance);

// Existential reachability search: find a start whose trajectory under this
// policy first touches the boundary inside the target region, at or after
// the supercritical time, staying strictly interior before. A semi-decision:
// exhausting the candidates refutes nothing.
Certificate certify_a3(const Instance& instance, const Policy& policy,
                       const std::vector<Vector>& candidates, const ThresholdResult& threshold,
                       ReachWitness* witness = nullptr);

struct PolicyOutcome {
  std::string policy_id;
  std::string kind;
  bool synthesized = false;  // added by the harness, not part of the suite
  bool within_instance_authority = true;
  bool contact_found = false;
  double contact_time = 0.0;
  Vector contact_point;
  double contact_capability = 0.0;
  double outward_rate = 0.0;
  bool exit_confirmed = false;
  bool has_containment = false;  // subcritical path: invariance audit ran
  InvarianceAudit containment;
  std::string note;
};

struct HarnessReport {
  std::string verdict;  // "theorem-instantiated" or "not instantiated (reason)"
  bool instantiated = false;
  Certificate a1;
  Certificate h1;
  Certificate h2;
  Certificate a2;
  Certificate lemma1;
  std::vector<Certificate> a3;  // one per policy, aligned with outcomes
  Certificate theorem1;
  bool threshold_found = false;
  bool already_supercritical = false;
  ThresholdResult threshold;
  std::vector<PolicyOutcome> outcomes;
  bool aggregate_synthesized = false;
  Json parameters = Json::object();
};

// Full pipeline: premise audits, capability threshold, gap and
// outward-positivity certificates, then a reachability witness and confirmed
// exit for every policy in the suite (plus a synthesized aggregate when the
// suite has none). The suite must contain the restoring-optimal policy; the
// theorem's claim is vacuous against weaker opposition.
HarnessReport run_harness(const Instance& instance);

}  // namespace invlab
