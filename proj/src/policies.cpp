#include "invlab/policies.hpp"

#include <cmath>

namespace invlab {

Vector restoring_optimal_control(const ControlChannel& control, const Vector& unit_normal,
                                 double u_max) {
  require_dimension(unit_normal, control.state_dim(), "normal");
  if (std::abs(unit_normal.norm() - 1.0) > tol::normal_unit_slack) {
    fail(ErrorCode::Domain, "restoring control needs a unit normal");
  }
  if (!(u_max > 0.0)) fail(ErrorCode::Domain, "control authority must be positive");
  Vector r = control.project_onto_range(unit_normal);
  double rn = r.norm();
  if (rn <= tol::projection_floor) return Vector::Zero(control.control_dim());
  return control.preimage((-u_max / rn) * r);
}

Policy Policy::zero(int control_dim, double u_max) {
  if (control_dim < 1) fail(ErrorCode::Config, "control dimension must be >= 1");
  if (!(u_max > 0.0)) fail(ErrorCode::Config, "policy bound must be positive");
  Policy p;
  p.kind_ = Kind::Zero;
  p.id_ = "zero";
  p.control_dim_ = control_dim;
  p.bound_ = u_max;
  return p;
}

Policy Policy::constant(Vector u0, double u_max) {
  if (u0.size() < 1) fail(ErrorCode::Config, "constant control must have dimension >= 1");
  if (!all_finite(u0)) fail(ErrorCode::Config, "constant control must be finite");
  if (!(u_max > 0.0)) fail(ErrorCode::Config, "policy bound must be positive");
  Policy p;
  p.kind_ = Kind::Constant;
  p.id_ = "constant";
  p.control_dim_ = static_cast<int>(u0.size());
  p.bound_ = u_max;
  p.constant_ = std::move(u0);
  return p;
}

Policy Policy::restoring_optimal(int control_dim, double u_max) {
  if (control_dim < 1) fail(ErrorCode::Config, "control dimension must be >= 1");
  if (!(u_max > 0.0)) fail(ErrorCode::Config, "policy bound must be positive");
  Policy p;
  p.kind_ = Kind::RestoringOptimal;
  p.id_ = "restoring-optimal";
  p.control_dim_ = control_dim;
  p.bound_ = u_max;
  return p;
}

Policy Policy::aggregate(std::vector<Policy> children) {
  if (children.empty()) fail(ErrorCode::Config, "aggregate needs at least one child policy");
  int m = children.front().control_dim();
  double bound = 0.0;
  for (const Policy& c : children) {
    if (c.control_dim() != m) {
      fail(ErrorCode::Dimension, "aggregate children must share the control dimension");
    }
    bound += c.bound();
  }
  Policy p;
  p.kind_ = Kind::Aggregate;
  p.id_ = "aggregate";
  p.control_dim_ = m;
  p.bound_ = bound;
  p.children_.reserve(children.size());
  for (Policy& c : children) {
    p.children_.push_back(std::make_shared<const Policy>(std::move(c)));
  }
  return p;
}

Policy Policy::custom(std::string id, int control_dim, double u_max, CustomFn fn) {
  if (control_dim < 1) fail(ErrorCode::Config, "control dimension must be >= 1");
  if (!(u_max > 0.0)) fail(ErrorCode::Config, "policy bound must be positive");
  if (!fn) fail(ErrorCode::Config, "custom policy needs an evaluator");
  Policy p;
  p.kind_ = Kind::Custom;
  p.id_ = std::move(id);
  p.control_dim_ = control_dim;
  p.bound_ = u_max;
  p.custom_ = std::move(fn);
  return p;
}

Policy Policy::with_id(std::string id) const {
  Policy copy = *this;
  copy.id_ = std::move(id);
  return copy;
}

bool Policy::provably_zero() const {
  switch (kind_) {
    case Kind::Zero:
      return true;
    case Kind::Constant:
      return constant_.norm() == 0.0;
    case Kind::Aggregate:
      for (const auto& c : children_) {
        if (!c->provably_zero()) return false;
      }
      return true;
    default:
      return false;
  }
}

std::string Policy::kind_name() const {
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::RestoringOptimal: return "restoring-optimal";
    case Kind::Aggregate: return "aggregate";
    case Kind::Custom: return "custom";
  }
  return "unknown";
}

Vector Policy::raw_control(double t, const Vector& x, const HistorySummary& history,
                           const ChannelEnv& env) const {
  switch (kind_) {
    case Kind::Zero:
      return Vector::Zero(control_dim_);
    case Kind::Constant:
      return constant_;
    case Kind::RestoringOptimal: {
      if (!env.drift || !env.endogenous || !env.safe_set || !env.capability) {
        fail(ErrorCode::Config, "restoring-optimal policy needs drift, endogenous, safe set and capability in its environment");
      }
      Vector grad = env.safe_set->gradient(x);
      double gn = grad.norm();
      if (gn <= tol::gradient_floor) return Vector::Zero(control_dim_);
      Vector d = grad / gn;
      double kappa = env.capability->at(t);
      Vector field = env.drift->at(x, t) + env.endogenous->effect(x, kappa);
      double outward = field.dot(d);
      if (outward <= 0.0) return Vector::Zero(control_dim_);
      Vector r = env.control->project_onto_range(d);
      double rn = r.norm();
      if (rn <= tol::projection_floor) return Vector::Zero(control_dim_);
      double push = std::min(outward / rn, bound_);
      return env.control->preimage((-push / rn) * r);
    }
    case Kind::Custom:
      return custom_(t, x, history);
    case Kind::Aggregate:
      fail(ErrorCode::Config, "aggregate handled in evaluate");
  }
  fail(ErrorCode::Config, "unreachable policy kind");
}

ControlSample Policy::evaluate(double t, const Vector& x, const HistorySummary& history,
                               const ChannelEnv& env) const {
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "policies are evaluated at t >= 0");
  if (!env.control) fail(ErrorCode::Config, "policy evaluation needs a control channel");
  if (env.control->control_dim() != control_dim_) {
    fail(ErrorCode::Dimension, "policy and control channel disagree on the control dimension");
  }

  Vector u;
  bool child_clipped = false;
  if (kind_ == Kind::Aggregate) {
    u = Vector::Zero(control_dim_);
    for (const auto& child : children_) {
      ControlSample cs = child->evaluate(t, x, history, env);
      u += cs.u;
      child_clipped |= cs.clipped;
    }
  } else {
    u = raw_control(t, x, history, env);
  }
  if (!all_finite(u)) fail(ErrorCode::Policy, "policy produced a non-finite control");
  require_dimension(u, control_dim_, "policy control");

  ControlSample out;
  double raw = env.control->apply(u).norm();
  out.raw_norm = raw;
  out.clipped = child_clipped;
  if (raw > bound_) {
    u *= bound_ / raw;
    out.clipped = true;
    out.effective_norm = env.control->apply(u).norm();
  } else {
    out.effective_norm = raw;
  }
  out.u = std::move(u);
  return out;
}

BoundAudit verify_policy_bound(const Policy& policy, const ChannelEnv& env,
                               const std::vector<Vector>& states,
                               const std::vector<double>& times) {
  if (states.empty() || times.empty()) {
    fail(ErrorCode::Config, "bound audit needs states and times");
  }
  BoundAudit audit;
  HistorySummary history;
  for (double t : times) {
    for (const Vector& x : states) {
      ControlSample cs = policy.evaluate(t, x, history, env);
      ++audit.evaluations;
      if (cs.clipped) ++audit.clip_count;
      audit.max_effective_norm = std::max(audit.max_effective_norm, cs.effective_norm);
      audit.max_raw_norm = std::max(audit.max_raw_norm, cs.raw_norm);
      if (cs.effective_norm > policy.bound() + tol::audit_slack) audit.within_bound = false;
      if (cs.raw_norm > policy.bound() + tol::audit_slack) audit.raw_within_bound = false;
    }
  }
  return audit;
}

}  // namespace invlab
