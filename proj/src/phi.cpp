#include "invlab/phi.hpp"

#include <cmath>

namespace invlab {

PhiPredicate PhiPredicate::ball(Vector reference, double radius) {
  if (reference.size() < 1) fail(ErrorCode::Config, "reference must have dimension >= 1");
  if (!all_finite(reference)) fail(ErrorCode::Config, "reference must be finite");
  if (!(radius > 0.0)) fail(ErrorCode::Config, "radius must be positive");
  PhiPredicate p;
  p.kind_ = Kind::Ball;
  p.dim_ = static_cast<int>(reference.size());
  p.reference_ = std::move(reference);
  p.radius_ = radius;
  return p;
}

PhiPredicate PhiPredicate::halfspace(Vector direction, double offset) {
  if (direction.size() < 1) fail(ErrorCode::Config, "direction must have dimension >= 1");
  if (!all_finite(direction) || !std::isfinite(offset)) {
    fail(ErrorCode::Config, "halfspace parameters must be finite");
  }
  if (direction.norm() <= 0.0) fail(ErrorCode::Config, "direction must be non-zero");
  PhiPredicate p;
  p.kind_ = Kind::Halfspace;
  p.dim_ = static_cast<int>(direction.size());
  p.direction_ = std::move(direction);
  p.offset_ = offset;
  return p;
}

PhiPredicate PhiPredicate::custom(int internal_dim, MemberFn member, std::string description) {
  if (internal_dim < 1) fail(ErrorCode::Config, "internal dimension must be >= 1");
  if (!member) fail(ErrorCode::Config, "custom predicate needs a membership callable");
  PhiPredicate p;
  p.kind_ = Kind::Custom;
  p.dim_ = internal_dim;
  p.member_ = std::move(member);
  p.description_ = std::move(description);
  return p;
}

bool PhiPredicate::contains(const Vector& internal_state) const {
  require_dimension(internal_state, dim_, "internal state");
  switch (kind_) {
    case Kind::Ball:
      return (internal_state - reference_).norm() <= radius_;
    case Kind::Halfspace:
      return direction_.dot(internal_state) <= offset_;
    case Kind::Custom:
      return member_(internal_state);
  }
  fail(ErrorCode::Config, "unreachable predicate kind");
}

std::optional<double> PhiPredicate::indicator(const Vector& internal_state) const {
  require_dimension(internal_state, dim_, "internal state");
  switch (kind_) {
    case Kind::Ball:
      return (internal_state - reference_).norm() - radius_;
    case Kind::Halfspace:
      return direction_.dot(internal_state) - offset_;
    case Kind::Custom:
      return std::nullopt;
  }
  fail(ErrorCode::Config, "unreachable predicate kind");
}

std::string PhiPredicate::describe() const {
  switch (kind_) {
    case Kind::Ball:
      return "ball(radius " + format_double(radius_) + ")";
    case Kind::Halfspace:
      return "halfspace <d,v> <= " + format_double(offset_);
    case Kind::Custom:
      return description_.empty() ? std::string("custom") : description_;
  }
  return "unknown";
}

std::string to_string(StrategyClass c) {
  return c == StrategyClass::Intrinsic ? "intrinsic" : "externally-enforced";
}

ClassificationResult classify_strategy(const StrategyDeclaration& declaration,
                                       const std::vector<Policy>& suite) {
  ClassificationResult result;
  if (!declaration.sustain_policy_id) {
    result.assigned = StrategyClass::Intrinsic;
    result.rationale = "no sustain-stage policy declared";
  } else {
    const Policy* found = nullptr;
    for (const Policy& p : suite) {
      if (p.id() == *declaration.sustain_policy_id) {
        found = &p;
        break;
      }
    }
    if (!found) {
      fail(ErrorCode::Config,
           "sustain policy '" + *declaration.sustain_policy_id + "' is not in the suite");
    }
    if (found->provably_zero()) {
      result.assigned = StrategyClass::Intrinsic;
      result.rationale = "sustain-stage policy '" + found->id() + "' is provably zero";
    } else {
      result.assigned = StrategyClass::ExternallyEnforced;
      result.rationale = "sustain-stage policy '" + found->id() + "' can emit nonzero control";
    }
  }
  if (!declaration.genesis_interventions.empty()) {
    result.rationale += "; genesis interventions do not affect the class";
  }
  result.mismatch = result.assigned != declaration.claimed;
  return result;
}

}  // namespace invlab
