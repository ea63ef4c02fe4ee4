#pragma once

#include "invlab/common.hpp"
#include "invlab/policies.hpp"
#include "invlab/state_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace invlab {

// Safety-compatible set of internal configurations. Membership is evaluated
// on the internal block only. Built-in kinds expose a smooth indicator level
// (negative inside) so exit times can be refined by bisection; the ball is
// closed, so boundary contact still counts as inside.
class PhiPredicate {
 public:
  enum class Kind { Ball, Halfspace, Custom };
  using MemberFn = std::function<bool(const Vector&)>;

  // ||v - reference|| <= radius
  static PhiPredicate ball(Vector reference, double radius);
  // <direction, v> <= offset
  static PhiPredicate halfspace(Vector direction, double offset);
  static PhiPredicate custom(int internal_dim, MemberFn member, std::string description);

  bool contains(const Vector& internal_state) const;
  // Signed indicator for built-ins (negative strictly inside); nullopt for
  // custom predicates without one.
  std::optional<double> indicator(const Vector& internal_state) const;
  int internal_dim() const { return dim_; }
  Kind kind() const { return kind_; }
  std::string describe() const;

  const Vector& reference() const { return reference_; }
  double radius() const { return radius_; }
  const Vector& direction() const { return direction_; }
  double offset() const { return offset_; }

 private:
  PhiPredicate() = default;
  Kind kind_ = Kind::Ball;
  int dim_ = 0;
  Vector reference_;
  double radius_ = 0.0;
  Vector direction_;
  double offset_ = 0.0;
  MemberFn member_;
  std::string description_;
};

enum class StrategyClass { ExternallyEnforced, Intrinsic };

struct StrategyDeclaration {
  // Policy id sustaining safety after genesis, or nullopt for none.
  std::optional<std::string> sustain_policy_id;
  // Bounded-duration setup interventions; compatible with the intrinsic
  // class, listed verbatim in reports.
  std::vector<std::string> genesis_interventions;
  StrategyClass claimed = StrategyClass::Intrinsic;
};

struct ClassificationResult {
  StrategyClass assigned = StrategyClass::Intrinsic;
  bool mismatch = false;  // assigned differs from claimed
  std::string rationale;
};

// Intrinsic iff there is no sustain-stage policy or the referenced policy is
// provably zero. Genesis interventions never change the class.
ClassificationResult classify_strategy(const StrategyDeclaration& declaration,
                                       const std::vector<Policy>& suite);

std::string to_string(StrategyClass c);

}  // namespace invlab
