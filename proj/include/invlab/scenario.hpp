#pragma once

#include "invlab/certificate.hpp"
#include "invlab/instance.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace invlab {

struct ValidationIssue {
  std::string path;  // dotted location in the document, e.g. "control.u_max"
  std::string message;
};

// Carries every issue found in one validation pass; what() joins them.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

struct SafeSetSpec {
  std::string kind;  // "ball", "ellipsoid", "pnorm-ball"
  std::vector<double> center;
  double radius = 0.0;
  std::vector<double> semi_axes;
  int p = 2;
};

struct GammaSpec {
  std::string kind;  // "full", "halfspace"
  std::vector<double> coeffs;
  double offset = 0.0;
};

struct DriftSpec {
  std::string kind;  // "zero", "linear"
  Matrix coefficients;
};

struct DriftBoundSpec {
  std::string method = "sampled";  // "declared", "sampled"
  double value = 0.0;              // declared only
  double safety_factor = 1.1;      // sampled only
  int samples = 512;               // sampled only
};

struct ControlSpec {
  Matrix matrix;  // B, n x m
  double u_max = 0.0;
};

struct EndogenousSpec {
  std::string kind;  // "radial-outward", "linear-gain", "target-seeking", "internal-drift"
  double gain = 1.0;
  std::vector<double> target;
  std::vector<double> rate;
  std::optional<Matrix> coupling;  // G, default identity
};

struct CapabilitySpec {
  std::string kind;  // "constant", "linear", "logistic", "piecewise-linear"
  double level = 0.0;
  double initial = 0.0;
  double rate = 0.0;
  double limit = 0.0;
  double growth = 0.0;
  double midpoint = 0.0;
  std::vector<std::array<double, 2>> knots;
};

struct PolicySpec {
  std::string kind;  // "zero", "constant", "restoring-optimal", "aggregate"
  std::string id;    // defaults to the kind name
  std::optional<double> u_max;  // defaults to control.u_max; derived for aggregates
  std::vector<double> u;        // constant only
  std::vector<PolicySpec> children;  // aggregate only
};

struct PhiSpec {
  std::string kind;  // "ball", "halfspace"
  std::vector<double> reference;
  double radius = 0.0;
  std::vector<double> direction;
  double offset = 0.0;
};

struct StrategySpec {
  std::optional<std::string> sustain_policy;  // id into the policy suite
  std::vector<std::string> genesis_interventions;
  std::string claimed_class;  // "externally-enforced", "intrinsic"
};

struct NumericsSpec {
  Numerics values;
  // seeds can also arrive from the CLI; the document field is the fallback
};

// Typed mirror of one scenario file. Optional blocks carry their defaults
// after validation, so serialize() always emits the complete form.
struct ScenarioDocument {
  int schema_version = 1;
  int dimension = 0;
  int n_env = 0;
  std::vector<double> initial_state;
  SafeSetSpec safe_set;
  GammaSpec gamma;
  DriftSpec drift;
  DriftBoundSpec drift_bound;
  ControlSpec control;
  EndogenousSpec endogenous;
  CapabilitySpec capability;
  std::vector<PolicySpec> policies;  // singular "policy" is normalized into here
  std::optional<PhiSpec> phi;
  std::optional<StrategySpec> strategy;
  Numerics numerics;
};

// Strict-schema parse: unknown keys are rejected, every issue in the document
// is collected before throwing. Paths in issues are dotted.
ScenarioDocument parse_scenario(const Json& document);
ScenarioDocument parse_scenario_text(const std::string& text);
ScenarioDocument load_validate(const std::string& path);

// Canonical form: all defaults materialized, keys in schema order. Feeding
// this back through parse_scenario reproduces the document field-for-field.
Json serialize(const ScenarioDocument& doc);

// 16 hex digits over the canonical dump.
std::string scenario_fingerprint(const ScenarioDocument& doc);

Instance build_instance(const ScenarioDocument& doc);

// Same document with the policy suite replaced by a single zero policy; the
// canonical forms differ only under "policies".
ScenarioDocument with_zero_policy(const ScenarioDocument& doc);

// Replaces one numeric leaf addressed by a dotted path ("capability.level",
// "control.u_max", "initial_state.0") and revalidates. Config error when the
// path does not name a number.
ScenarioDocument patched(const ScenarioDocument& doc, const std::string& dotted_path,
                         double value);

}  // namespace invlab
