#pragma once

#include "invlab/common.hpp"
#include "invlab/state_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace invlab {

class Drift {
 public:
  enum class Kind { Zero, Linear, Custom };
  using FieldFn = std::function<Vector(const Vector&, double)>;

  static Drift zero(int dimension);
  static Drift linear(Matrix coefficients);  // f(x, t) = A x
  static Drift custom(int dimension, FieldFn field);

  Vector at(const Vector& x, double t) const;
  int dimension() const { return dimension_; }
  Kind kind() const { return kind_; }
  const Matrix& coefficients() const { return coefficients_; }

 private:
  Drift() = default;
  Kind kind_ = Kind::Zero;
  int dimension_ = 0;
  Matrix coefficients_;
  FieldFn field_;
};

// Bounded external input channel x_dot += B u. The authority bound applies to
// ||B u||, not ||u||.
class ControlChannel {
 public:
  explicit ControlChannel(Matrix input_matrix);

  int state_dim() const { return static_cast<int>(matrix_.rows()); }
  int control_dim() const { return static_cast<int>(matrix_.cols()); }
  int rank() const { return static_cast<int>(basis_.cols()); }
  const Matrix& matrix() const { return matrix_; }
  // Orthonormal columns spanning range(B).
  const Matrix& range_basis() const { return basis_; }

  Vector apply(const Vector& u) const;
  Vector project_onto_range(const Vector& v) const;
  // Minimum-norm least-squares u with B u closest to target.
  Vector preimage(const Vector& target) const;

 private:
  Matrix matrix_;
  Matrix basis_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> solver_;
};

// Capability-scaled endogenous channel x_dot += G h(x, kappa). Built-in
// families satisfy the admissibility conditions by construction (joint
// continuity; ||h|| non-decreasing in kappa for fixed x). Custom families are
// accepted behind an unverified-admissibility flag and should be run through
// the probes below.
class EndogenousChannel {
 public:
  enum class Kind { RadialOutward, LinearGain, TargetSeeking, InternalDrift, Custom };
  using EffectFn = std::function<Vector(const Vector&, double)>;

  // h(x, kappa) = kappa * x
  static EndogenousChannel radial_outward(int dimension);
  // h(x, kappa) = gain * kappa * x
  static EndogenousChannel linear_gain(int dimension, double gain);
  // h(x, kappa) = kappa * (target - x)
  static EndogenousChannel target_seeking(Vector target);
  // h constant in kappa: zero on the environment block, rate on the internal
  // block. ||h|| is constant, which the scaling condition allows.
  static EndogenousChannel internal_drift(const StatePartition& partition, Vector rate);
  static EndogenousChannel custom(int state_dim, int effect_dim, EffectFn h);

  EndogenousChannel& with_coupling(Matrix coupling);  // G, state_dim x effect_dim

  Vector raw_effect(const Vector& x, double kappa) const;  // h(x, kappa)
  Vector effect(const Vector& x, double kappa) const;      // G h(x, kappa)

  int state_dim() const { return state_dim_; }
  int effect_dim() const { return effect_dim_; }
  const Matrix& coupling() const { return coupling_; }
  Kind kind() const { return kind_; }
  bool admissibility_builtin() const { return kind_ != Kind::Custom; }

  double gain() const { return gain_; }
  const Vector& target() const { return target_; }
  const Vector& rate() const { return rate_; }

 private:
  EndogenousChannel() = default;
  Kind kind_ = Kind::LinearGain;
  int state_dim_ = 0;
  int effect_dim_ = 0;
  Matrix coupling_;
  double gain_ = 1.0;
  Vector target_;
  Vector rate_;
  EffectFn effect_fn_;
};

Vector total_velocity(const Drift& drift, const ControlChannel& control,
                      const EndogenousChannel& endogenous, const Vector& x, double t,
                      const Vector& u, double kappa);

struct ScalingViolation {
  int sample_index = 0;
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
  double norm_lo = 0.0;
  double norm_hi = 0.0;
};

struct ScalingReport {
  bool non_decreasing = true;
  std::optional<ScalingViolation> first_violation;
};

// Checks ||h(x, kappa)|| non-decreasing in kappa on the grid, per state.
ScalingReport check_h2_monotone(const EndogenousChannel& channel,
                                const std::vector<Vector>& states,
                                const std::vector<double>& kappa_grid);

// Falsification probe for joint continuity: max ||h(p') - h(p)|| over
// perturbations of size delta in each state coordinate and in kappa. Large
// values at small delta indicate a jump; small values prove nothing.
double probe_h1_continuity(const EndogenousChannel& channel, const std::vector<Vector>& states,
                           const std::vector<double>& kappas, double delta);

}  // namespace invlab
