#include "invlab/channels.hpp"

#include <cmath>

namespace invlab {

Drift Drift::zero(int dimension) {
  if (dimension < 1) fail(ErrorCode::Config, "drift dimension must be >= 1");
  Drift d;
  d.kind_ = Kind::Zero;
  d.dimension_ = dimension;
  return d;
}

Drift Drift::linear(Matrix coefficients) {
  if (coefficients.rows() < 1 || coefficients.rows() != coefficients.cols()) {
    fail(ErrorCode::Dimension, "linear drift matrix must be square");
  }
  if (!coefficients.allFinite()) fail(ErrorCode::Config, "linear drift matrix must be finite");
  Drift d;
  d.kind_ = Kind::Linear;
  d.dimension_ = static_cast<int>(coefficients.rows());
  d.coefficients_ = std::move(coefficients);
  return d;
}

Drift Drift::custom(int dimension, FieldFn field) {
  if (dimension < 1) fail(ErrorCode::Config, "drift dimension must be >= 1");
  if (!field) fail(ErrorCode::Config, "custom drift needs a field callable");
  Drift d;
  d.kind_ = Kind::Custom;
  d.dimension_ = dimension;
  d.field_ = std::move(field);
  return d;
}

Vector Drift::at(const Vector& x, double t) const {
  require_dimension(x, dimension_, "state");
  Vector f;
  switch (kind_) {
    case Kind::Zero:
      return Vector::Zero(dimension_);
    case Kind::Linear:
      f = coefficients_ * x;
      break;
    case Kind::Custom:
      f = field_(x, t);
      require_dimension(f, dimension_, "drift value");
      break;
  }
  if (!all_finite(f)) fail(ErrorCode::InvalidField, "drift evaluated to a non-finite value");
  return f;
}

ControlChannel::ControlChannel(Matrix input_matrix) : matrix_(std::move(input_matrix)) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) {
    fail(ErrorCode::Dimension, "control matrix must have at least one row and column");
  }
  if (!matrix_.allFinite()) fail(ErrorCode::Config, "control matrix must be finite");
  Eigen::ColPivHouseholderQR<Matrix> qr(matrix_);
  Eigen::Index r = qr.rank();
  basis_ = qr.householderQ() * Matrix::Identity(matrix_.rows(), r);
  solver_.compute(matrix_);
}

Vector ControlChannel::apply(const Vector& u) const {
  require_dimension(u, control_dim(), "control");
  if (!all_finite(u)) fail(ErrorCode::InvalidField, "control vector is non-finite");
  return matrix_ * u;
}

Vector ControlChannel::project_onto_range(const Vector& v) const {
  require_dimension(v, state_dim(), "vector");
  if (basis_.cols() == 0) return Vector::Zero(state_dim());
  return basis_ * (basis_.transpose() * v);
}

Vector ControlChannel::preimage(const Vector& target) const {
  require_dimension(target, state_dim(), "target");
  return solver_.solve(target);
}

EndogenousChannel EndogenousChannel::radial_outward(int dimension) {
  if (dimension < 1) fail(ErrorCode::Config, "channel dimension must be >= 1");
  EndogenousChannel c;
  c.kind_ = Kind::RadialOutward;
  c.state_dim_ = dimension;
  c.effect_dim_ = dimension;
  c.coupling_ = Matrix::Identity(dimension, dimension);
  return c;
}

EndogenousChannel EndogenousChannel::linear_gain(int dimension, double gain) {
  if (dimension < 1) fail(ErrorCode::Config, "channel dimension must be >= 1");
  if (!(gain >= 0.0)) fail(ErrorCode::Config, "linear gain must be non-negative");
  EndogenousChannel c;
  c.kind_ = Kind::LinearGain;
  c.state_dim_ = dimension;
  c.effect_dim_ = dimension;
  c.gain_ = gain;
  c.coupling_ = Matrix::Identity(dimension, dimension);
  return c;
}

EndogenousChannel EndogenousChannel::target_seeking(Vector target) {
  if (target.size() < 1) fail(ErrorCode::Config, "target must have dimension >= 1");
  if (!all_finite(target)) fail(ErrorCode::Config, "target must be finite");
  EndogenousChannel c;
  c.kind_ = Kind::TargetSeeking;
  c.state_dim_ = static_cast<int>(target.size());
  c.effect_dim_ = c.state_dim_;
  c.target_ = std::move(target);
  c.coupling_ = Matrix::Identity(c.state_dim_, c.state_dim_);
  return c;
}

EndogenousChannel EndogenousChannel::internal_drift(const StatePartition& partition, Vector rate) {
  require_dimension(rate, partition.internal_size(), "internal drift rate");
  if (!all_finite(rate)) fail(ErrorCode::Config, "internal drift rate must be finite");
  EndogenousChannel c;
  c.kind_ = Kind::InternalDrift;
  c.state_dim_ = partition.n;
  c.effect_dim_ = partition.n;
  c.rate_ = std::move(rate);
  c.coupling_ = Matrix::Identity(partition.n, partition.n);
  return c;
}

EndogenousChannel EndogenousChannel::custom(int state_dim, int effect_dim, EffectFn h) {
  if (state_dim < 1 || effect_dim < 1) fail(ErrorCode::Config, "channel dimensions must be >= 1");
  if (!h) fail(ErrorCode::Config, "custom channel needs an effect callable");
  EndogenousChannel c;
  c.kind_ = Kind::Custom;
  c.state_dim_ = state_dim;
  c.effect_dim_ = effect_dim;
  c.effect_fn_ = std::move(h);
  c.coupling_ = Matrix::Identity(state_dim, effect_dim);
  return c;
}

EndogenousChannel& EndogenousChannel::with_coupling(Matrix coupling) {
  if (coupling.rows() != state_dim_ || coupling.cols() != effect_dim_) {
    fail(ErrorCode::Dimension, "coupling matrix must be state_dim x effect_dim");
  }
  if (!coupling.allFinite()) fail(ErrorCode::Config, "coupling matrix must be finite");
  coupling_ = std::move(coupling);
  return *this;
}

Vector EndogenousChannel::raw_effect(const Vector& x, double kappa) const {
  require_dimension(x, state_dim_, "state");
  if (!(kappa >= 0.0)) fail(ErrorCode::Domain, "capability must be non-negative");
  Vector h;
  switch (kind_) {
    case Kind::RadialOutward:
      h = kappa * x;
      break;
    case Kind::LinearGain:
      h = gain_ * kappa * x;
      break;
    case Kind::TargetSeeking:
      h = kappa * (target_ - x);
      break;
    case Kind::InternalDrift:
      h = Vector::Zero(effect_dim_);
      h.tail(rate_.size()) = rate_;
      break;
    case Kind::Custom:
      h = effect_fn_(x, kappa);
      require_dimension(h, effect_dim_, "endogenous effect");
      break;
  }
  if (!all_finite(h)) {
    fail(ErrorCode::InvalidField, "endogenous channel evaluated to a non-finite value");
  }
  return h;
}

Vector EndogenousChannel::effect(const Vector& x, double kappa) const {
  return coupling_ * raw_effect(x, kappa);
}

Vector total_velocity(const Drift& drift, const ControlChannel& control,
                      const EndogenousChannel& endogenous, const Vector& x, double t,
                      const Vector& u, double kappa) {
  if (drift.dimension() != control.state_dim() || drift.dimension() != endogenous.state_dim()) {
    fail(ErrorCode::Dimension, "channels disagree on the state dimension");
  }
  Vector f = drift.at(x, t);
  Vector bu = control.apply(u);
  Vector gh = endogenous.effect(x, kappa);
  return f + bu + gh;
}

ScalingReport check_h2_monotone(const EndogenousChannel& channel,
                                const std::vector<Vector>& states,
                                const std::vector<double>& kappa_grid) {
  if (states.empty()) fail(ErrorCode::Config, "scaling check needs at least one state");
  if (kappa_grid.size() < 2) fail(ErrorCode::Config, "scaling check needs at least two capability levels");
  for (size_t i = 0; i < kappa_grid.size(); ++i) {
    if (!(kappa_grid[i] >= 0.0)) fail(ErrorCode::Config, "capability levels must be non-negative");
    if (i > 0 && !(kappa_grid[i] > kappa_grid[i - 1])) {
      fail(ErrorCode::Config, "capability levels must be strictly increasing");
    }
  }
  ScalingReport report;
  for (size_t s = 0; s < states.size(); ++s) {
    double prev = channel.raw_effect(states[s], kappa_grid[0]).norm();
    for (size_t k = 1; k < kappa_grid.size(); ++k) {
      double cur = channel.raw_effect(states[s], kappa_grid[k]).norm();
      if (cur < prev - tol::monotone_slack) {
        report.non_decreasing = false;
        report.first_violation = ScalingViolation{static_cast<int>(s), kappa_grid[k - 1],
                                                  kappa_grid[k], prev, cur};
        return report;
      }
      prev = cur;
    }
  }
  return report;
}

double probe_h1_continuity(const EndogenousChannel& channel, const std::vector<Vector>& states,
                           const std::vector<double>& kappas, double delta) {
  if (states.empty() || kappas.empty()) {
    fail(ErrorCode::Config, "continuity probe needs states and capability levels");
  }
  if (!(delta > 0.0)) fail(ErrorCode::Config, "probe step must be positive");
  double worst = 0.0;
  for (const Vector& x : states) {
    for (double kappa : kappas) {
      if (!(kappa >= 0.0)) fail(ErrorCode::Config, "capability levels must be non-negative");
      Vector base = channel.raw_effect(x, kappa);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (double sign : {1.0, -1.0}) {
          Vector xp = x;
          xp[i] += sign * delta;
          worst = std::max(worst, (channel.raw_effect(xp, kappa) - base).norm());
        }
      }
      worst = std::max(worst, (channel.raw_effect(x, kappa + delta) - base).norm());
      if (kappa - delta >= 0.0) {
        worst = std::max(worst, (channel.raw_effect(x, kappa - delta) - base).norm());
      }
    }
  }
  return worst;
}

}  // namespace invlab
