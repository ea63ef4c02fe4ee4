#include "invlab/supercritical.hpp"

#include "invlab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace invlab {

namespace {

void require_level_grid(const std::vector<double>& grid, const std::string& what) {
  if (grid.empty()) fail(ErrorCode::Config, what + " grid is empty");
  double prev = -std::numeric_limits<double>::infinity();
  for (double v : grid) {
    if (!std::isfinite(v) || v < 0.0)
      fail(ErrorCode::Config, what + " grid values must be finite and non-negative");
    if (v <= prev) fail(ErrorCode::Config, what + " grid must be strictly increasing");
    prev = v;
  }
}

Json grid_summary(const std::vector<double>& grid) {
  Json j = Json::object();
  j["lo"] = grid.front();
  j["hi"] = grid.back();
  j["points"] = grid.size();
  return j;
}

}  // namespace

MarginSample a2_margin(const Instance& instance, const Vector& boundary_point, double kappa,
                       double time) {
  require_dimension(boundary_point, instance.dimension(), "boundary point");
  Vector normal = instance.safe_set.outward_normal(boundary_point);
  Vector push = instance.endogenous.effect(boundary_point, kappa);

  MarginSample sample;
  sample.boundary_point = boundary_point;
  sample.capability = kappa;
  sample.time = time;
  sample.outward_component = push.dot(normal);
  sample.inward_authority = instance.control_authority + instance.drift_bound.value;
  sample.margin = sample.outward_component - sample.inward_authority;
  return sample;
}

double min_margin(const Instance& instance, const std::vector<Vector>& gamma_samples,
                  double kappa) {
  if (gamma_samples.empty()) fail(ErrorCode::Config, "no boundary samples to evaluate");
  double worst = std::numeric_limits<double>::infinity();
  for (const Vector& point : gamma_samples)
    worst = std::min(worst, a2_margin(instance, point, kappa).margin);
  return worst;
}

Certificate certify_a2(const Instance& instance, const std::vector<Vector>& gamma_samples,
                       const std::vector<double>& kappa_grid) {
  require_level_grid(kappa_grid, "capability");

  Certificate cert;
  cert.check_id = "A2";
  cert.parameters["u_max"] = instance.control_authority;
  cert.parameters["drift_bound"] = instance.drift_bound.value;
  cert.parameters["drift_bound_method"] =
      instance.drift_bound.method == DriftBound::Method::Declared ? "declared" : "sampled";
  cert.parameters["boundary_samples"] = gamma_samples.size();
  cert.parameters["kappa_grid"] = grid_summary(kappa_grid);
  cert.parameters["strictness"] = tol::strictness;
  cert.parameters["sample_hash"] = hash_vectors(gamma_samples);

  if (gamma_samples.empty()) {
    cert.verdict = Verdict::NotCheckable;
    cert.narrative = "no boundary samples were supplied, so no margin could be evaluated";
    return cert;
  }

  double global_min = std::numeric_limits<double>::infinity();
  double argmin_kappa = kappa_grid.front();
  std::size_t argmin_sample = 0;

  for (double kappa : kappa_grid) {
    MarginSample worst;
    worst.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gamma_samples.size(); ++i) {
      MarginSample s = a2_margin(instance, gamma_samples[i], kappa);
      if (s.margin < worst.margin) worst = s;
      if (s.margin < global_min) {
        global_min = s.margin;
        argmin_kappa = kappa;
        argmin_sample = i;
      }
    }
    cert.margins.push_back(worst);
  }

  cert.verdict = margin_verdict(cert.margins);
  cert.evidence["min_margin"] = global_min;
  cert.evidence["argmin"] = {{"kappa", argmin_kappa}, {"sample_index", argmin_sample}};

  cert.declarations.push_back(
      "finite surrogate: the for-all claim over the boundary region and capability range is "
      "checked at " + std::to_string(gamma_samples.size()) + " sampled points and " +
      std::to_string(kappa_grid.size()) + " capability levels");
  if (instance.drift_bound.method == DriftBound::Method::Sampled)
    cert.declarations.push_back(
        "drift bound is a sampled estimate (" + std::to_string(instance.drift_bound.sample_count) +
        " samples, safety factor " + format_double(instance.drift_bound.safety_factor) + ")");

  if (cert.verdict == Verdict::Pass) {
    cert.narrative = "endogenous outward push exceeds the combined inward authority U_max + M_f "
                     "at every sampled boundary point and capability level; worst margin " +
                     format_double(global_min) + " at kappa = " + format_double(argmin_kappa);
  } else {
    cert.narrative = "margin fails the strict-positivity floor at kappa = " +
                     format_double(argmin_kappa) + " (sample " + std::to_string(argmin_sample) +
                     "): min margin " + format_double(global_min);
  }
  return cert;
}

ThresholdResult find_kappa_star(const Instance& instance,
                                const std::vector<Vector>& gamma_samples, double kappa_lo,
                                double kappa_hi) {
  if (!std::isfinite(kappa_lo) || !std::isfinite(kappa_hi) || kappa_lo < 0.0)
    fail(ErrorCode::Config, "threshold bracket ends must be finite and non-negative");
  if (kappa_hi <= kappa_lo)
    fail(ErrorCode::Config, "threshold bracket is empty: kappa_hi must exceed kappa_lo");
  if (gamma_samples.empty()) fail(ErrorCode::Config, "no boundary samples to evaluate");

  // Bisection on the min margin is only sound if the margin cannot decrease
  // as kappa grows, which rests on the channel's scaling condition.
  ScalingReport scaling = check_h2_monotone(instance.endogenous, gamma_samples,
                                            linspace(kappa_lo, kappa_hi, 9));
  if (!scaling.non_decreasing) {
    const ScalingViolation& v = *scaling.first_violation;
    fail(ErrorCode::Ordering,
         "threshold bisection requires ||h|| non-decreasing in kappa, violated at sample " +
             std::to_string(v.sample_index) + " between kappa = " + format_double(v.kappa_lo) +
             " and " + format_double(v.kappa_hi));
  }

  int time_points = std::max(33, instance.numerics.time_grid_points);
  MonotoneReport schedule_audit = verify_schedule_monotone(
      instance.capability, linspace(0.0, instance.numerics.horizon, time_points));
  if (!schedule_audit.monotone) {
    auto [t1, t2] = *schedule_audit.first_violation;
    fail(ErrorCode::Config, "capability schedule decreases between t = " + format_double(t1) +
                                " and t = " + format_double(t2));
  }

  double margin_lo = min_margin(instance, gamma_samples, kappa_lo);
  double margin_hi = min_margin(instance, gamma_samples, kappa_hi);
  if (margin_lo > tol::strictness)
    fail(ErrorCode::Bracket, "lower bracket end kappa = " + format_double(kappa_lo) +
                                 " is already supercritical (min margin " +
                                 format_double(margin_lo) + ")");
  if (margin_hi <= tol::strictness)
    fail(ErrorCode::Bracket, "upper bracket end kappa = " + format_double(kappa_hi) +
                                 " is not supercritical (min margin " + format_double(margin_hi) +
                                 ")");

  double lo = kappa_lo;
  double hi = kappa_hi;
  int iterations = 0;
  while (hi - lo > tol::kappa_star_width) {
    double mid = 0.5 * (lo + hi);
    if (min_margin(instance, gamma_samples, mid) > tol::strictness)
      hi = mid;
    else
      lo = mid;
    ++iterations;
  }

  ThresholdResult result;
  result.kappa_star = hi;  // upper end keeps the returned level strictly supercritical
  result.margin_at_star = min_margin(instance, gamma_samples, hi);
  result.t_kappa = instance.capability.first_time_at_least(result.kappa_star);

  // Spot audit that the min margin really was non-decreasing across the
  // original bracket; recorded, not enforced.
  std::vector<double> spot = linspace(kappa_lo, kappa_hi, 5);
  double prev = -std::numeric_limits<double>::infinity();
  Json spot_margins = Json::array();
  for (double kappa : spot) {
    double m = min_margin(instance, gamma_samples, kappa);
    spot_margins.push_back({{"kappa", kappa}, {"min_margin", m}});
    if (m < prev - tol::monotone_slack) result.margin_monotone_on_grid = false;
    prev = m;
  }

  result.parameters["bracket"] = {{"lo", kappa_lo}, {"hi", kappa_hi}};
  result.parameters["bracket_margins"] = {{"lo", margin_lo}, {"hi", margin_hi}};
  result.parameters["width"] = tol::kappa_star_width;
  result.parameters["iterations"] = iterations;
  result.parameters["strictness"] = tol::strictness;
  result.parameters["boundary_samples"] = gamma_samples.size();
  result.parameters["sample_hash"] = hash_vectors(gamma_samples);
  result.parameters["margin_spot_check"] = spot_margins;
  return result;
}

Certificate lemma1_certificate(const Instance& instance,
                               const std::vector<Vector>& gamma_samples,
                               const std::vector<double>& time_grid,
                               const Certificate& a2_certificate) {
  if (a2_certificate.check_id != "A2" || a2_certificate.verdict != Verdict::Pass)
    fail(ErrorCode::Ordering,
         "outward-positivity certificate requires a passed supercritical-gap certificate");
  uint64_t sample_hash = hash_vectors(gamma_samples);
  if (!a2_certificate.parameters.contains("sample_hash") ||
      a2_certificate.parameters["sample_hash"].get<uint64_t>() != sample_hash)
    fail(ErrorCode::Ordering,
         "gap certificate was computed on different boundary samples; rerun it on this set");
  require_level_grid(time_grid, "time");
  if (gamma_samples.empty()) fail(ErrorCode::Config, "no boundary samples to evaluate");

  Certificate cert;
  cert.check_id = "Lemma1";
  cert.parameters["u_max"] = instance.control_authority;
  cert.parameters["time_grid"] = grid_summary(time_grid);
  cert.parameters["boundary_samples"] = gamma_samples.size();
  cert.parameters["strictness"] = tol::strictness;
  cert.parameters["sample_hash"] = sample_hash;
  cert.parameters["opposing_control"] = "minimizer of <B u, n> subject to ||B u|| <= u_max";

  double global_min = std::numeric_limits<double>::infinity();
  double argmin_time = time_grid.front();
  std::size_t argmin_sample = 0;

  for (double t : time_grid) {
    double kappa = instance.capability.at(t);
    MarginSample worst;
    worst.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gamma_samples.size(); ++i) {
      const Vector& point = gamma_samples[i];
      Vector normal = instance.safe_set.outward_normal(point);
      Vector u_star =
          restoring_optimal_control(instance.control, normal, instance.control_authority);
      double opposing = -instance.control.apply(u_star).dot(normal);
      double uncontrolled = (instance.drift.at(point, t) +
                             instance.endogenous.effect(point, kappa))
                                .dot(normal);

      MarginSample s;
      s.boundary_point = point;
      s.capability = kappa;
      s.time = t;
      s.inward_authority = opposing;        // realized |<B u*, n>|, <= u_max
      s.outward_component = uncontrolled;   // <f + G h, n>, drift taken pointwise
      s.margin = uncontrolled - opposing;   // outward velocity under u*
      if (s.margin < worst.margin) worst = s;
      if (s.margin < global_min) {
        global_min = s.margin;
        argmin_time = t;
        argmin_sample = i;
      }
    }
    cert.margins.push_back(worst);
  }

  cert.verdict = margin_verdict(cert.margins);
  cert.evidence["min_margin"] = global_min;
  cert.evidence["argmin"] = {{"time", argmin_time}, {"sample_index", argmin_sample}};

  cert.declarations.push_back(
      "finite surrogate: worst-case outward velocity checked at " +
      std::to_string(gamma_samples.size()) + " boundary samples and " +
      std::to_string(time_grid.size()) + " grid times");
  cert.declarations.push_back(
      "the opposing control's pointwise extremality is audited separately, not assumed here");

  if (cert.verdict == Verdict::Pass) {
    cert.narrative = "no admissible control holds the boundary: outward velocity stays positive "
                     "under the strongest opposing control at every sampled point and time; "
                     "worst margin " + format_double(global_min) + " at t = " +
                     format_double(argmin_time);
  } else {
    cert.narrative = "outward velocity is not strictly positive at t = " +
                     format_double(argmin_time) + " (sample " + std::to_string(argmin_sample) +
                     "): min margin " + format_double(global_min);
  }
  return cert;
}

}  // namespace invlab
