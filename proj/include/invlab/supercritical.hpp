#pragma once

#include "invlab/certificate.hpp"
#include "invlab/instance.hpp"

#include <optional>
#include <vector>

namespace invlab {

// Margin of the endogenous outward push over the combined inward authority
// U_max + M_f at one boundary point and capability level.
MarginSample a2_margin(const Instance& instance, const Vector& boundary_point, double kappa,
                       double time = 0.0);

double min_margin(const Instance& instance, const std::vector<Vector>& gamma_samples,
                  double kappa);

// Checks margin > 0 (floor 1e-9) at every (sample, grid level). The grid is a
// finite surrogate for the for-all-t claim and the certificate says so.
Certificate certify_a2(const Instance& instance, const std::vector<Vector>& gamma_samples,
                       const std::vector<double>& kappa_grid);

struct ThresholdResult {
  double kappa_star = 0.0;
  // First schedule time reaching kappa_star; nullopt when never reached.
  std::optional<double> t_kappa;
  // Worst-case margin at kappa_star (strictly above the floor by bisection).
  double margin_at_star = 0.0;
  bool margin_monotone_on_grid = true;
  Json parameters = Json::object();
};

// Bisection for the capability threshold: smallest level in [kappa_lo,
// kappa_hi] whose min margin over the samples clears the strictness floor,
// to bracket width 1e-6. Requires the bracket to straddle the threshold, the
// channel to pass the scaling audit on the bracket, and the schedule to be
// non-decreasing on an audit grid.
ThresholdResult find_kappa_star(const Instance& instance,
                                const std::vector<Vector>& gamma_samples, double kappa_lo,
                                double kappa_hi);

// Worst-case outward velocity component at each (boundary sample, grid time):
// <f + B u* + G h, n> with u* the restoring-optimal extremal. Strict
// positivity everywhere certifies that no admissible control can hold the
// boundary at those times. Requires a passed gap certificate on the same
// samples.
Certificate lemma1_certificate(const Instance& instance,
                               const std::vector<Vector>& gamma_samples,
                               const std::vector<double>& time_grid,
                               const Certificate& a2_certificate);

}  // namespace invlab
