#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace invlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  Domain,       // argument outside the operation's domain
  Dimension,    // mismatched vector/matrix shapes
  Config,       // invalid configuration or precondition
  Bracket,      // bisection inputs do not bracket a sign change
  Ordering,     // pipeline stage invoked before its prerequisites
  Divergence,   // non-finite state during integration
  Policy,       // policy produced an unusable control
  EmptyRegion,  // sampler exhausted its attempt budget
  InvalidField, // channel evaluated to a non-finite value
  Io,           // file system failure
  Validation,   // scenario document rejected
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// Pinned numerical conventions. Recorded in every certificate that uses them.
namespace tol {
inline constexpr double boundary_band = 1e-9;     // |g| below this counts as boundary
inline constexpr double gradient_floor = 1e-9;    // below this the normal is degenerate
inline constexpr double fd_step = 1e-6;           // finite-difference probe step
inline constexpr double strictness = 1e-9;        // floor for "strictly positive" margins
inline constexpr double monotone_slack = 1e-12;   // tolerated decrease in monotone audits
inline constexpr double bound_slack = 1e-12;      // tolerated overshoot of ||B u|| past the bound
inline constexpr double audit_slack = 1e-9;       // looser bound tolerance for standalone audits
inline constexpr double normal_unit_slack = 1e-9; // ||n|| must be within this of 1
inline constexpr double kappa_star_width = 1e-6;  // terminal bracket width for the threshold
inline constexpr double crossing_time = 1e-9;     // terminal bracket width for event times
inline constexpr double projection_floor = 1e-12; // below this the normal is outside range(B)
inline constexpr long sampler_budget = 1000000;   // rejection sampling attempt cap
}  // namespace tol

uint64_t fnv1a64(std::string_view text);
uint64_t splitmix64(uint64_t state);

// Substream seed for one named consumer of a master seed. The (master, label)
// pair is recorded in reports so every random draw is attributable.
uint64_t derive_seed(uint64_t master, std::string_view label);

// Deterministic generator. Uniform and gaussian draws are implemented here
// rather than with std distributions so sequences are identical across
// standard libraries.
class SplitRng {
 public:
  explicit SplitRng(uint64_t seed) : gen_(seed) {}

  double uniform01();  // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);
  double gaussian();   // Box-Muller
  Vector gaussian_vector(Eigen::Index n);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

bool all_finite(const Vector& v);
void require_dimension(const Vector& v, Eigen::Index expected, const std::string& what);

// 17 significant digits; round-trips IEEE doubles exactly.
std::string format_double(double value);

std::vector<double> linspace(double lo, double hi, int points);

uint64_t hash_vectors(const std::vector<Vector>& points);

}  // namespace invlab
