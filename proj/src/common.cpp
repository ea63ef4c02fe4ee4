#include "invlab/common.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

namespace invlab {

uint64_t fnv1a64(std::string_view text) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

uint64_t splitmix64(uint64_t state) {
  state += 0x9e3779b97f4a7c15ull;
  state = (state ^ (state >> 30)) * 0xbf58476d1ce4e5b9ull;
  state = (state ^ (state >> 27)) * 0x94d049bb133111ebull;
  return state ^ (state >> 31);
}

uint64_t derive_seed(uint64_t master, std::string_view label) {
  return splitmix64(master ^ fnv1a64(label));
}

double SplitRng::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double SplitRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double SplitRng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  double u2 = uniform01();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

Vector SplitRng::gaussian_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
  return v;
}

bool all_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

void require_dimension(const Vector& v, Eigen::Index expected, const std::string& what) {
  if (v.size() != expected) {
    fail(ErrorCode::Dimension, what + " has dimension " + std::to_string(v.size()) +
                                   ", expected " + std::to_string(expected));
  }
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) fail(ErrorCode::Config, "linspace needs at least two points");
  if (!(hi >= lo)) fail(ErrorCode::Config, "linspace needs hi >= lo");
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  out.back() = hi;
  return out;
}

uint64_t hash_vectors(const std::vector<Vector>& points) {
  uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](uint64_t bits) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (bits >> (8 * b)) & 0xffull;
      hash *= 1099511628211ull;
    }
  };
  mix(points.size());
  for (const Vector& p : points) {
    mix(static_cast<uint64_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      uint64_t bits;
      double value = p[i];
      static_assert(sizeof(bits) == sizeof(value));
      std::memcpy(&bits, &value, sizeof(bits));
      mix(bits);
    }
  }
  return hash;
}

}  // namespace invlab
