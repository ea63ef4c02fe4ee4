#include "invlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace invlab {

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::ostringstream out;
  out << "scenario validation failed (" << issues.size()
      << (issues.size() == 1 ? " issue):" : " issues):");
  for (const ValidationIssue& issue : issues)
    out << "\n  " << issue.path << ": " << issue.message;
  return out.str();
}

struct Ctx {
  std::vector<ValidationIssue> issues;
  void add(const std::string& path, const std::string& message) {
    issues.push_back({path, message});
  }
};

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Unknown keys are recorded but do not stop extraction of the known ones;
// a missing required key blocks only its own block.
bool check_keys(const Json& j, const std::string& path, Ctx& ctx,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
  if (!j.is_object()) {
    ctx.add(path.empty() ? "document" : path, "expected a mapping");
    return false;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    auto match = [&](const char* k) { return key == k; };
    if (!std::any_of(required.begin(), required.end(), match) &&
        !std::any_of(optional.begin(), optional.end(), match))
      ctx.add(join(path, key), "unknown key");
  }
  bool ok = true;
  for (const char* key : required)
    if (!j.contains(key)) {
      ctx.add(join(path, key), "required key is missing");
      ok = false;
    }
  return ok;
}

std::optional<double> as_number(const Json& j, const std::string& path, Ctx& ctx) {
  if (!j.is_number()) {
    ctx.add(path, "expected a number");
    return std::nullopt;
  }
  double v = j.get<double>();
  if (!std::isfinite(v)) {
    ctx.add(path, "must be finite");
    return std::nullopt;
  }
  return v;
}

std::optional<long long> as_integer(const Json& j, const std::string& path, Ctx& ctx) {
  if (!j.is_number_integer()) {
    ctx.add(path, "expected an integer");
    return std::nullopt;
  }
  return j.get<long long>();
}

std::optional<std::string> as_string(const Json& j, const std::string& path, Ctx& ctx) {
  if (!j.is_string()) {
    ctx.add(path, "expected a string");
    return std::nullopt;
  }
  return j.get<std::string>();
}

// expected < 0 skips the length check (used when the dimension itself failed).
std::optional<std::vector<double>> as_vector(const Json& j, const std::string& path, Ctx& ctx,
                                             int expected) {
  if (!j.is_array()) {
    ctx.add(path, "expected an array of numbers");
    return std::nullopt;
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto v = as_number(j[i], path + "." + std::to_string(i), ctx);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (expected >= 0 && static_cast<int>(out.size()) != expected) {
    ctx.add(path, "expected " + std::to_string(expected) + " entries, got " +
                      std::to_string(out.size()));
    return std::nullopt;
  }
  return out;
}

// Row-major array of arrays, rectangular.
std::optional<Matrix> as_matrix(const Json& j, const std::string& path, Ctx& ctx, int rows,
                                int cols) {
  if (!j.is_array() || j.empty()) {
    ctx.add(path, "expected a non-empty array of rows");
    return std::nullopt;
  }
  std::vector<std::vector<double>> data;
  for (std::size_t r = 0; r < j.size(); ++r) {
    auto row = as_vector(j[r], path + "." + std::to_string(r), ctx, -1);
    if (!row) return std::nullopt;
    if (!data.empty() && row->size() != data.front().size()) {
      ctx.add(path, "rows have unequal lengths");
      return std::nullopt;
    }
    data.push_back(std::move(*row));
  }
  if (rows >= 0 && static_cast<int>(data.size()) != rows) {
    ctx.add(path, "expected " + std::to_string(rows) + " rows, got " +
                      std::to_string(data.size()));
    return std::nullopt;
  }
  if (cols >= 0 && static_cast<int>(data.front().size()) != cols) {
    ctx.add(path, "expected " + std::to_string(cols) + " columns, got " +
                      std::to_string(data.front().size()));
    return std::nullopt;
  }
  Matrix m(data.size(), data.front().size());
  for (std::size_t r = 0; r < data.size(); ++r)
    for (std::size_t c = 0; c < data[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r][c];
  return m;
}

// n < 0 disables dimension checks downstream of a bad "dimension" field.
void parse_safe_set(const Json& j, const std::string& path, int n, SafeSetSpec& out, Ctx& ctx) {
  if (!j.is_object() || !j.contains("kind")) {
    check_keys(j, path, ctx, {"kind"}, {"center", "radius", "semi_axes", "p"});
    return;
  }
  auto kind = as_string(j["kind"], join(path, "kind"), ctx);
  if (!kind) return;
  out.kind = *kind;
  if (*kind == "ball") {
    if (!check_keys(j, path, ctx, {"kind", "center", "radius"}, {})) return;
    if (auto c = as_vector(j["center"], join(path, "center"), ctx, n)) out.center = *c;
    if (auto r = as_number(j["radius"], join(path, "radius"), ctx)) {
      if (*r <= 0.0) ctx.add(join(path, "radius"), "must be positive");
      out.radius = *r;
    }
  } else if (*kind == "ellipsoid") {
    if (!check_keys(j, path, ctx, {"kind", "center", "semi_axes"}, {})) return;
    if (auto c = as_vector(j["center"], join(path, "center"), ctx, n)) out.center = *c;
    if (auto a = as_vector(j["semi_axes"], join(path, "semi_axes"), ctx, n)) {
      for (double v : *a)
        if (v <= 0.0) {
          ctx.add(join(path, "semi_axes"), "every semi-axis must be positive");
          break;
        }
      out.semi_axes = *a;
    }
  } else if (*kind == "pnorm-ball") {
    if (!check_keys(j, path, ctx, {"kind", "center", "radius", "p"}, {})) return;
    if (auto c = as_vector(j["center"], join(path, "center"), ctx, n)) out.center = *c;
    if (auto r = as_number(j["radius"], join(path, "radius"), ctx)) {
      if (*r <= 0.0) ctx.add(join(path, "radius"), "must be positive");
      out.radius = *r;
    }
    if (auto p = as_integer(j["p"], join(path, "p"), ctx)) {
      if (*p < 2 || *p % 2 != 0) ctx.add(join(path, "p"), "must be an even integer >= 2");
      out.p = static_cast<int>(*p);
    }
  } else {
    ctx.add(join(path, "kind"),
            "unknown safe-set kind '" + *kind + "' (ball, ellipsoid, pnorm-ball)");
  }
}

void parse_gamma(const Json& j, const std::string& path, int n, GammaSpec& out, Ctx& ctx) {
  if (!j.is_object() || !j.contains("kind")) {
    check_keys(j, path, ctx, {"kind"}, {"coeffs", "offset"});
    return;
  }
  auto kind = as_string(j["kind"], join(path, "kind"), ctx);
  if (!kind) return;
  out.kind = *kind;
  if (*kind == "full") {
    check_keys(j, path, ctx, {"kind"}, {});
  } else if (*kind == "halfspace") {
    if (!check_keys(j, path, ctx, {"kind", "coeffs", "offset"}, {})) return;
    if (auto c = as_vector(j["coeffs"], join(path, "coeffs"), ctx, n)) {
      bool nonzero = std::any_of(c->begin(), c->end(), [](double v) { return v != 0.0; });
      if (!nonzero) ctx.add(join(path, "coeffs"), "must not be the zero vector");
      out.coeffs = *c;
    }
    if (auto o = as_number(j["offset"], join(path, "offset"), ctx)) out.offset = *o;
  } else {
    ctx.add(join(path, "kind"), "unknown boundary-region kind '" + *kind + "' (full, halfspace)");
  }
}

void parse_drift(const Json& j, const std::string& path, int n, DriftSpec& out, Ctx& ctx) {
  if (!j.is_object() || !j.contains("kind")) {
    check_keys(j, path, ctx, {"kind"}, {"coefficients"});
    return;
  }
  auto kind = as_string(j["kind"], join(path, "kind"), ctx);
  if (!kind) return;
  out.kind = *kind;
  if (*kind == "zero") {
    check_keys(j, path, ctx, {"kind"}, {});
  } else if (*kind == "linear") {
    if (!check_keys(j, path, ctx, {"kind", "coefficients"}, {})) return;
    if (auto m = as_matrix(j["coefficients"], join(path, "coefficients"), ctx, n, n))
      out.coefficients = *m;
  } else {
    ctx.add(join(path, "kind"), "unknown drift kind '" + *kind + "' (zero, linear)");
  }
}

void parse_drift_bound(const Json& j, const std::string& path, DriftBoundSpec& out, Ctx& ctx) {
  if (!j.is_object() || !j.contains("method")) {
    check_keys(j, path, ctx, {"method"}, {"value", "safety_factor", "samples"});
    return;
  }
  auto method = as_string(j["method"], join(path, "method"), ctx);
  if (!method) return;
  out.method = *method;
  if (*method == "declared") {
    if (!check_keys(j, path, ctx, {"method", "value"}, {})) return;
    if (auto v = as_number(j["value"], join(path, "value"), ctx)) {
      if (*v < 0.0) ctx.add(join(path, "value"), "must be non-negative");
      out.value = *v;
    }
  } else if (*method == "sampled") {
    if (!check_keys(j, path, ctx, {"method"}, {"safety_factor", "samples"})) return;
    if (j.contains("safety_factor")) {
      if (auto f = as_number(j["safety_factor"], join(path, "safety_factor"), ctx)) {
        if (*f < 1.0) ctx.add(join(path, "safety_factor"), "must be at least 1");
        out.safety_factor = *f;
      }
    }
    if (j.contains("samples")) {
      if (auto s = as_integer(j["samples"], join(path, "samples"), ctx)) {
        if (*s < 1) ctx.add(join(path, "samples"), "must be at least 1");
        out.samples = static_cast<int>(*s);
      }
    }
  } else {
    ctx.add(join(path, "method"),
            "unknown drift-bound method '" + *method + "' (declared, sampled)");
  }
}

void parse_control(const Json& j, const std::string& path, int n, ControlSpec& out, Ctx& ctx) {
  if (!check_keys(j, path, ctx, {"matrix", "u_max"}, {})) return;
  if (auto m = as_matrix(j["matrix"], join(path, "matrix"), ctx, n, -1)) out.matrix = *m;
  if (auto u = as_number(j["u_max"], join(path, "u_max"), ctx)) {
    if (*u <= 0.0) ctx.add(join(path, "u_max"), "must be positive");
    out.u_max = *u;
  }
}

void parse_endogenous(const Json& j, const std::string& path, int n, int n_int,
                      EndogenousSpec& out, Ctx& ctx) {
  if (!check_keys(j, path, ctx, {"h"}, {"coupling"})) return;
  const Json& h = j["h"];
  std::string hpath = join(path, "h");
  if (!h.is_object() || !h.contains("kind")) {
    check_keys(h, hpath, ctx, {"kind"}, {"gain", "target", "rate"});
    return;
  }
  auto kind = as_string(h["kind"], join(hpath, "kind"), ctx);
  if (!kind) return;
  out.kind = *kind;
  if (*kind == "radial-outward") {
    check_keys(h, hpath, ctx, {"kind"}, {});
  } else if (*kind == "linear-gain") {
    if (!check_keys(h, hpath, ctx, {"kind"}, {"gain"})) return;
    if (h.contains("gain")) {
      if (auto g = as_number(h["gain"], join(hpath, "gain"), ctx)) out.gain = *g;
    }
  } else if (*kind == "target-seeking") {
    if (!check_keys(h, hpath, ctx, {"kind", "target"}, {})) return;
    if (auto t = as_vector(h["target"], join(hpath, "target"), ctx, n)) out.target = *t;
  } else if (*kind == "internal-drift") {
    if (!check_keys(h, hpath, ctx, {"kind", "rate"}, {})) return;
    if (auto r = as_vector(h["rate"], join(hpath, "rate"), ctx, n_int)) out.rate = *r;
  } else {
    ctx.add(join(hpath, "kind"),
            "unknown endogenous kind '" + *kind +
                "' (radial-outward, linear-gain, target-seeking, internal-drift)");
  }
  if (j.contains("coupling")) {
    // built-in families all produce a state-shaped h
    if (auto g = as_matrix(j["coupling"], join(path, "coupling"), ctx, n, n)) out.coupling = *g;
  }
}

void parse_capability(const Json& j, const std::string& path, CapabilitySpec& out, Ctx& ctx) {
  if (!j.is_object() || !j.contains("kind")) {
    check_keys(j, path, ctx, {"kind"},
               {"level", "initial", "rate", "limit", "growth", "midpoint", "knots"});
    return;
  }
  auto kind = as_string(j["kind"], join(path, "kind"), ctx);
  if (!kind) return;
  out.kind = *kind;
  if (*kind == "constant") {
    if (!check_keys(j, path, ctx, {"kind", "level"}, {})) return;
    if (auto v = as_number(j["level"], join(path, "level"), ctx)) {
      if (*v < 0.0) ctx.add(join(path, "level"), "must be non-negative");
      out.level = *v;
    }
  } else if (*kind == "linear") {
    if (!check_keys(j, path, ctx, {"kind", "initial", "rate"}, {})) return;
    if (auto v = as_number(j["initial"], join(path, "initial"), ctx)) {
      if (*v < 0.0) ctx.add(join(path, "initial"), "must be non-negative");
      out.initial = *v;
    }
    if (auto v = as_number(j["rate"], join(path, "rate"), ctx)) {
      if (*v < 0.0) ctx.add(join(path, "rate"), "must be non-negative");
      out.rate = *v;
    }
  } else if (*kind == "logistic") {
    if (!check_keys(j, path, ctx, {"kind", "limit", "growth", "midpoint"}, {})) return;
    if (auto v = as_number(j["limit"], join(path, "limit"), ctx)) {
      if (*v <= 0.0) ctx.add(join(path, "limit"), "must be positive");
      out.limit = *v;
    }
    if (auto v = as_number(j["growth"], join(path, "growth"), ctx)) {
      if (*v < 0.0) ctx.add(join(path, "growth"), "must be non-negative");
      out.growth = *v;
    }
    if (auto v = as_number(j["midpoint"], join(path, "midpoint"), ctx)) out.midpoint = *v;
  } else if (*kind == "piecewise-linear") {
    if (!check_keys(j, path, ctx, {"kind", "knots"}, {})) return;
    const Json& knots = j["knots"];
    std::string kpath = join(path, "knots");
    if (!knots.is_array() || knots.size() < 2) {
      ctx.add(kpath, "expected at least two [t, value] pairs");
      return;
    }
    double prev_t = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < knots.size(); ++i) {
      auto pair = as_vector(knots[i], kpath + "." + std::to_string(i), ctx, 2);
      if (!pair) return;
      double t = (*pair)[0], v = (*pair)[1];
      if (i == 0 && t < 0.0) ctx.add(kpath, "knot times must start at or after 0");
      if (t <= prev_t) ctx.add(kpath, "knot times must be strictly increasing");
      if (v < 0.0) ctx.add(kpath, "knot values must be non-negative");
      prev_t = t;
      out.knots.push_back({t, v});
    }
  } else {
    ctx.add(join(path, "kind"),
            "unknown capability kind '" + *kind +
                "' (constant, linear, logistic, piecewise-linear)");
  }
}

// m < 0 skips the control-dimension check on constant policies.
void parse_policy(const Json& j, const std::string& path, int m, double default_u_max,
                  PolicySpec& out, Ctx& ctx);

void parse_policy_common(const Json& j, const std::string& path, double default_u_max,
                         PolicySpec& out, Ctx& ctx) {
  if (j.contains("id")) {
    if (auto id = as_string(j["id"], join(path, "id"), ctx)) out.id = *id;
  }
  if (out.id.empty()) out.id = out.kind;
  if (j.contains("u_max")) {
    if (auto u = as_number(j["u_max"], join(path, "u_max"), ctx)) {
      if (*u <= 0.0) ctx.add(join(path, "u_max"), "must be positive");
      out.u_max = *u;
    }
  }
  if (!out.u_max) out.u_max = default_u_max;
}

void parse_policy(const Json& j, const std::string& path, int m, double default_u_max,
                  PolicySpec& out, Ctx& ctx) {
  if (!j.is_object() || !j.contains("kind")) {
    check_keys(j, path, ctx, {"kind"}, {"id", "u_max", "u", "children"});
    return;
  }
  auto kind = as_string(j["kind"], join(path, "kind"), ctx);
  if (!kind) return;
  out.kind = *kind;
  if (*kind == "zero" || *kind == "restoring-optimal") {
    if (!check_keys(j, path, ctx, {"kind"}, {"id", "u_max"})) return;
    parse_policy_common(j, path, default_u_max, out, ctx);
  } else if (*kind == "constant") {
    if (!check_keys(j, path, ctx, {"kind", "u"}, {"id", "u_max"})) return;
    parse_policy_common(j, path, default_u_max, out, ctx);
    if (auto u = as_vector(j["u"], join(path, "u"), ctx, m)) out.u = *u;
  } else if (*kind == "aggregate") {
    if (!check_keys(j, path, ctx, {"kind", "children"}, {"id"})) return;
    if (j.contains("id")) {
      if (auto id = as_string(j["id"], join(path, "id"), ctx)) out.id = *id;
    }
    if (out.id.empty()) out.id = "aggregate";
    const Json& children = j["children"];
    std::string cpath = join(path, "children");
    if (!children.is_array() || children.empty()) {
      ctx.add(cpath, "expected a non-empty array of policies");
      return;
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
      PolicySpec child;
      parse_policy(children[i], cpath + "." + std::to_string(i), m, default_u_max, child, ctx);
      out.children.push_back(std::move(child));
    }
  } else {
    ctx.add(join(path, "kind"),
            "unknown policy kind '" + *kind +
                "' (zero, constant, restoring-optimal, aggregate)");
  }
}

void parse_phi(const Json& j, const std::string& path, int n_int, PhiSpec& out, Ctx& ctx) {
  if (!j.is_object() || !j.contains("kind")) {
    check_keys(j, path, ctx, {"kind"}, {"reference", "radius", "direction", "offset"});
    return;
  }
  auto kind = as_string(j["kind"], join(path, "kind"), ctx);
  if (!kind) return;
  out.kind = *kind;
  if (*kind == "ball") {
    if (!check_keys(j, path, ctx, {"kind", "reference", "radius"}, {})) return;
    if (auto r = as_vector(j["reference"], join(path, "reference"), ctx, n_int))
      out.reference = *r;
    if (auto v = as_number(j["radius"], join(path, "radius"), ctx)) {
      if (*v <= 0.0) ctx.add(join(path, "radius"), "must be positive");
      out.radius = *v;
    }
  } else if (*kind == "halfspace") {
    if (!check_keys(j, path, ctx, {"kind", "direction", "offset"}, {})) return;
    if (auto d = as_vector(j["direction"], join(path, "direction"), ctx, n_int)) {
      bool nonzero = std::any_of(d->begin(), d->end(), [](double v) { return v != 0.0; });
      if (!nonzero) ctx.add(join(path, "direction"), "must not be the zero vector");
      out.direction = *d;
    }
    if (auto o = as_number(j["offset"], join(path, "offset"), ctx)) out.offset = *o;
  } else {
    ctx.add(join(path, "kind"), "unknown phi kind '" + *kind + "' (ball, halfspace)");
  }
}

void parse_strategy(const Json& j, const std::string& path, StrategySpec& out, Ctx& ctx) {
  if (!check_keys(j, path, ctx, {"claimed_class"},
                  {"sustain_policy", "genesis_interventions"}))
    return;
  if (auto c = as_string(j["claimed_class"], join(path, "claimed_class"), ctx)) {
    if (*c != "externally-enforced" && *c != "intrinsic")
      ctx.add(join(path, "claimed_class"),
              "must be 'externally-enforced' or 'intrinsic'");
    out.claimed_class = *c;
  }
  if (j.contains("sustain_policy")) {
    if (auto s = as_string(j["sustain_policy"], join(path, "sustain_policy"), ctx))
      out.sustain_policy = *s;
  }
  if (j.contains("genesis_interventions")) {
    const Json& g = j["genesis_interventions"];
    std::string gpath = join(path, "genesis_interventions");
    if (!g.is_array()) {
      ctx.add(gpath, "expected an array of strings");
    } else {
      for (std::size_t i = 0; i < g.size(); ++i)
        if (auto s = as_string(g[i], gpath + "." + std::to_string(i), ctx))
          out.genesis_interventions.push_back(*s);
    }
  }
}

void parse_numerics(const Json& j, const std::string& path, Numerics& out, Ctx& ctx) {
  if (!check_keys(j, path, ctx, {},
                  {"dt", "horizon", "seed", "boundary_samples", "candidate_count",
                   "kappa_grid_points", "time_grid_points", "audit_samples", "h1_delta",
                   "h1_tolerance", "r4_levels"}))
    return;
  auto positive = [&](const char* key, double& slot) {
    if (!j.contains(key)) return;
    if (auto v = as_number(j[key], join(path, key), ctx)) {
      if (*v <= 0.0) ctx.add(join(path, key), "must be positive");
      slot = *v;
    }
  };
  positive("dt", out.dt);
  positive("horizon", out.horizon);
  positive("h1_delta", out.h1_delta);
  positive("h1_tolerance", out.h1_tolerance);
  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (s.is_number_unsigned())
      out.seed = s.get<uint64_t>();
    else if (s.is_number_integer() && s.get<long long>() >= 0)
      out.seed = static_cast<uint64_t>(s.get<long long>());
    else
      ctx.add(join(path, "seed"), "expected a non-negative integer");
  }
  auto count = [&](const char* key, int& slot, int floor) {
    if (!j.contains(key)) return;
    if (auto v = as_integer(j[key], join(path, key), ctx)) {
      if (*v < floor)
        ctx.add(join(path, key), "must be at least " + std::to_string(floor));
      slot = static_cast<int>(*v);
    }
  };
  count("boundary_samples", out.boundary_samples, 1);
  count("candidate_count", out.candidate_count, 1);
  count("kappa_grid_points", out.kappa_grid_points, 2);
  count("time_grid_points", out.time_grid_points, 2);
  count("audit_samples", out.audit_samples, 1);
  if (j.contains("r4_levels")) {
    if (auto levels = as_vector(j["r4_levels"], join(path, "r4_levels"), ctx, -1))
      out.r4_levels = *levels;
  }
}

void collect_policy_ids(const std::vector<PolicySpec>& suite, Ctx& ctx) {
  std::vector<std::string> seen;
  for (const PolicySpec& p : suite) {
    if (std::find(seen.begin(), seen.end(), p.id) != seen.end())
      ctx.add("policies", "duplicate policy id '" + p.id +
                              "'; give explicit ids to repeated kinds");
    seen.push_back(p.id);
  }
}

Policy build_policy(const PolicySpec& spec, int control_dim) {
  if (spec.kind == "zero") return Policy::zero(control_dim, *spec.u_max).with_id(spec.id);
  if (spec.kind == "constant") {
    Vector u0 = Eigen::Map<const Vector>(spec.u.data(), static_cast<Eigen::Index>(spec.u.size()));
    return Policy::constant(u0, *spec.u_max).with_id(spec.id);
  }
  if (spec.kind == "restoring-optimal")
    return Policy::restoring_optimal(control_dim, *spec.u_max).with_id(spec.id);
  std::vector<Policy> children;
  children.reserve(spec.children.size());
  for (const PolicySpec& child : spec.children) children.push_back(build_policy(child, control_dim));
  return Policy::aggregate(std::move(children)).with_id(spec.id);
}

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json eigen_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json policy_json(const PolicySpec& p) {
  Json j = Json::object();
  j["kind"] = p.kind;
  j["id"] = p.id;
  if (p.kind == "aggregate") {
    Json children = Json::array();
    for (const PolicySpec& child : p.children) children.push_back(policy_json(child));
    j["children"] = std::move(children);
  } else {
    j["u_max"] = p.u_max.value_or(0.0);
    if (p.kind == "constant") j["u"] = p.u;
  }
  return j;
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(ErrorCode::Validation, join_issues(issues)), issues_(std::move(issues)) {}

ScenarioDocument parse_scenario(const Json& document) {
  Ctx ctx;
  ScenarioDocument doc;

  bool is_object = check_keys(
      document, "", ctx,
      {"schema_version", "dimension", "initial_state", "safe_set", "control", "endogenous",
       "capability"},
      {"partition", "gamma", "drift", "drift_bound", "policy", "policies", "phi", "strategy",
       "numerics"});
  is_object = is_object || document.is_object();
  if (!is_object) throw ValidationError(std::move(ctx.issues));

  int n = -1;
  int m = -1;
  if (document.contains("schema_version")) {
    if (auto v = as_integer(document["schema_version"], "schema_version", ctx)) {
      doc.schema_version = static_cast<int>(*v);
      if (*v != 1)
        ctx.add("schema_version", "unsupported version " + std::to_string(*v) +
                                      "; this build reads version 1");
    }
  }
  if (document.contains("dimension")) {
    if (auto v = as_integer(document["dimension"], "dimension", ctx)) {
      if (*v < 1)
        ctx.add("dimension", "must be at least 1");
      else
        n = static_cast<int>(*v);
      doc.dimension = static_cast<int>(*v);
    }
  }

  if (document.contains("partition")) {
    const Json& p = document["partition"];
    if (check_keys(p, "partition", ctx, {"n_env"}, {})) {
      if (auto v = as_integer(p["n_env"], "partition.n_env", ctx)) {
        if (*v < 0 || (n > 0 && *v > n))
          ctx.add("partition.n_env", "must lie in [0, dimension]");
        else
          doc.n_env = static_cast<int>(*v);
      }
    }
  }
  int n_int = n > 0 ? n - doc.n_env : -1;

  if (document.contains("initial_state")) {
    if (auto x0 = as_vector(document["initial_state"], "initial_state", ctx, n))
      doc.initial_state = *x0;
  }

  if (document.contains("safe_set"))
    parse_safe_set(document["safe_set"], "safe_set", n, doc.safe_set, ctx);

  doc.gamma.kind = "full";
  if (document.contains("gamma")) parse_gamma(document["gamma"], "gamma", n, doc.gamma, ctx);

  doc.drift.kind = "zero";
  if (document.contains("drift")) parse_drift(document["drift"], "drift", n, doc.drift, ctx);

  if (document.contains("drift_bound"))
    parse_drift_bound(document["drift_bound"], "drift_bound", doc.drift_bound, ctx);

  if (document.contains("control")) {
    parse_control(document["control"], "control", n, doc.control, ctx);
    if (doc.control.matrix.size() > 0) m = static_cast<int>(doc.control.matrix.cols());
  }

  if (document.contains("endogenous"))
    parse_endogenous(document["endogenous"], "endogenous", n, n_int, doc.endogenous, ctx);
  if (document.contains("capability"))
    parse_capability(document["capability"], "capability", doc.capability, ctx);

  bool has_single = document.contains("policy");
  bool has_suite = document.contains("policies");
  double default_u_max = doc.control.u_max > 0.0 ? doc.control.u_max : 1.0;
  if (has_single && has_suite) {
    ctx.add("policies", "'policy' and 'policies' are mutually exclusive");
  } else if (has_single) {
    PolicySpec p;
    parse_policy(document["policy"], "policy", m, default_u_max, p, ctx);
    doc.policies.push_back(std::move(p));
  } else if (has_suite) {
    const Json& suite = document["policies"];
    if (!suite.is_array() || suite.empty()) {
      ctx.add("policies", "expected a non-empty array of policies");
    } else {
      for (std::size_t i = 0; i < suite.size(); ++i) {
        PolicySpec p;
        parse_policy(suite[i], "policies." + std::to_string(i), m, default_u_max, p, ctx);
        doc.policies.push_back(std::move(p));
      }
    }
  } else {
    ctx.add("policy", "exactly one of 'policy' or 'policies' is required");
  }
  collect_policy_ids(doc.policies, ctx);

  if (document.contains("phi")) {
    PhiSpec phi;
    parse_phi(document["phi"], "phi", n_int, phi, ctx);
    doc.phi = std::move(phi);
  }
  if (document.contains("strategy")) {
    StrategySpec strategy;
    parse_strategy(document["strategy"], "strategy", strategy, ctx);
    if (strategy.sustain_policy) {
      bool found = std::any_of(doc.policies.begin(), doc.policies.end(), [&](const PolicySpec& p) {
        return p.id == *strategy.sustain_policy;
      });
      if (!found)
        ctx.add("strategy.sustain_policy",
                "references unknown policy id '" + *strategy.sustain_policy + "'");
    }
    doc.strategy = std::move(strategy);
  }
  if (document.contains("numerics"))
    parse_numerics(document["numerics"], "numerics", doc.numerics, ctx);

  if (!ctx.issues.empty()) throw ValidationError(std::move(ctx.issues));
  return doc;
}

ScenarioDocument parse_scenario_text(const std::string& text) {
  Json document = Json::parse(text, nullptr, false);
  if (document.is_discarded()) {
    std::vector<ValidationIssue> issues;
    issues.push_back({"document", "parse error: not well-formed"});
    throw ValidationError(std::move(issues));
  }
  return parse_scenario(document);
}

ScenarioDocument load_validate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read scenario file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

Json serialize(const ScenarioDocument& doc) {
  Json j = Json::object();
  j["schema_version"] = doc.schema_version;
  j["dimension"] = doc.dimension;
  j["partition"] = Json{{"n_env", doc.n_env}};
  j["initial_state"] = doc.initial_state;

  Json ss = Json::object();
  ss["kind"] = doc.safe_set.kind;
  ss["center"] = doc.safe_set.center;
  if (doc.safe_set.kind == "ball") {
    ss["radius"] = doc.safe_set.radius;
  } else if (doc.safe_set.kind == "ellipsoid") {
    ss["semi_axes"] = doc.safe_set.semi_axes;
  } else {
    ss["radius"] = doc.safe_set.radius;
    ss["p"] = doc.safe_set.p;
  }
  j["safe_set"] = std::move(ss);

  Json gamma = Json::object();
  gamma["kind"] = doc.gamma.kind;
  if (doc.gamma.kind == "halfspace") {
    gamma["coeffs"] = doc.gamma.coeffs;
    gamma["offset"] = doc.gamma.offset;
  }
  j["gamma"] = std::move(gamma);

  Json drift = Json::object();
  drift["kind"] = doc.drift.kind;
  if (doc.drift.kind == "linear") drift["coefficients"] = eigen_json(doc.drift.coefficients);
  j["drift"] = std::move(drift);

  Json bound = Json::object();
  bound["method"] = doc.drift_bound.method;
  if (doc.drift_bound.method == "declared") {
    bound["value"] = doc.drift_bound.value;
  } else {
    bound["safety_factor"] = doc.drift_bound.safety_factor;
    bound["samples"] = doc.drift_bound.samples;
  }
  j["drift_bound"] = std::move(bound);

  j["control"] = Json{{"matrix", eigen_json(doc.control.matrix)}, {"u_max", doc.control.u_max}};

  Json h = Json::object();
  h["kind"] = doc.endogenous.kind;
  if (doc.endogenous.kind == "linear-gain") h["gain"] = doc.endogenous.gain;
  if (doc.endogenous.kind == "target-seeking") h["target"] = doc.endogenous.target;
  if (doc.endogenous.kind == "internal-drift") h["rate"] = doc.endogenous.rate;
  Json endo = Json::object();
  endo["h"] = std::move(h);
  if (doc.endogenous.coupling) endo["coupling"] = eigen_json(*doc.endogenous.coupling);
  j["endogenous"] = std::move(endo);

  Json cap = Json::object();
  cap["kind"] = doc.capability.kind;
  if (doc.capability.kind == "constant") {
    cap["level"] = doc.capability.level;
  } else if (doc.capability.kind == "linear") {
    cap["initial"] = doc.capability.initial;
    cap["rate"] = doc.capability.rate;
  } else if (doc.capability.kind == "logistic") {
    cap["limit"] = doc.capability.limit;
    cap["growth"] = doc.capability.growth;
    cap["midpoint"] = doc.capability.midpoint;
  } else {
    Json knots = Json::array();
    for (const auto& knot : doc.capability.knots)
      knots.push_back(Json::array({knot[0], knot[1]}));
    cap["knots"] = std::move(knots);
  }
  j["capability"] = std::move(cap);

  Json suite = Json::array();
  for (const PolicySpec& p : doc.policies) suite.push_back(policy_json(p));
  j["policies"] = std::move(suite);

  if (doc.phi) {
    Json phi = Json::object();
    phi["kind"] = doc.phi->kind;
    if (doc.phi->kind == "ball") {
      phi["reference"] = doc.phi->reference;
      phi["radius"] = doc.phi->radius;
    } else {
      phi["direction"] = doc.phi->direction;
      phi["offset"] = doc.phi->offset;
    }
    j["phi"] = std::move(phi);
  }
  if (doc.strategy) {
    Json strategy = Json::object();
    if (doc.strategy->sustain_policy) strategy["sustain_policy"] = *doc.strategy->sustain_policy;
    strategy["genesis_interventions"] = doc.strategy->genesis_interventions;
    strategy["claimed_class"] = doc.strategy->claimed_class;
    j["strategy"] = std::move(strategy);
  }

  const Numerics& num = doc.numerics;
  Json numerics = Json::object();
  numerics["dt"] = num.dt;
  numerics["horizon"] = num.horizon;
  numerics["seed"] = num.seed;
  numerics["boundary_samples"] = num.boundary_samples;
  numerics["candidate_count"] = num.candidate_count;
  numerics["kappa_grid_points"] = num.kappa_grid_points;
  numerics["time_grid_points"] = num.time_grid_points;
  numerics["audit_samples"] = num.audit_samples;
  numerics["h1_delta"] = num.h1_delta;
  numerics["h1_tolerance"] = num.h1_tolerance;
  numerics["r4_levels"] = num.r4_levels;
  j["numerics"] = std::move(numerics);
  return j;
}

std::string scenario_fingerprint(const ScenarioDocument& doc) {
  uint64_t hash = fnv1a64(serialize(doc).dump());
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buffer);
}

Instance build_instance(const ScenarioDocument& doc) {
  StatePartition partition(doc.dimension, doc.n_env);
  Vector x0 = to_eigen(doc.initial_state);

  SafeSet safe_set = [&] {
    if (doc.safe_set.kind == "ball")
      return SafeSet::ball(to_eigen(doc.safe_set.center), doc.safe_set.radius);
    if (doc.safe_set.kind == "ellipsoid")
      return SafeSet::ellipsoid(to_eigen(doc.safe_set.center), to_eigen(doc.safe_set.semi_axes));
    return SafeSet::pnorm_ball(to_eigen(doc.safe_set.center), doc.safe_set.radius,
                               doc.safe_set.p);
  }();

  BoundaryRegion gamma = doc.gamma.kind == "full"
                             ? BoundaryRegion::full()
                             : BoundaryRegion::halfspace(to_eigen(doc.gamma.coeffs),
                                                         doc.gamma.offset);

  Drift drift = doc.drift.kind == "zero" ? Drift::zero(doc.dimension)
                                         : Drift::linear(doc.drift.coefficients);

  ControlChannel control(doc.control.matrix);

  EndogenousChannel endogenous = [&] {
    if (doc.endogenous.kind == "radial-outward")
      return EndogenousChannel::radial_outward(doc.dimension);
    if (doc.endogenous.kind == "linear-gain")
      return EndogenousChannel::linear_gain(doc.dimension, doc.endogenous.gain);
    if (doc.endogenous.kind == "target-seeking")
      return EndogenousChannel::target_seeking(to_eigen(doc.endogenous.target));
    return EndogenousChannel::internal_drift(partition, to_eigen(doc.endogenous.rate));
  }();
  if (doc.endogenous.coupling) endogenous.with_coupling(*doc.endogenous.coupling);

  CapabilitySchedule capability = [&] {
    if (doc.capability.kind == "constant")
      return CapabilitySchedule::constant(doc.capability.level);
    if (doc.capability.kind == "linear")
      return CapabilitySchedule::linear(doc.capability.initial, doc.capability.rate);
    if (doc.capability.kind == "logistic")
      return CapabilitySchedule::logistic(doc.capability.limit, doc.capability.growth,
                                          doc.capability.midpoint);
    return CapabilitySchedule::piecewise_linear(doc.capability.knots);
  }();

  DriftBound drift_bound;
  if (doc.drift_bound.method == "declared") {
    drift_bound = declared_drift_bound(doc.drift_bound.value);
  } else {
    auto field = [&drift](const Vector& x, double t) { return drift.at(x, t); };
    drift_bound = estimate_drift_bound(field, safe_set,
                                       linspace(0.0, doc.numerics.horizon, 9),
                                       doc.drift_bound.samples,
                                       derive_seed(doc.numerics.seed, "drift-bound"),
                                       doc.drift_bound.safety_factor);
  }

  int control_dim = static_cast<int>(doc.control.matrix.cols());
  std::vector<Policy> policies;
  policies.reserve(doc.policies.size());
  for (const PolicySpec& spec : doc.policies) policies.push_back(build_policy(spec, control_dim));

  Instance instance(partition, std::move(x0), std::move(safe_set), std::move(gamma),
                    std::move(drift), drift_bound, std::move(control), doc.control.u_max,
                    std::move(endogenous), std::move(capability), std::move(policies),
                    doc.numerics);

  if (doc.phi) {
    instance.phi = doc.phi->kind == "ball"
                       ? PhiPredicate::ball(to_eigen(doc.phi->reference), doc.phi->radius)
                       : PhiPredicate::halfspace(to_eigen(doc.phi->direction), doc.phi->offset);
  }
  if (doc.strategy) {
    StrategyDeclaration declaration;
    declaration.sustain_policy_id = doc.strategy->sustain_policy;
    declaration.genesis_interventions = doc.strategy->genesis_interventions;
    declaration.claimed = doc.strategy->claimed_class == "intrinsic"
                              ? StrategyClass::Intrinsic
                              : StrategyClass::ExternallyEnforced;
    instance.strategy = declaration;
  }
  instance.fingerprint = scenario_fingerprint(doc);
  return instance;
}

ScenarioDocument with_zero_policy(const ScenarioDocument& doc) {
  ScenarioDocument out = doc;
  PolicySpec zero;
  zero.kind = "zero";
  zero.id = "zero";
  zero.u_max = doc.control.u_max;
  out.policies = {std::move(zero)};
  return out;
}

ScenarioDocument patched(const ScenarioDocument& doc, const std::string& dotted_path,
                         double value) {
  if (dotted_path.empty()) fail(ErrorCode::Config, "sweep path must not be empty");
  Json root = serialize(doc);
  Json* node = &root;
  std::size_t start = 0;
  while (start <= dotted_path.size()) {
    std::size_t dot = dotted_path.find('.', start);
    std::string segment = dotted_path.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (segment.empty())
      fail(ErrorCode::Config, "sweep path '" + dotted_path + "' has an empty segment");
    if (node->is_object()) {
      if (!node->contains(segment))
        fail(ErrorCode::Config,
             "sweep path '" + dotted_path + "': no key '" + segment + "'");
      node = &(*node)[segment];
    } else if (node->is_array()) {
      if (!std::all_of(segment.begin(), segment.end(),
                       [](char c) { return c >= '0' && c <= '9'; }))
        fail(ErrorCode::Config,
             "sweep path '" + dotted_path + "': '" + segment + "' is not an array index");
      std::size_t index = std::stoul(segment);
      if (index >= node->size())
        fail(ErrorCode::Config, "sweep path '" + dotted_path + "': index " + segment +
                                    " is out of range");
      node = &(*node)[index];
    } else {
      fail(ErrorCode::Config,
           "sweep path '" + dotted_path + "' descends into a scalar at '" + segment + "'");
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_number())
    fail(ErrorCode::Config, "sweep path '" + dotted_path + "' must name a number");
  if (node->is_number_integer() && value == std::floor(value) &&
      std::abs(value) < 9.0e18) {
    *node = static_cast<long long>(value);
  } else {
    *node = value;
  }
  return parse_scenario(root);
}

}  // namespace invlab
