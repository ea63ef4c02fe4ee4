#include "invlab/cli.hpp"

#include "invlab/audits.hpp"
#include "invlab/intrinsic.hpp"
#include "invlab/report.hpp"
#include "invlab/scenario.hpp"
#include "invlab/simulator.hpp"
#include "invlab/supercritical.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

namespace invlab {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertificate = 2;
constexpr int kExitConfig = 3;
constexpr int kExitDivergence = 4;
constexpr double kProbeCeiling = 1e12;

std::string pad(const std::string& text, std::size_t width) {
  if (text.size() >= width) return text + "  ";
  return text + std::string(width - text.size(), ' ');
}

struct GlobalOptions {
  std::optional<uint64_t> seed;
  std::string report_path;
  bool json = false;
};

uint64_t parse_seed_text(const std::string& text, const std::string& origin) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::Config, origin + " is not a non-negative integer: '" + text + "'");
  }
  if (used != text.size())
    fail(ErrorCode::Config, origin + " is not a non-negative integer: '" + text + "'");
  return static_cast<uint64_t>(value);
}

// Seed precedence: --seed flag, then INVLAB_SEED, then the document.
ScenarioDocument load_scenario(const std::string& path, const GlobalOptions& global) {
  ScenarioDocument doc = load_validate(path);
  if (global.seed) {
    doc.numerics.seed = *global.seed;
  } else if (const char* env = std::getenv("INVLAB_SEED")) {
    doc.numerics.seed = parse_seed_text(env, "INVLAB_SEED");
  }
  return doc;
}

void emit(const GlobalOptions& global, const Json& machine, const std::string& human) {
  if (global.json)
    std::cout << machine.dump(2) << "\n";
  else
    std::cout << human;
  if (!global.report_path.empty()) write_json_file(global.report_path, machine);
}

Json trajectory_json(const Trajectory& traj) {
  Json j = Json::object();
  j["report"] = "trajectory";
  j["policy"] = traj.policy_id;
  j["terminated"] = termination_name(traj.terminated);
  j["samples"] = traj.samples.size();
  j["dt"] = traj.dt;
  j["max_control_norm"] = traj.max_control_norm;
  j["clip_count"] = traj.clip_count;
  if (!traj.error_message.empty()) j["error"] = traj.error_message;
  Json events = Json::array();
  for (const TrajectoryEvent& e : traj.events) {
    Json row = Json::object();
    row["type"] = event_type_name(e.type);
    row["time"] = e.time;
    row["state"] = vector_json(e.state);
    if (e.type == EventType::Clip) row["count"] = e.count;
    events.push_back(std::move(row));
  }
  j["events"] = std::move(events);
  if (!traj.samples.empty()) {
    const TrajectorySample& last = traj.samples.back();
    j["final"] = Json{{"t", last.t},
                      {"x", vector_json(last.x)},
                      {"kappa", last.kappa},
                      {"g", last.g}};
  }
  return j;
}

std::string trajectory_text(const Trajectory& traj) {
  std::ostringstream out;
  out << "policy '" << traj.policy_id << "': " << traj.samples.size()
      << " samples, terminated " << termination_name(traj.terminated) << "\n";
  if (!traj.error_message.empty()) out << "error: " << traj.error_message << "\n";
  for (const TrajectoryEvent& e : traj.events) {
    out << "event: " << event_type_name(e.type) << " at t = " << format_double(e.time);
    if (e.type == EventType::Clip && e.count > 1) out << " (x" << e.count << ")";
    out << "\n";
  }
  if (!traj.samples.empty()) {
    const TrajectorySample& last = traj.samples.back();
    out << "final: t = " << format_double(last.t) << ", g = " << format_double(last.g)
        << ", kappa = " << format_double(last.kappa) << "\n";
  }
  out << "max ||B u|| = " << format_double(traj.max_control_norm)
      << ", clipped evaluations = " << traj.clip_count << "\n";
  return out.str();
}

struct GapResult {
  std::vector<Vector> samples;
  bool threshold_found = false;
  ThresholdResult threshold;
  Certificate a2;
};

// Threshold plus the gap certificate over the supercritical window, the same
// regime logic the harness applies before the escape phase.
GapResult compute_gap(const Instance& instance) {
  GapResult gap;
  gap.samples = instance.gamma_samples(instance.numerics.boundary_samples, "gamma-samples");
  double horizon = instance.numerics.horizon;
  double kappa0 = instance.capability.at(0.0);
  double kappa_end = instance.capability.at(horizon);
  int grid_points = std::max(2, instance.numerics.kappa_grid_points);

  double margin_end = min_margin(instance, gap.samples, kappa_end);
  if (margin_end <= tol::strictness) {
    std::vector<double> grid = kappa_end - kappa0 > 1e-12
                                   ? linspace(kappa0, kappa_end, grid_points)
                                   : std::vector<double>{kappa0};
    gap.a2 = certify_a2(instance, gap.samples, grid);
    return gap;
  }

  double margin0 = min_margin(instance, gap.samples, kappa0);
  if (margin0 > tol::strictness) {
    gap.threshold.kappa_star = kappa0;
    gap.threshold.t_kappa = 0.0;
    gap.threshold.margin_at_star = margin0;
    gap.threshold.parameters["note"] =
        "already supercritical at t = 0; the threshold is reported as kappa(0)";
    gap.threshold.parameters["boundary_samples"] = gap.samples.size();
    gap.threshold.parameters["sample_hash"] = hash_vectors(gap.samples);
  } else {
    gap.threshold = find_kappa_star(instance, gap.samples, kappa0, kappa_end);
  }
  gap.threshold_found = true;
  double t_kappa = std::min(gap.threshold.t_kappa.value(), horizon);
  gap.threshold.t_kappa = t_kappa;

  double kappa_at_t = instance.capability.at(t_kappa);
  std::vector<double> grid = kappa_end - kappa_at_t > 1e-12
                                 ? linspace(kappa_at_t, kappa_end, grid_points)
                                 : std::vector<double>{kappa_at_t};
  gap.a2 = certify_a2(instance, gap.samples, grid);
  return gap;
}

int run_simulate(const std::string& scenario_path, const std::string& policy_id,
                 const std::string& csv_path, const GlobalOptions& global) {
  ScenarioDocument doc = load_scenario(scenario_path, global);
  Instance instance = build_instance(doc);
  const Policy* policy = &instance.default_policy();
  if (!policy_id.empty()) {
    policy = instance.find_policy(policy_id);
    if (!policy)
      fail(ErrorCode::Config, "no policy with id '" + policy_id + "' in the scenario");
  }
  Trajectory traj = simulate(instance, *policy);
  if (!csv_path.empty()) emit_trajectory_csv(traj, csv_path);
  emit(global, trajectory_json(traj), trajectory_text(traj));
  return traj.terminated == Termination::Error ? kExitDivergence : kExitOk;
}

int run_certify(const std::string& scenario_path, const std::string& checks_arg,
                const GlobalOptions& global) {
  std::vector<std::string> known = {"a1", "h1", "h2", "a2", "lemma1", "a3"};
  std::vector<std::string> requested;
  std::stringstream tokens(checks_arg);
  std::string token;
  while (std::getline(tokens, token, ',')) {
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (token.empty()) continue;
    if (std::find(known.begin(), known.end(), token) == known.end())
      fail(ErrorCode::Config,
           "unknown check '" + token + "' (a1, a2, a3, h1, h2, lemma1)");
    if (std::find(requested.begin(), requested.end(), token) == requested.end())
      requested.push_back(token);
  }
  if (requested.empty()) fail(ErrorCode::Config, "no checks requested");

  ScenarioDocument doc = load_scenario(scenario_path, global);
  Instance instance = build_instance(doc);
  auto wants = [&](const char* id) {
    return std::find(requested.begin(), requested.end(), id) != requested.end();
  };

  std::vector<Certificate> certs;
  if (wants("a1")) certs.push_back(certify_a1(instance));
  if (wants("h1")) certs.push_back(certify_h1(instance));
  if (wants("h2")) certs.push_back(certify_h2(instance));

  if (wants("a2") || wants("lemma1") || wants("a3")) {
    GapResult gap = compute_gap(instance);
    if (wants("a2")) certs.push_back(gap.a2);
    if (wants("lemma1")) {
      if (gap.a2.verdict == Verdict::Pass && gap.threshold_found) {
        double t_kappa = gap.threshold.t_kappa.value();
        double horizon = instance.numerics.horizon;
        std::vector<double> grid =
            horizon - t_kappa > 1e-12
                ? linspace(t_kappa, horizon, std::max(2, instance.numerics.time_grid_points))
                : std::vector<double>{t_kappa};
        certs.push_back(lemma1_certificate(instance, gap.samples, grid, gap.a2));
      } else {
        Certificate stub;
        stub.check_id = "Lemma1";
        stub.narrative = "not evaluated: the supercritical gap was not certified";
        certs.push_back(stub);
      }
    }
    if (wants("a3")) {
      if (gap.threshold_found) {
        certs.push_back(certify_a3(instance, instance.default_policy(),
                                   default_candidates(instance), gap.threshold));
      } else {
        Certificate stub;
        stub.check_id = "A3";
        stub.narrative =
            "not evaluated: the schedule never reaches a supercritical level within the "
            "horizon";
        certs.push_back(stub);
      }
    }
  }

  emit(global, certificates_json(certs), certificates_text(certs));
  bool all_pass = std::all_of(certs.begin(), certs.end(), [](const Certificate& c) {
    return c.verdict == Verdict::Pass;
  });
  return all_pass ? kExitOk : kExitCertificate;
}

int run_threshold(const std::string& scenario_path, const GlobalOptions& global) {
  ScenarioDocument doc = load_scenario(scenario_path, global);
  Instance instance = build_instance(doc);
  std::vector<Vector> samples =
      instance.gamma_samples(instance.numerics.boundary_samples, "gamma-samples");
  double kappa0 = instance.capability.at(0.0);
  double kappa_end = instance.capability.at(instance.numerics.horizon);

  double margin0 = min_margin(instance, samples, kappa0);
  ThresholdResult threshold;
  if (margin0 > tol::strictness) {
    threshold.kappa_star = kappa0;
    threshold.t_kappa = 0.0;
    threshold.margin_at_star = margin0;
    threshold.parameters["note"] =
        "already supercritical at t = 0; the threshold is reported as kappa(0)";
  } else {
    // the threshold is a property of the geometry; probe capability levels
    // beyond the schedule range until the margin turns positive
    double hi = kappa_end;
    if (min_margin(instance, samples, hi) <= tol::strictness) {
      hi = std::max(1.0, 2.0 * std::max(kappa_end, 1.0));
      while (hi <= kProbeCeiling && min_margin(instance, samples, hi) <= tol::strictness)
        hi *= 2.0;
      if (hi > kProbeCeiling) {
        Json j = Json::object();
        j["report"] = "threshold";
        j["found"] = false;
        j["probe_ceiling"] = kProbeCeiling;
        emit(global, j,
             "kappa_star = none found (the min margin stays below the strictness floor up "
             "to kappa = 1e12)\n");
        return kExitCertificate;
      }
    }
    threshold = find_kappa_star(instance, samples, kappa0, hi);
  }

  Json j = to_json(threshold);
  j["report"] = "threshold";
  j["found"] = true;
  emit(global, j, threshold_text(threshold));
  return kExitOk;
}

int run_harness_command(const std::string& scenario_path, const GlobalOptions& global) {
  ScenarioDocument doc = load_scenario(scenario_path, global);
  Instance instance = build_instance(doc);
  HarnessReport report = run_harness(instance);
  emit(global, to_json(report), harness_text(report));
  return report.instantiated ? kExitOk : kExitCertificate;
}

int run_requirements_command(const std::string& scenario_path, const GlobalOptions& global) {
  ScenarioDocument doc = load_scenario(scenario_path, global);
  Instance instance = build_instance(doc);
  RequirementsReport report = run_requirements(instance);
  emit(global, to_json(report), requirements_text(report));
  bool all_pass = report.r1.verdict == Verdict::Pass && report.r2.verdict == Verdict::Pass &&
                  report.r3.verdict == Verdict::Pass && report.r4.verdict == Verdict::Pass;
  return all_pass ? kExitOk : kExitCertificate;
}

int run_sweep(const std::string& scenario_path, const std::string& param,
              const std::string& values_arg, const GlobalOptions& global) {
  std::vector<double> values;
  std::stringstream tokens(values_arg);
  std::string token;
  while (std::getline(tokens, token, ',')) {
    if (token.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail(ErrorCode::Config, "sweep value '" + token + "' is not a number");
    }
    if (used != token.size())
      fail(ErrorCode::Config, "sweep value '" + token + "' is not a number");
    values.push_back(v);
  }
  if (values.empty()) fail(ErrorCode::Config, "sweep needs at least one value");

  ScenarioDocument doc = load_scenario(scenario_path, global);
  patched(doc, param, values.front());  // surface path errors before running

  Json rows = Json::array();
  std::ostringstream text;
  text << pad(param, 24) << pad("verdict", 44) << "kappa_star\n";
  for (double value : values) {
    Json row = Json::object();
    row["value"] = value;
    std::string verdict;
    std::string kappa_label = "-";
    try {
      ScenarioDocument variant = patched(doc, param, value);
      Instance instance = build_instance(variant);
      HarnessReport report = run_harness(instance);
      verdict = report.verdict;
      row["verdict"] = report.verdict;
      row["instantiated"] = report.instantiated;
      if (report.threshold_found) {
        row["kappa_star"] = report.threshold.kappa_star;
        kappa_label = format_double(report.threshold.kappa_star);
      }
    } catch (const Error& e) {
      verdict = std::string("error: ") + e.what();
      row["error"] = e.what();
    }
    rows.push_back(std::move(row));
    text << pad(format_double(value), 24) << pad(verdict, 44) << kappa_label << "\n";
  }

  Json j = Json::object();
  j["report"] = "sweep";
  j["param"] = param;
  j["rows"] = std::move(rows);
  emit(global, j, text.str());
  return kExitOk;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"scenario-driven safety-premise certification and simulation"};
  app.require_subcommand(1);

  GlobalOptions global;
  uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value,
                                  "master seed overriding INVLAB_SEED and the document");
  app.add_option("--report", global.report_path, "write the machine report to this path");
  app.add_flag("--json", global.json, "print the machine report to stdout");

  std::string scenario_path, policy_id, csv_path, checks = "a1,h1,h2,a2,lemma1,a3";
  std::string sweep_param, sweep_values;

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "integrate one trajectory");
  simulate_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  simulate_cmd->add_option("--policy", policy_id, "policy id (default: first in the suite)");
  simulate_cmd->add_option("--out", csv_path, "write the trajectory CSV here");

  CLI::App* certify_cmd = app.add_subcommand("certify", "run premise certificates");
  certify_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  certify_cmd->add_option("--checks", checks, "comma list from a1,a2,a3,h1,h2,lemma1");

  CLI::App* threshold_cmd =
      app.add_subcommand("threshold", "locate the supercritical capability threshold");
  threshold_cmd->add_option("scenario", scenario_path, "scenario file")->required();

  CLI::App* harness_cmd =
      app.add_subcommand("harness", "full escape harness over the policy suite");
  harness_cmd->add_option("scenario", scenario_path, "scenario file")->required();

  CLI::App* requirements_cmd =
      app.add_subcommand("requirements", "intrinsic sustainment audits R1-R4");
  requirements_cmd->add_option("scenario", scenario_path, "scenario file")->required();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "rerun the harness over parameter values");
  sweep_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  sweep_cmd->add_option("--param", sweep_param, "dotted path of a numeric field")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma list of values")->required();

  std::vector<const char*> argv;
  argv.push_back("invlab");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (seed_opt->count() > 0) global.seed = seed_value;

  try {
    if (simulate_cmd->parsed()) return run_simulate(scenario_path, policy_id, csv_path, global);
    if (certify_cmd->parsed()) return run_certify(scenario_path, checks, global);
    if (threshold_cmd->parsed()) return run_threshold(scenario_path, global);
    if (harness_cmd->parsed()) return run_harness_command(scenario_path, global);
    if (requirements_cmd->parsed()) return run_requirements_command(scenario_path, global);
    if (sweep_cmd->parsed()) return run_sweep(scenario_path, sweep_param, sweep_values, global);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Divergence ? kExitDivergence : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace invlab
