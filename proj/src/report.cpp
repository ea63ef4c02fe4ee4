#include "invlab/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace invlab {

namespace {

const Certificate* find_check(const std::vector<Certificate>& certs, const std::string& id) {
  for (const Certificate& c : certs)
    if (c.check_id == id) return &c;
  return nullptr;
}

std::string pad(const std::string& text, std::size_t width) {
  if (text.size() >= width) return text + " ";
  return text + std::string(width - text.size(), ' ');
}

std::string min_margin_label(const Certificate& cert) {
  if (cert.margins.empty()) return "-";
  double best = cert.margins.front().margin;
  for (const MarginSample& m : cert.margins) best = std::min(best, m.margin);
  return format_double(best);
}

Json optional_time(const std::optional<double>& t) {
  if (t) return Json(*t);
  return Json();
}

}  // namespace

void emit_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  if (trajectory.samples.empty())
    fail(ErrorCode::Config, "cannot emit an empty trajectory");
  const TrajectorySample& first = trajectory.samples.front();
  Eigen::Index n = first.x.size();
  Eigen::Index m = first.u.size();

  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << i;
  out << ",kappa";
  for (Eigen::Index j = 0; j < m; ++j) out << ",u_" << j;
  out << ",g\n";

  for (const TrajectorySample& s : trajectory.samples) {
    out << format_double(s.t);
    for (Eigen::Index i = 0; i < n; ++i) out << "," << format_double(s.x[i]);
    out << "," << format_double(s.kappa);
    for (Eigen::Index j = 0; j < m; ++j) out << "," << format_double(s.u[j]);
    out << "," << format_double(s.g) << "\n";
  }
  for (const TrajectoryEvent& event : trajectory.events) {
    out << "# event," << event_type_name(event.type) << "," << format_double(event.time);
    for (Eigen::Index i = 0; i < event.state.size(); ++i)
      out << "," << format_double(event.state[i]);
    out << "\n";
  }
}

void emit_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write trajectory to '" + path + "'");
  emit_trajectory_csv(trajectory, out);
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

std::string overall_narrative(const std::vector<Certificate>& certificates) {
  const Certificate* a2 = find_check(certificates, "A2");
  const Certificate* lemma1 = find_check(certificates, "Lemma1");
  const Certificate* theorem1 = find_check(certificates, "Theorem1");
  if (a2 && a2->verdict == Verdict::Fail)
    return "subcritical regime; Theorem 1 not instantiated";
  if (a2 && lemma1 && theorem1 && a2->verdict == Verdict::Pass &&
      lemma1->verdict == Verdict::Pass && theorem1->verdict == Verdict::Pass)
    return "externally enforced class fails on this instance; premises certified numerically";
  std::size_t passed = 0;
  for (const Certificate& c : certificates)
    if (c.verdict == Verdict::Pass) ++passed;
  return std::to_string(passed) + " of " + std::to_string(certificates.size()) +
         " checks passed";
}

Json certificates_json(const std::vector<Certificate>& certificates) {
  Json j = Json::object();
  j["report"] = "certificates";
  std::size_t passed = 0, failed = 0, open = 0;
  for (const Certificate& c : certificates) {
    if (c.verdict == Verdict::Pass) ++passed;
    else if (c.verdict == Verdict::Fail) ++failed;
    else ++open;
  }
  j["overall"] = Json{{"narrative", overall_narrative(certificates)},
                      {"checks", certificates.size()},
                      {"passed", passed},
                      {"failed", failed},
                      {"not_checkable", open}};
  Json list = Json::array();
  for (const Certificate& c : certificates) list.push_back(to_json(c));
  j["certificates"] = std::move(list);
  return j;
}

std::string certificates_text(const std::vector<Certificate>& certificates) {
  std::ostringstream out;
  out << pad("check", 10) << pad("verdict", 14) << pad("min margin", 24) << "narrative\n";
  for (const Certificate& c : certificates) {
    out << pad(c.check_id, 10) << pad(to_string(c.verdict), 14)
        << pad(min_margin_label(c), 24) << c.narrative << "\n";
  }
  out << "overall: " << overall_narrative(certificates) << "\n";
  return out.str();
}

void emit_certificate_report(const std::vector<Certificate>& certificates, ReportFormat format,
                             const std::string& path) {
  if (certificates.empty()) fail(ErrorCode::Config, "cannot emit an empty certificate list");
  if (format == ReportFormat::HumanText)
    write_text_file(path, certificates_text(certificates));
  else
    write_json_file(path, certificates_json(certificates));
}

Json to_json(const ThresholdResult& threshold) {
  Json j = Json::object();
  j["kappa_star"] = threshold.kappa_star;
  j["t_kappa"] = optional_time(threshold.t_kappa);
  j["margin_at_star"] = threshold.margin_at_star;
  j["margin_monotone_on_grid"] = threshold.margin_monotone_on_grid;
  j["parameters"] = threshold.parameters;
  return j;
}

Json to_json(const InvarianceAudit& audit) {
  Json j = Json::object();
  j["invariant"] = audit.invariant;
  j["worst_margin"] = audit.worst_margin;
  j["worst_time"] = audit.worst_time;
  j["exited"] = audit.exited;
  j["samples"] = audit.samples;
  return j;
}

Json to_json(const PolicyOutcome& outcome) {
  Json j = Json::object();
  j["policy"] = outcome.policy_id;
  j["kind"] = outcome.kind;
  j["synthesized"] = outcome.synthesized;
  j["within_instance_authority"] = outcome.within_instance_authority;
  j["exited"] = outcome.exit_confirmed;
  j["contact_found"] = outcome.contact_found;
  if (outcome.contact_found) {
    j["contact_time"] = outcome.contact_time;
    j["contact_point"] = vector_json(outcome.contact_point);
    j["contact_capability"] = outcome.contact_capability;
    j["outward_rate"] = outcome.outward_rate;
    j["outward_positive"] = outcome.outward_rate > 0.0;
  }
  if (outcome.has_containment) j["containment"] = to_json(outcome.containment);
  j["note"] = outcome.note;
  return j;
}

Json to_json(const HarnessReport& report) {
  Json j = Json::object();
  j["report"] = "harness";
  j["verdict"] = report.verdict;
  j["instantiated"] = report.instantiated;
  j["threshold_found"] = report.threshold_found;
  j["already_supercritical"] = report.already_supercritical;
  if (report.threshold_found) j["threshold"] = to_json(report.threshold);
  j["aggregate_synthesized"] = report.aggregate_synthesized;
  j["parameters"] = report.parameters;
  Json outcomes = Json::array();
  for (const PolicyOutcome& o : report.outcomes) outcomes.push_back(to_json(o));
  j["outcomes"] = std::move(outcomes);
  std::vector<Certificate> certs = collect_certificates(report);
  j["overall_narrative"] = overall_narrative(certs);
  Json list = Json::array();
  for (const Certificate& c : certs) list.push_back(to_json(c));
  j["certificates"] = std::move(list);
  return j;
}

Json to_json(const RequirementsReport& report) {
  Json j = Json::object();
  j["report"] = "requirements";
  j["verdict"] = report.verdict;
  j["parameters"] = report.parameters;
  if (report.has_classification) {
    Json c = Json::object();
    c["claimed"] = to_string(report.claimed);
    c["assigned"] = to_string(report.classification.assigned);
    c["mismatch"] = report.classification.mismatch;
    c["rationale"] = report.classification.rationale;
    j["classification"] = std::move(c);
  }
  Json list = Json::array();
  for (const Certificate& c : collect_certificates(report)) list.push_back(to_json(c));
  j["certificates"] = std::move(list);
  return j;
}

std::vector<Certificate> collect_certificates(const HarnessReport& report) {
  std::vector<Certificate> certs;
  certs.push_back(report.a1);
  certs.push_back(report.h1);
  certs.push_back(report.h2);
  certs.push_back(report.a2);
  certs.push_back(report.lemma1);
  for (const Certificate& c : report.a3) certs.push_back(c);
  certs.push_back(report.theorem1);
  return certs;
}

std::vector<Certificate> collect_certificates(const RequirementsReport& report) {
  return {report.r1, report.r2, report.r3, report.r4};
}

std::string threshold_text(const ThresholdResult& threshold) {
  std::ostringstream out;
  out << "kappa_star = " << format_double(threshold.kappa_star) << "\n";
  if (threshold.t_kappa)
    out << "T_kappa = " << format_double(*threshold.t_kappa) << "\n";
  else
    out << "T_kappa = never reached within horizon\n";
  out << "margin at kappa_star = " << format_double(threshold.margin_at_star) << "\n";
  if (!threshold.margin_monotone_on_grid)
    out << "note: the min margin is not monotone on the spot-check grid\n";
  return out.str();
}

std::string harness_text(const HarnessReport& report) {
  std::ostringstream out;
  out << "verdict: " << report.verdict << "\n";
  if (report.threshold_found) out << threshold_text(report.threshold);
  if (report.aggregate_synthesized)
    out << "note: the suite carried no aggregate; one was synthesized from all members\n";
  if (!report.outcomes.empty()) {
    out << "policy outcomes:\n";
    out << "  " << pad("policy", 18) << pad("kind", 18) << pad("contact t", 24)
        << pad("outward rate", 24) << pad("exit", 6) << "note\n";
    for (const PolicyOutcome& o : report.outcomes) {
      out << "  " << pad(o.policy_id, 18) << pad(o.kind, 18)
          << pad(o.contact_found ? format_double(o.contact_time) : "-", 24)
          << pad(o.contact_found ? format_double(o.outward_rate) : "-", 24)
          << pad(o.exit_confirmed ? "yes" : "no", 6) << o.note << "\n";
    }
  }
  out << "certificates:\n" << certificates_text(collect_certificates(report));
  return out.str();
}

std::string requirements_text(const RequirementsReport& report) {
  std::ostringstream out;
  out << "verdict: " << report.verdict << "\n";
  if (report.has_classification) {
    out << "classification: claimed " << to_string(report.claimed) << ", assigned "
        << to_string(report.classification.assigned)
        << (report.classification.mismatch ? " (mismatch)" : "") << "\n";
    out << "  rationale: " << report.classification.rationale << "\n";
  }
  out << "certificates:\n" << certificates_text(collect_certificates(report));
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write report to '" + path + "'");
  out << content;
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

void write_json_file(const std::string& path, const Json& document) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write report to '" + path + "'");
  out << document.dump(2) << "\n";
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace invlab
