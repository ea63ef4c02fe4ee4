#pragma once

#include "invlab/certificate.hpp"
#include "invlab/intrinsic.hpp"
#include "invlab/simulator.hpp"
#include "invlab/supercritical.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace invlab {

// Header t,x_0..x_{n-1},kappa,u_0..u_{m-1},g; one row per sample with 17
// significant digits; events as trailing "# event,<type>,<t>,<state...>"
// lines. Parsing the rows back reproduces the samples bit-exactly.
void emit_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
void emit_trajectory_csv(const Trajectory& trajectory, const std::string& path);

enum class ReportFormat { HumanText, MachineJson };

// One narrative for the certificate list as a whole. The gap/lemma/harness
// pipeline and the failed-gap outcome have fixed phrasings; anything else
// falls back to a pass count.
std::string overall_narrative(const std::vector<Certificate>& certificates);

Json certificates_json(const std::vector<Certificate>& certificates);
std::string certificates_text(const std::vector<Certificate>& certificates);

// Human form is a table plus narratives; the machine form carries every
// field. Both views of the same records.
void emit_certificate_report(const std::vector<Certificate>& certificates, ReportFormat format,
                             const std::string& path);

Json to_json(const ThresholdResult& threshold);
Json to_json(const InvarianceAudit& audit);
Json to_json(const PolicyOutcome& outcome);
Json to_json(const HarnessReport& report);
Json to_json(const RequirementsReport& report);

// Certificate lists in pipeline order, for report emission.
std::vector<Certificate> collect_certificates(const HarnessReport& report);
std::vector<Certificate> collect_certificates(const RequirementsReport& report);

std::string threshold_text(const ThresholdResult& threshold);
std::string harness_text(const HarnessReport& report);
std::string requirements_text(const RequirementsReport& report);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const Json& document);

}  // namespace invlab
