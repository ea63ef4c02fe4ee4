#include "invlab/certificate.hpp"

namespace invlab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotCheckable: return "not-checkable";
  }
  return "unknown";
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const MarginSample& sample) {
  Json j = Json::object();
  j["boundary_point"] = vector_json(sample.boundary_point);
  j["capability"] = sample.capability;
  j["time"] = sample.time;
  j["inward_authority"] = sample.inward_authority;
  j["outward_component"] = sample.outward_component;
  j["margin"] = sample.margin;
  return j;
}

Json to_json(const Certificate& certificate) {
  Json j = Json::object();
  j["check"] = certificate.check_id;
  j["verdict"] = to_string(certificate.verdict);
  j["narrative"] = certificate.narrative;
  j["parameters"] = certificate.parameters;
  j["declarations"] = certificate.declarations;
  j["evidence"] = certificate.evidence;
  Json margins = Json::array();
  for (const MarginSample& m : certificate.margins) margins.push_back(to_json(m));
  j["margins"] = std::move(margins);
  return j;
}

Verdict margin_verdict(const std::vector<MarginSample>& margins) {
  if (margins.empty()) return Verdict::NotCheckable;
  for (const MarginSample& m : margins) {
    if (!(m.margin > tol::strictness)) return Verdict::Fail;
  }
  return Verdict::Pass;
}

}  // namespace invlab
