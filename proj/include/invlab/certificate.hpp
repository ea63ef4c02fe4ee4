#pragma once

#include "invlab/common.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace invlab {

using Json = nlohmann::ordered_json;

enum class Verdict { Pass, Fail, NotCheckable };

std::string to_string(Verdict v);

// One boundary-point margin evaluation: outward push of the endogenous
// channel against the combined inward authority U_max + M_f.
struct MarginSample {
  Vector boundary_point;
  double capability = 0.0;
  double time = 0.0;
  double inward_authority = 0.0;   // U_max + M_f
  double outward_component = 0.0;  // <G h(x_b, kappa), n(x_b)>
  double margin = 0.0;             // outward_component - inward_authority
};

// Numerical evidence for one check. parameters records every tolerance, seed
// and sample count the verdict depends on; declarations list premises taken
// on assertion rather than computed.
struct Certificate {
  std::string check_id;
  Verdict verdict = Verdict::NotCheckable;
  std::vector<MarginSample> margins;
  Json parameters = Json::object();
  std::vector<std::string> declarations;
  std::string narrative;
  Json evidence = Json::object();
};

Json vector_json(const Vector& v);
Json to_json(const MarginSample& sample);
Json to_json(const Certificate& certificate);

// Pass requires every margin strictly above the 1e-9 floor.
Verdict margin_verdict(const std::vector<MarginSample>& margins);

}  // namespace invlab
