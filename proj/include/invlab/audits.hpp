#pragma once

#include "invlab/certificate.hpp"
#include "invlab/instance.hpp"

#include <vector>

namespace invlab {

// Mixed interior/boundary probe states for the instance-level audits, drawn
// from the named seed substream.
std::vector<Vector> audit_states(const Instance& instance, const std::string& stream_label);

// Authority audit: every policy in the suite must keep ||B u|| within its own
// bound (the clipping layer) and within the instance authority U_max, over
// sampled states and times.
Certificate certify_a1(const Instance& instance);

// Continuity probe for the endogenous family. Falsification only: a large
// response to a small perturbation fails the check; a small one is merely
// consistent with continuity. extra_states lets callers aim the probe at a
// suspected jump.
Certificate certify_h1(const Instance& instance,
                       const std::vector<Vector>& extra_states = {});

// Scaling audit: ||h(x, kappa)|| non-decreasing in kappa at every probe
// state, on a capability grid covering the schedule's range.
Certificate certify_h2(const Instance& instance);

}  // namespace invlab
