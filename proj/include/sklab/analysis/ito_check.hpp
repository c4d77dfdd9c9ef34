#pragma once

#include <cstdint>
#include <vector>

#include "sklab/mapping/certificates.hpp"

namespace sklab::analysis {

struct ItoCheckConfig {
    int paths = 200;
    double dt = 2e-5;
    double horizon = 0.01;
    Vec x0;                    // start, original coordinates
    std::uint64_t seed = 1;
};

struct ItoCheckResult {
    int paths_used = 0;
    int paths_aborted = 0;          // left the grid region
    std::vector<double> qv_ratio;   // realized / predicted per component
    double drift_z_max = 0.0;       // tangential components, expect |z| <= 3
    // max |Y_d| over states where the local time increased: L charges only
    // the boundary of the half-space
    double contact_yd_max = 0.0;
    std::uint64_t contact_steps = 0;
    bool l_only_at_contact = true;
};

// Push a family of reflected graph-domain paths through the solved map H
// and compare the realized quadratic variation of Y = H(X) with the
// integrated squared gradients, check that tangential components carry no
// local-time drift, and that the d-th component is pushed only at contacts.
ItoCheckResult ito_consistency(const mapping::MixedBVP& bvp,
                               const std::vector<mapping::GridSolution>& H,
                               const ItoCheckConfig& cfg);

}  // namespace sklab::analysis
