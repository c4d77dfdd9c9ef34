#pragma once

#include <cstdint>
#include <vector>

#include "sklab/common/vec.hpp"
#include "sklab/engine/halfspace.hpp"
#include "sklab/geometry/domain.hpp"

namespace sklab::engine {

enum class GraphScheme { project, flatten_reflect };

// Reflected Euler path in a graph domain D = {x_d > Phi}.
//  project:          Euler step, then push back along the inward normal to
//                    the boundary; dL = push distance.
//  flatten_reflect:  Euler step mapped through Gamma, the flattened vertical
//                    coordinate is pushed to 0 by the one-step Skorokhod
//                    increment, mapped back; dL = increment * n_d.
struct GraphSimConfig {
    Vec y0;
    double dt = 1e-5;
    double horizon = 1.0;
    GraphScheme scheme = GraphScheme::project;
    double box_halfwidth = 0.0;  // > 0: abort when |x_i| exceeds it
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    int record_every = 0;
};

struct GraphPath {
    StopReason reason = StopReason::none;
    double t_end = 0.0;
    std::uint64_t steps = 0;
    Vec y_end;
    double l_end = 0.0;
    std::vector<double> t, l;
    std::vector<Vec> y;
    std::vector<double> dl;  // per recorded step local-time increment
};

GraphPath simulate_graph_domain(const geom::GraphDomain& domain,
                                const GraphSimConfig& cfg);

}  // namespace sklab::engine
