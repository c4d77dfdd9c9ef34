#pragma once

#include <cstdint>
#include <vector>

#include "sklab/common/vec.hpp"
#include "sklab/mapping/bvp.hpp"

namespace sklab::mapping {

// Finite-difference derivative bundle for one solution component at a grid
// node, pushed back to original coordinates through Gamma.
struct NodeDerivs {
    Vec grad;          // original-coordinate gradient of h
    double hess_max;   // max |second derivative| entry
};

Vec original_point(const MixedBVP& bvp, int i, int j, int k);
NodeDerivs node_derivs(const MixedBVP& bvp, const GridSolution& sol, int i,
                       int j, int k);

// value of h at an arbitrary original-coordinate point by multilinear
// interpolation on the flattened grid; returns false if outside the grid
bool eval_solution(const MixedBVP& bvp, const GridSolution& sol, const Vec& x,
                   double* out);
// original-coordinate gradient, interpolated the same way
bool eval_gradient(const MixedBVP& bvp, const GridSolution& sol, const Vec& x,
                   Vec* out);

struct FlatteningCertificate {
    int nodes_in_ball = 0;
    double det_min = 0.0, det_max = 0.0;           // (g)
    double dhd_dxd_min = 0.0;                      // (h)
    double weak_flux_max = 0.0;                    // (e), from the solves
    double oblique_fd_max = 0.0;                   // (e), nodal FD diagnostic
    double alignment_sin_max = 0.0;                // (f)
    double c_min = 0.0, c_max = 0.0;               // (f)
    double second_deriv_c2 = 0.0;                  // (i)
    double blowup_fit_slope = 0.0;                 // (i), expect gamma - 1
    double injectivity_ratio_min = 0.0;            // (a), discrete form
    std::vector<double> shell_dist, shell_max_hess;
    std::vector<std::array<double, 4>> violations;  // x, y, z, det at failures

    bool jacobian_ok() const { return det_min >= 0.5 && det_max <= 2.0; }
};

// [fit_min_dist, fit_max_dist] bounds the shells used for the blow-up
// exponent fit. Defaults: 4 hz (centered second differences are unreliable
// closer to the boundary) and 3/4 of the ball radius. For a truncated
// lacunary boundary the genuine cascade lives below ~4x its finest scale,
// so callers should cap fit_max_dist there.
FlatteningCertificate certify_flattening_map(const MixedBVP& bvp,
                              const std::vector<GridSolution>& H,
                              double ball_radius, double fit_min_dist = -1.0,
                              double fit_max_dist = -1.0);

struct GradientHolderCertificate {
    double holder_c1 = 0.0;  // max gradient-Hoelder quotient
    double grad_sup = 0.0;
    double c2 = 0.0;         // max |D^2 h| dist^{1-gamma}
};

GradientHolderCertificate certify_gradient_holder(const MixedBVP& bvp, const GridSolution& h,
                            double ball_radius, int n_pairs,
                            std::uint64_t seed);

}  // namespace sklab::mapping
