#pragma once

#include <stdexcept>

#include "sklab/common/vec.hpp"
#include "sklab/geometry/boundary.hpp"

namespace sklab::geom {

// Membership tolerance in domain units (below scheme step sizes, above
// accumulated roundoff).
inline constexpr double kBoundaryTol = 1e-9;

// D = { (xhat, x_d) : x_d > Phi(xhat) }.
struct GraphDomain {
    BoundaryFunction phi;
    int d;

    GraphDomain(BoundaryFunction boundary, int dim)
        : phi(std::move(boundary)), d(dim) {
        if (dim < 2) throw std::invalid_argument("ambient dimension must be >= 2");
        if (phi.dim() != dim - 1)
            throw std::invalid_argument("boundary dimension mismatch");
    }

    double vertical_gap(const Vec& x) const {
        return x[d - 1] - phi.eval(x.v.data());
    }
    bool contains(const Vec& x) const { return vertical_gap(x) > -kBoundaryTol; }
    bool interior(const Vec& x) const { return vertical_gap(x) > kBoundaryTol; }
    bool on_boundary(const Vec& x) const {
        const double g = vertical_gap(x);
        return g >= -kBoundaryTol && g <= kBoundaryTol;
    }
};

// (-grad Phi, 1) / |(-grad Phi, 1)|; rejects points off the boundary.
Vec inward_normal(const GraphDomain& domain, const Vec& x);

// Gamma(x) = (xhat, x_d - Phi(xhat)) and its inverse.
Vec flatten(const GraphDomain& domain, const Vec& x);
Vec unflatten(const GraphDomain& domain, const Vec& y);

// O(1) estimate of dist(x, boundary): the vertical gap corrected by the
// local slope. Bracket: gap / sqrt(1 + g^2) <= dist <= gap with
// g = |grad Phi(xhat)| + seminorm_bound * gap^gamma; the midpoint of the
// bracket is returned, so the relative error is at most g^2/4 + O(g^4).
double boundary_distance(const GraphDomain& domain, const Vec& x);

// Test oracle: dense search of min |x - (yhat, Phi(yhat))| over a grid of
// half-width `reach` around xhat with n points per axis.
double boundary_distance_bruteforce(const GraphDomain& domain, const Vec& x,
                                    double reach, int n);

}  // namespace sklab::geom
