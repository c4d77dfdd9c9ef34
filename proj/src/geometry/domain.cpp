#include "sklab/geometry/domain.hpp"

#include <cmath>

namespace sklab::geom {

Vec inward_normal(const GraphDomain& domain, const Vec& x) {
    if (!domain.on_boundary(x))
        throw std::invalid_argument("inward_normal: point not on the boundary");
    Vec n = Vec::zero(domain.d);
    double g[4];
    domain.phi.gradient(x.v.data(), g);
    double nrm2 = 1.0;
    for (int i = 0; i < domain.d - 1; ++i) {
        n[i] = -g[i];
        nrm2 += g[i] * g[i];
    }
    n[domain.d - 1] = 1.0;
    const double inv = 1.0 / std::sqrt(nrm2);
    for (int i = 0; i < domain.d; ++i) n[i] *= inv;
    return n;
}

Vec flatten(const GraphDomain& domain, const Vec& x) {
    Vec y = x;
    y[domain.d - 1] = x[domain.d - 1] - domain.phi.eval(x.v.data());
    return y;
}

Vec unflatten(const GraphDomain& domain, const Vec& y) {
    Vec x = y;
    x[domain.d - 1] = y[domain.d - 1] + domain.phi.eval(y.v.data());
    return x;
}

double boundary_distance(const GraphDomain& domain, const Vec& x) {
    const double gap = domain.vertical_gap(x);
    if (gap < -kBoundaryTol)
        throw std::invalid_argument("boundary_distance: exterior point");
    if (gap <= 0.0) return 0.0;
    double g[4];
    domain.phi.gradient(x.v.data(), g);
    double slope2 = 0.0;
    for (int i = 0; i < domain.d - 1; ++i) slope2 += g[i] * g[i];
    const double slope = std::sqrt(slope2) +
                         domain.phi.seminorm_bound() *
                             std::pow(gap, domain.phi.gamma());
    const double lower = gap / std::sqrt(1.0 + slope * slope);
    return 0.5 * (lower + gap);
}

double boundary_distance_bruteforce(const GraphDomain& domain, const Vec& x,
                                    double reach, int n) {
    const int dhat = domain.d - 1;
    double best = std::abs(domain.vertical_gap(x));
    double y[4];
    const auto probe = [&](const double* yhat) {
        double d2 = 0.0;
        for (int i = 0; i < dhat; ++i) {
            const double dd = yhat[i] - x[i];
            d2 += dd * dd;
        }
        const double dz = domain.phi.eval(yhat) - x[domain.d - 1];
        d2 += dz * dz;
        best = std::min(best, std::sqrt(d2));
    };
    if (dhat == 1) {
        for (int i = 0; i <= n; ++i) {
            y[0] = x[0] - reach + 2.0 * reach * double(i) / n;
            probe(y);
        }
    } else {
        for (int i = 0; i <= n; ++i) {
            y[0] = x[0] - reach + 2.0 * reach * double(i) / n;
            for (int j = 0; j <= n; ++j) {
                y[1] = x[1] - reach + 2.0 * reach * double(j) / n;
                probe(y);
            }
        }
    }
    return best;
}

}  // namespace sklab::geom
