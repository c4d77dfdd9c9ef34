#include "sklab/field/poisson_oracle.hpp"

#include <cmath>

#include "sklab/common/quadrature.hpp"
#include "sklab/field/counterexample_field.hpp"

namespace sklab::field {

namespace {

// (1/9) int Psi by plain 2-D quadrature, kept independent of the radial
// Hankel route used by the mode table
double cell_mean_cartesian() {
    static const double value = [] {
        const double R = BumpProfile::radius;
        return integrate_gl(
                   [&](double y1) {
                       return integrate_gl(
                           [&](double y2) {
                               const double r =
                                   std::sqrt(y1 * y1 + y2 * y2);
                               return (r < R) ? BumpProfile{}(r) : 0.0;
                           },
                           -R, R, 24, 16);
                   },
                   -R, R, 24, 16) /
               9.0;
    }();
    return value;
}

inline double poisson_kernel(double z1, double z2, double t) {
    const double q = z1 * z1 + z2 * z2 + t * t;
    return t / (2.0 * M_PI * q * std::sqrt(q));
}

struct CellIntegrand {
    double u, v, s, mean;
    double operator()(double y1, double y2) const {
        const double r = std::sqrt(y1 * y1 + y2 * y2);
        const double psi =
            (r < BumpProfile::radius) ? BumpProfile{}(r) : 0.0;
        return poisson_kernel(u - y1, v - y2, s) * (psi - mean);
    }
};

template <typename F>
double gl_panel(const F& f, double ax, double bx, double ay, double by) {
    const GaussRule& g = gauss_legendre(6);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double x = ax + 0.5 * (bx - ax) * (g.x[i] + 1.0);
        for (std::size_t j = 0; j < g.x.size(); ++j) {
            const double y = ay + 0.5 * (by - ay) * (g.x[j] + 1.0);
            sum += g.w[i] * g.w[j] * f(x, y);
        }
    }
    return 0.25 * (bx - ax) * (by - ay) * sum;
}

template <typename F>
double adaptive(const F& f, double ax, double bx, double ay, double by,
                double tol, int depth) {
    const double whole = gl_panel(f, ax, bx, ay, by);
    const double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
    const double split = gl_panel(f, ax, mx, ay, my) +
                         gl_panel(f, mx, bx, ay, my) +
                         gl_panel(f, ax, mx, my, by) +
                         gl_panel(f, mx, bx, my, by);
    if (depth >= 14 || std::abs(whole - split) <= tol) return split;
    return adaptive(f, ax, mx, ay, my, tol / 4, depth + 1) +
           adaptive(f, mx, bx, ay, my, tol / 4, depth + 1) +
           adaptive(f, ax, mx, my, by, tol / 4, depth + 1) +
           adaptive(f, mx, bx, my, by, tol / 4, depth + 1);
}

}  // namespace

double poisson_phi_p(double u, double v, double s, int lattice_radius,
                     double cell_tol) {
    // reduce (u, v) to the base cell to keep the lattice sum centered
    double uu = std::fmod(u, 3.0);
    if (uu < 0.0) uu += 3.0;
    double vv = std::fmod(v, 3.0);
    if (vv < 0.0) vv += 3.0;

    const double mean = cell_mean_cartesian();
    double total = mean;
    for (int i1 = -lattice_radius; i1 <= lattice_radius; ++i1) {
        for (int i2 = -lattice_radius; i2 <= lattice_radius; ++i2) {
            CellIntegrand f{uu - 3.0 * i1, vv - 3.0 * i2, s, mean};
            // spike resolution only matters when the kernel center is near
            // this cell; far cells converge on the first split
            total += adaptive(f, -1.5, 1.5, -1.5, 1.5, cell_tol, 0);
        }
    }
    return total;
}

}  // namespace sklab::field
