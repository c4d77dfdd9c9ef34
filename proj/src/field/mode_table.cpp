#include "sklab/field/mode_table.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "sklab/common/quadrature.hpp"
#include "sklab/geometry/boundary.hpp"
#include "sklab/kernels/kernels.hpp"

namespace sklab::field {

namespace {

constexpr double kMu = 2.0943951023931953;  // 2 pi / 3
constexpr double kSupport = 0.75;
constexpr double kExpCut = 45.0;

double psi_profile(double r) { return geom::bump_profile(r / kSupport); }

inline void cos_table(double mu_x, int n, double* out) {
    // out[p] = cos(p * mu_x) by the Chebyshev recurrence
    const double c1 = std::cos(mu_x);
    out[0] = 1.0;
    if (n > 1) out[1] = c1;
    for (int p = 2; p < n; ++p) out[p] = 2.0 * c1 * out[p - 1] - out[p - 2];
}


// c(nu) = (2 pi / 9) int_0^{3/4} psi(rho) J0(mu nu rho) rho drho
double radial_coefficient(double nu) {
    const double arg_max = kMu * nu * kSupport;
    const int panels = std::max(16, int(arg_max / 4.0) + 1);
    return (2.0 * M_PI / 9.0) *
           integrate_gl(
               [&](double rho) {
                   return psi_profile(rho) *
                          std::cyl_bessel_j(0.0, kMu * nu * rho) * rho;
               },
               0.0, kSupport, panels, 24);
}

ModeTable build(int modes) {
    if (modes < 2 || modes > 128)
        throw std::invalid_argument("fourier_modes out of range");
    ModeTable t;
    t.modes = modes;
    t.mu = kMu;

    std::map<long, double> coef_by_r2;  // r^2 = p^2 + q^2 -> c(r)
    for (int p = 0; p < modes; ++p)
        for (int q = 0; q < modes; ++q) {
            const long r2 = long(p) * p + long(q) * q;
            if (!coef_by_r2.count(r2))
                coef_by_r2[r2] = radial_coefficient(std::sqrt(double(r2)));
        }
    t.cell_mean = coef_by_r2.at(0);

    struct Term {
        double w, r;
        std::int32_t p, q;
    };
    std::vector<Term> terms;
    double max_w = 0.0;
    for (int p = 0; p < modes; ++p)
        for (int q = 0; q < modes; ++q) {
            const double r = std::sqrt(double(p) * p + double(q) * q);
            const double c = coef_by_r2.at(long(p) * p + long(q) * q);
            const double weight = (p == 0 && q == 0)   ? 1.0
                                  : (p == 0 || q == 0) ? 2.0
                                                       : 4.0;
            terms.push_back({weight * c, r, p, q});
            max_w = std::max(max_w, std::abs(weight * c));
        }
    std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
        if (a.r != b.r) return a.r < b.r;
        if (a.p != b.p) return a.p < b.p;
        return a.q < b.q;
    });

    const double drop_below = 1e-16 * max_w;
    t.dropped_weight = 0.0;
    for (const Term& tm : terms) {
        if (std::abs(tm.w) < drop_below) {
            t.dropped_weight += std::abs(tm.w);
            continue;
        }
        t.w.push_back(tm.w);
        t.p.push_back(tm.p);
        t.q.push_back(tm.q);
        t.negmu_r.push_back(-kMu * tm.r);
        t.r_sorted.push_back(tm.r);
    }
    while (t.w.size() % 4 != 0) {
        t.w.push_back(0.0);
        t.p.push_back(0);
        t.q.push_back(0);
        t.negmu_r.push_back(0.0);
        t.r_sorted.push_back(t.r_sorted.empty() ? 0.0 : t.r_sorted.back());
    }

    // Boundary restriction error, measured directly: max over a staggered
    // grid of |phi_P(., 0) - Psi_per|. The difference is band-limited by
    // construction so a dense scan with a safety factor bounds the sup.
    double cu[160], cv[160];
    double worst = 0.0;
    const int n = 384;
    for (int i = 0; i < n; ++i) {
        const double u = 3.0 * (i + 0.371) / n;
        cos_table(kMu * u, modes, cu);
        for (int j = 0; j < n; ++j) {
            const double v = 3.0 * (j + 0.113) / n;
            cos_table(kMu * v, modes, cv);
            kern::ModeSumView view{t.w.data(), t.p.data(), t.q.data(),
                                   t.negmu_r.data(), t.padded_size()};
            const double a = kern::active().mode_sum(view, cu, cv, 0.0);
            const double ox = u - 3.0 * std::nearbyint(u / 3.0);
            const double oy = v - 3.0 * std::nearbyint(v / 3.0);
            const double r = std::sqrt(ox * ox + oy * oy);
            const double psi = (r < kSupport) ? psi_profile(r) : 0.0;
            worst = std::max(worst, std::abs(a - psi));
        }
    }
    t.boundary_err = 1.5 * worst + t.dropped_weight;
    return t;
}

}  // namespace

const ModeTable& mode_table(int modes) {
    static std::map<int, ModeTable> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(modes);
    if (it == cache.end()) it = cache.emplace(modes, build(modes)).first;
    return it->second;
}

namespace {

inline std::size_t cutoff_index(const ModeTable& t, double s) {
    if (s <= 0.0) return t.padded_size();
    const double rcut = kExpCut / (t.mu * s);
    const auto it = std::upper_bound(t.r_sorted.begin(), t.r_sorted.end(), rcut);
    std::size_t n = std::size_t(it - t.r_sorted.begin());
    n = (n + 3) & ~std::size_t(3);
    return std::min(n, t.padded_size());
}

}  // namespace

double eval_phi_p(const ModeTable& t, double u, double v, double s) {
    double cu[160], cv[160];
    cos_table(t.mu * u, t.modes, cu);
    cos_table(t.mu * v, t.modes, cv);
    kern::ModeSumView view{t.w.data(), t.p.data(), t.q.data(),
                           t.negmu_r.data(), cutoff_index(t, s)};
    return kern::active().mode_sum(view, cu, cv, s);
}

void eval_phi_p_many(const ModeTable& t, double u, double v, const double* s,
                     double* out, std::size_t n) {
    double cu[160], cv[160];
    cos_table(t.mu * u, t.modes, cu);
    cos_table(t.mu * v, t.modes, cv);
    for (std::size_t i = 0; i < n; ++i) {
        kern::ModeSumView view{t.w.data(), t.p.data(), t.q.data(),
                               t.negmu_r.data(), cutoff_index(t, s[i])};
        out[i] = kern::active().mode_sum(view, cu, cv, s[i]);
    }
}

}  // namespace sklab::field
