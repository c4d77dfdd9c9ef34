#include "sklab/mapping/certificates.hpp"

#include <algorithm>
#include <cmath>

#include "sklab/common/rng_util.hpp"
#include "sklab/geometry/domain.hpp"

namespace sklab::mapping {

namespace {

inline std::size_t node_index(const MixedBVP& bvp, int i, int j, int k) {
    return bvp.d == 3
               ? (std::size_t(k) * bvp.nxy + j) * bvp.nxy + i
               : std::size_t(k) * bvp.nxy + i;
}

inline double val(const MixedBVP& bvp, const GridSolution& s, int i, int j,
                  int k) {
    return s.values[node_index(bvp, i, j, k)];
}

// flattened-grid first/second differences; z one-sided at the bottom
struct FlatDerivs {
    double dx[3];       // v_x, v_y(3d), v_z
    double dxx[3][3];   // second differences (central only; k >= 1)
    bool has_second;
};

FlatDerivs flat_derivs(const MixedBVP& bvp, const GridSolution& s, int i,
                       int j, int k) {
    FlatDerivs fd{};
    const double hx = bvp.hx(), hz = bvp.hz();
    const int dh = bvp.d - 1;

    const auto at = [&](int di, int dj, int dk) {
        return val(bvp, s, i + di, j + dj, k + dk);
    };
    fd.dx[0] = (at(1, 0, 0) - at(-1, 0, 0)) / (2 * hx);
    if (bvp.d == 3) fd.dx[1] = (at(0, 1, 0) - at(0, -1, 0)) / (2 * hx);
    if (k == 0)
        fd.dx[dh] = (-3 * at(0, 0, 0) + 4 * at(0, 0, 1) - at(0, 0, 2)) /
                    (2 * hz);
    else if (k == bvp.nz - 1)
        fd.dx[dh] = (3 * at(0, 0, 0) - 4 * at(0, 0, -1) + at(0, 0, -2)) /
                    (2 * hz);
    else
        fd.dx[dh] = (at(0, 0, 1) - at(0, 0, -1)) / (2 * hz);

    fd.has_second = k >= 1 && k <= bvp.nz - 2;
    if (fd.has_second) {
        const double c = at(0, 0, 0);
        fd.dxx[0][0] = (at(1, 0, 0) - 2 * c + at(-1, 0, 0)) / (hx * hx);
        fd.dxx[dh][dh] = (at(0, 0, 1) - 2 * c + at(0, 0, -1)) / (hz * hz);
        fd.dxx[0][dh] = fd.dxx[dh][0] =
            (at(1, 0, 1) - at(1, 0, -1) - at(-1, 0, 1) + at(-1, 0, -1)) /
            (4 * hx * hz);
        if (bvp.d == 3) {
            fd.dxx[1][1] = (at(0, 1, 0) - 2 * c + at(0, -1, 0)) / (hx * hx);
            fd.dxx[0][1] = fd.dxx[1][0] =
                (at(1, 1, 0) - at(1, -1, 0) - at(-1, 1, 0) + at(-1, -1, 0)) /
                (4 * hx * hx);
            fd.dxx[1][dh] = fd.dxx[dh][1] =
                (at(0, 1, 1) - at(0, 1, -1) - at(0, -1, 1) + at(0, -1, -1)) /
                (4 * hx * hz);
        }
    }
    return fd;
}

// Phi gradient and FD Hessian at a horizontal node position
void phi_derivs(const MixedBVP& bvp, const Vec& xh, double grad[4],
                double hess[3][3]) {
    bvp.phi.gradient(xh.v.data(), grad);
    const double h = 1e-5;
    for (int r = 0; r < bvp.d - 1; ++r) {
        Vec a = xh, b = xh;
        a[r] += h;
        b[r] -= h;
        double ga[4], gb[4];
        bvp.phi.gradient(a.v.data(), ga);
        bvp.phi.gradient(b.v.data(), gb);
        for (int c = 0; c < bvp.d - 1; ++c)
            hess[r][c] = (ga[c] - gb[c]) / (2 * h);
    }
}

}  // namespace

Vec original_point(const MixedBVP& bvp, int i, int j, int k) {
    Vec x = Vec::zero(bvp.d);
    x[0] = -1.0 + bvp.hx() * i;
    if (bvp.d == 3) x[1] = -1.0 + bvp.hx() * j;
    Vec xh = x;
    xh.d = bvp.d - 1;
    x[bvp.d - 1] = bvp.hz() * k + bvp.phi.eval(xh.v.data());
    return x;
}

NodeDerivs node_derivs(const MixedBVP& bvp, const GridSolution& sol, int i,
                       int j, int k) {
    const int dh = bvp.d - 1;
    const FlatDerivs fd = flat_derivs(bvp, sol, i, j, k);
    Vec xh = Vec::zero(dh);
    xh[0] = -1.0 + bvp.hx() * i;
    if (bvp.d == 3) xh[1] = -1.0 + bvp.hx() * j;
    double g[4];
    double gh[3][3] = {};
    phi_derivs(bvp, xh, g, gh);

    NodeDerivs nd{};
    nd.grad = Vec::zero(bvp.d);
    for (int r = 0; r < dh; ++r) nd.grad[r] = fd.dx[r] - g[r] * fd.dx[dh];
    nd.grad[dh] = fd.dx[dh];

    nd.hess_max = 0.0;
    if (fd.has_second) {
        // h_{rc} = v_rc - g_c v_rz - g_r v_cz + g_r g_c v_zz - Phi_rc v_z
        for (int r = 0; r < dh; ++r)
            for (int c = 0; c < dh; ++c) {
                const double v = fd.dxx[r][c] - g[c] * fd.dxx[r][dh] -
                                 g[r] * fd.dxx[c][dh] +
                                 g[r] * g[c] * fd.dxx[dh][dh] -
                                 gh[r][c] * fd.dx[dh];
                nd.hess_max = std::max(nd.hess_max, std::abs(v));
            }
        for (int r = 0; r < dh; ++r) {
            const double v = fd.dxx[r][dh] - g[r] * fd.dxx[dh][dh];
            nd.hess_max = std::max(nd.hess_max, std::abs(v));
        }
        nd.hess_max = std::max(nd.hess_max, std::abs(fd.dxx[dh][dh]));
    }
    return nd;
}

bool eval_solution(const MixedBVP& bvp, const GridSolution& sol, const Vec& x,
                   double* out) {
    const int dh = bvp.d - 1;
    Vec xh = x;
    xh.d = dh;
    const double z = x[dh] - bvp.phi.eval(xh.v.data());
    const double fi = (x[0] + 1.0) / bvp.hx();
    const double fj = bvp.d == 3 ? (x[1] + 1.0) / bvp.hx() : 0.0;
    const double fk = z / bvp.hz();
    if (fi < 0 || fj < 0 || fk < 0 || fi > bvp.nxy - 1 || fk > bvp.nz - 1 ||
        (bvp.d == 3 && fj > bvp.nxy - 1))
        return false;
    const int i = std::min(int(fi), bvp.nxy - 2);
    const int j = bvp.d == 3 ? std::min(int(fj), bvp.nxy - 2) : 0;
    const int k = std::min(int(fk), bvp.nz - 2);
    const double a = fi - i, b = bvp.d == 3 ? fj - j : 0.0, c = fk - k;
    double acc = 0.0;
    for (int dk = 0; dk <= 1; ++dk)
        for (int dj = 0; dj <= (bvp.d == 3 ? 1 : 0); ++dj)
            for (int di = 0; di <= 1; ++di) {
                const double w = (di ? a : 1 - a) *
                                 (bvp.d == 3 ? (dj ? b : 1 - b) : 1.0) *
                                 (dk ? c : 1 - c);
                acc += w * val(bvp, sol, i + di, j + dj, k + dk);
            }
    *out = acc;
    return true;
}

bool eval_gradient(const MixedBVP& bvp, const GridSolution& sol, const Vec& x,
                   Vec* out) {
    const int dh = bvp.d - 1;
    Vec xh = x;
    xh.d = dh;
    const double z = x[dh] - bvp.phi.eval(xh.v.data());
    const double fi = (x[0] + 1.0) / bvp.hx();
    const double fj = bvp.d == 3 ? (x[1] + 1.0) / bvp.hx() : 0.0;
    const double fk = z / bvp.hz();
    // need a one-node margin for the centered differences
    if (fi < 1 || fk < 0 || fi > bvp.nxy - 2 || fk > bvp.nz - 2 ||
        (bvp.d == 3 && (fj < 1 || fj > bvp.nxy - 2)))
        return false;
    const int i = std::min(int(fi), bvp.nxy - 2);
    const int j = bvp.d == 3 ? std::min(int(fj), bvp.nxy - 2) : 0;
    const int k = std::min(int(fk), bvp.nz - 2);
    const double a = fi - i, b = bvp.d == 3 ? fj - j : 0.0, c = fk - k;
    *out = Vec::zero(bvp.d);
    for (int dk = 0; dk <= 1; ++dk)
        for (int dj = 0; dj <= (bvp.d == 3 ? 1 : 0); ++dj)
            for (int di = 0; di <= 1; ++di) {
                const double w = (di ? a : 1 - a) *
                                 (bvp.d == 3 ? (dj ? b : 1 - b) : 1.0) *
                                 (dk ? c : 1 - c);
                const NodeDerivs nd =
                    node_derivs(bvp, sol, i + di, j + dj, k + dk);
                for (int r = 0; r < bvp.d; ++r) (*out)[r] += w * nd.grad[r];
            }
    return true;
}

FlatteningCertificate certify_flattening_map(const MixedBVP& bvp,
                              const std::vector<GridSolution>& H,
                              double ball_radius, double fit_min_dist,
                              double fit_max_dist) {
    if (fit_min_dist < 0.0) fit_min_dist = 4.0 * bvp.hz();
    if (fit_max_dist < 0.0) fit_max_dist = 0.75 * ball_radius;
    if (int(H.size()) != bvp.d)
        throw std::invalid_argument("need one solution per component");
    FlatteningCertificate rep;
    rep.det_min = 1e300;
    rep.det_max = -1e300;
    rep.dhd_dxd_min = 1e300;
    rep.c_min = 1e300;
    rep.c_max = -1e300;
    rep.injectivity_ratio_min = 1e300;
    const int dh = bvp.d - 1;
    geom::GraphDomain dom(bvp.phi, bvp.d);

    for (const auto& s : H)
        rep.weak_flux_max = std::max(rep.weak_flux_max,
                                     s.graph_flux_residual_max);

    // dyadic shells for the second-derivative blow-up
    const int nshell = 24;
    rep.shell_dist.assign(nshell, 0.0);
    rep.shell_max_hess.assign(nshell, 0.0);
    for (int sh = 0; sh < nshell; ++sh)
        rep.shell_dist[std::size_t(sh)] = std::pow(2.0, -0.5 * sh);

    std::vector<Vec> ball_nodes_orig, ball_nodes_image;
    for (int k = 1; k < bvp.nz - 1; ++k) {
        for (int j = (bvp.d == 3 ? 1 : 0); j < (bvp.d == 3 ? bvp.nxy - 1 : 1);
             ++j) {
            for (int i = 1; i < bvp.nxy - 1; ++i) {
                const Vec p = original_point(bvp, i, j, k);
                if (p.norm() > ball_radius) continue;
                ++rep.nodes_in_ball;

                double J[3][3] = {};
                double hess_all = 0.0;
                for (int comp = 0; comp < bvp.d; ++comp) {
                    const NodeDerivs nd = node_derivs(bvp, H[std::size_t(comp)],
                                                      i, j, k);
                    for (int c = 0; c < bvp.d; ++c) J[comp][c] = nd.grad[c];
                    hess_all = std::max(hess_all, nd.hess_max);
                }
                double det;
                if (bvp.d == 3)
                    det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                          J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                          J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
                else
                    det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
                rep.det_min = std::min(rep.det_min, det);
                rep.det_max = std::max(rep.det_max, det);
                if (det < 0.5 || det > 2.0)
                    rep.violations.push_back({p[0], p[1], p[2], det});
                rep.dhd_dxd_min = std::min(rep.dhd_dxd_min, J[dh][dh]);

                const double dist = geom::boundary_distance(dom, p);
                if (dist > 0.0) {
                    rep.second_deriv_c2 =
                        std::max(rep.second_deriv_c2,
                                 hess_all * std::pow(dist, 1.0 - bvp.phi.gamma()));
                    for (int sh = 0; sh < nshell; ++sh) {
                        if (dist <= rep.shell_dist[std::size_t(sh)] &&
                            (sh == nshell - 1 ||
                             dist > rep.shell_dist[std::size_t(sh) + 1])) {
                            rep.shell_max_hess[std::size_t(sh)] = std::max(
                                rep.shell_max_hess[std::size_t(sh)], hess_all);
                        }
                    }
                }

                if (rep.nodes_in_ball % 7 == 0) {
                    Vec img = Vec::zero(bvp.d);
                    for (int comp = 0; comp < bvp.d; ++comp)
                        img[comp] =
                            val(bvp, H[std::size_t(comp)], i, j, k);
                    ball_nodes_orig.push_back(p);
                    ball_nodes_image.push_back(img);
                }
            }
        }
    }

    // (e)/(f) on the graph face inside the ball
    for (int j = (bvp.d == 3 ? 1 : 0); j < (bvp.d == 3 ? bvp.nxy - 1 : 1);
         ++j) {
        for (int i = 1; i < bvp.nxy - 1; ++i) {
            const Vec p = original_point(bvp, i, j, 0);
            if (p.norm() > ball_radius) continue;
            const Vec n = geom::inward_normal(dom, p);
            // (f): grad h_d parallel to n with positive factor
            const NodeDerivs nd = node_derivs(bvp, H[std::size_t(dh)], i, j, 0);
            const double gn = dot(nd.grad, n);
            const double gnorm = nd.grad.norm();
            if (gnorm > 0.0) {
                double cross2 = gnorm * gnorm - gn * gn;
                cross2 = std::max(cross2, 0.0);
                rep.alignment_sin_max = std::max(
                    rep.alignment_sin_max, std::sqrt(cross2) / gnorm);
            }
            rep.c_min = std::min(rep.c_min, gn);
            rep.c_max = std::max(rep.c_max, gn);
            // (e): nodal oblique derivative of the tangential components
            for (int comp = 0; comp < dh; ++comp) {
                const NodeDerivs tc =
                    node_derivs(bvp, H[std::size_t(comp)], i, j, 0);
                rep.oblique_fd_max =
                    std::max(rep.oblique_fd_max, std::abs(dot(tc.grad, n)));
            }
        }
    }

    // discrete injectivity over sampled node pairs
    for (std::size_t a = 0; a + 1 < ball_nodes_orig.size(); ++a) {
        for (std::size_t b = a + 1; b < std::min(a + 40, ball_nodes_orig.size());
             ++b) {
            const double den = (ball_nodes_orig[a] - ball_nodes_orig[b]).norm();
            if (den < 1e-12) continue;
            const double num =
                (ball_nodes_image[a] - ball_nodes_image[b]).norm();
            rep.injectivity_ratio_min =
                std::min(rep.injectivity_ratio_min, num / den);
        }
    }

    // fit log(max hess) against log(dist) over populated shells
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int sh = 0; sh < nshell; ++sh) {
        if (rep.shell_max_hess[std::size_t(sh)] <= 0.0) continue;
        if (rep.shell_dist[std::size_t(sh)] < fit_min_dist) continue;
        if (rep.shell_dist[std::size_t(sh)] > fit_max_dist) continue;
        const double lx = std::log(rep.shell_dist[std::size_t(sh)]);
        const double ly = std::log(rep.shell_max_hess[std::size_t(sh)]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    rep.blowup_fit_slope =
        m >= 3 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return rep;
}

GradientHolderCertificate certify_gradient_holder(const MixedBVP& bvp, const GridSolution& h,
                            double ball_radius, int n_pairs,
                            std::uint64_t seed) {
    GradientHolderCertificate rep;
    geom::GraphDomain dom(bvp.phi, bvp.d);
    std::vector<Vec> pts;
    std::vector<Vec> grads;
    for (int k = 1; k < bvp.nz - 1; ++k)
        for (int j = (bvp.d == 3 ? 1 : 0); j < (bvp.d == 3 ? bvp.nxy - 1 : 1);
             ++j)
            for (int i = 1; i < bvp.nxy - 1; ++i) {
                const Vec p = original_point(bvp, i, j, k);
                if (p.norm() > ball_radius) continue;
                const NodeDerivs nd = node_derivs(bvp, h, i, j, k);
                pts.push_back(p);
                grads.push_back(nd.grad);
                rep.grad_sup = std::max(rep.grad_sup, nd.grad.norm());
                const double dist = geom::boundary_distance(dom, p);
                if (dist > 0.0)
                    rep.c2 = std::max(
                        rep.c2,
                        nd.hess_max * std::pow(dist, 1.0 - bvp.phi.gamma()));
            }
    if (pts.size() < 2) return rep;
    SplitMix64 rng(seed);
    for (int t = 0; t < n_pairs; ++t) {
        const std::size_t a = std::size_t(rng.unit() * double(pts.size()));
        const std::size_t b = std::size_t(rng.unit() * double(pts.size()));
        if (a == b || a >= pts.size() || b >= pts.size()) continue;
        const double r = (pts[a] - pts[b]).norm();
        if (r < 1e-12) continue;
        rep.holder_c1 =
            std::max(rep.holder_c1, (grads[a] - grads[b]).norm() /
                                        std::pow(r, bvp.phi.gamma()));
    }
    return rep;
}

}  // namespace sklab::mapping
