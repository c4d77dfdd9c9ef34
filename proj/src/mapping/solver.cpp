#include <array>
#include <cmath>
#include <stdexcept>

#include "sklab/mapping/bvp.hpp"

namespace sklab::mapping {

MixedBVP::MixedBVP(geom::BoundaryFunction boundary, int dim, int nodes_xy,
                   int nodes_z)
    : phi(std::move(boundary)), d(dim), nxy(nodes_xy), nz(nodes_z) {
    if (d != 2 && d != 3)
        throw std::invalid_argument("grid solves support d = 2 or 3 only");
    if (phi.dim() != d - 1)
        throw std::invalid_argument("boundary dimension mismatch");
    if (nxy < 5 || nz < 5) throw std::invalid_argument("grid too small");
    // the grid must resolve the boundary graph: |Phi| variation per cell < hz
    const int n = nxy - 1;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < (d == 3 ? n : 1); ++j) {
            double lo = 1e300, hi = -1e300;
            for (int s = 0; s < (d == 3 ? 9 : 3); ++s) {
                Vec x = Vec::zero(d - 1);
                x[0] = -1.0 + hx() * (i + 0.5 * (s % 3));
                if (d == 3) x[1] = -1.0 + hx() * (j + 0.5 * (s / 3));
                const double v = phi.eval(x.v.data());
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo >= std::max(hz(), hx()))
                throw std::invalid_argument(
                    "grid does not resolve the boundary graph");
        }
    }
}

std::size_t MixedBVP::node_count() const {
    std::size_t c = std::size_t(nxy) * nz;
    if (d == 3) c *= std::size_t(nxy);
    return c;
}

FaceClass classify_node(const MixedBVP& bvp, int i, int j, int k) {
    const bool side = i == 0 || i == bvp.nxy - 1 ||
                      (bvp.d == 3 && (j == 0 || j == bvp.nxy - 1));
    if (side || k == bvp.nz - 1) return FaceClass::dirichlet;
    if (k == 0) return FaceClass::graph_face;
    return FaceClass::interior;
}

double boundary_value(const MixedBVP& bvp, int component, int i, int j,
                      int k) {
    Vec xh = Vec::zero(bvp.d - 1);
    xh[0] = -1.0 + bvp.hx() * i;
    if (bvp.d == 3) xh[1] = -1.0 + bvp.hx() * j;
    if (bvp.dirichlet_data) {
        Vec x = Vec::zero(bvp.d);
        x[0] = xh[0];
        if (bvp.d == 3) x[1] = xh[1];
        x[bvp.d - 1] = bvp.hz() * k + bvp.phi.eval(xh.v.data());
        return bvp.dirichlet_data(x);
    }
    if (component == bvp.d - 1) {
        if (classify_node(bvp, i, j, k) == FaceClass::graph_face) return 0.0;
        return bvp.hz() * k + bvp.phi.eval(xh.v.data());
    }
    return xh[component];
}

namespace {

// Element stiffness blocks S^{rs}[a][b] = int dN_a/dr dN_b/ds over the brick
// (hx^{D-1} x hz), 2-point Gauss per axis (exact for Q1).
template <int D>
struct ElementBlocks {
    static constexpr int NN = 1 << D;
    std::array<std::array<std::array<std::array<double, NN>, NN>, D>, D> S{};

    ElementBlocks(double hx, double hz) {
        const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0),
                              0.5 + 0.5 / std::sqrt(3.0)};
        double h[D];
        for (int r = 0; r < D - 1; ++r) h[r] = hx;
        h[D - 1] = hz;
        double vol = 1.0;
        for (int r = 0; r < D; ++r) vol *= h[r];
        const double wq = vol / (1 << D);  // equal Gauss weights

        int q[D];
        for (int flat = 0; flat < (1 << D); ++flat) {
            for (int r = 0; r < D; ++r) q[r] = (flat >> r) & 1;
            // shape gradients at this quadrature point
            double grad[NN][D];
            for (int a = 0; a < NN; ++a) {
                for (int r = 0; r < D; ++r) {
                    double g = 1.0;
                    for (int s = 0; s < D; ++s) {
                        const int bit = (a >> s) & 1;
                        const double t = gp[q[s]];
                        if (s == r)
                            g *= (bit ? 1.0 : -1.0) / h[s];
                        else
                            g *= bit ? t : 1.0 - t;
                    }
                    grad[a][r] = g;
                }
            }
            for (int r = 0; r < D; ++r)
                for (int s = 0; s < D; ++s)
                    for (int a = 0; a < NN; ++a)
                        for (int b = 0; b < NN; ++b)
                            S[r][s][a][b] += wq * grad[a][r] * grad[b][s];
        }
    }
};

template <int D>
struct Assembled {
    static constexpr int W = D == 3 ? 27 : 9;
    int nxy, nz;
    std::vector<double> interior;  // per xy node, W weights
    std::vector<double> bottom;
    std::vector<bool> pinned;      // per node
    std::vector<double> dirichlet; // boundary values on pinned nodes

    std::size_t xy_count() const {
        return D == 3 ? std::size_t(nxy) * nxy : std::size_t(nxy);
    }
    std::size_t node(int i, int j, int k) const {
        return D == 3 ? (std::size_t(k) * nxy + j) * nxy + i
                      : std::size_t(k) * nxy + i;
    }
    std::size_t xy_node(int i, int j) const {
        return D == 3 ? std::size_t(j) * nxy + i : std::size_t(i);
    }
    static int woff(int di, int dj, int dk) {
        return D == 3 ? ((dk + 1) * 3 + (dj + 1)) * 3 + (di + 1)
                      : (dk + 1) * 3 + (di + 1);
    }
};

template <int D>
Assembled<D> assemble(const MixedBVP& bvp, int component) {
    Assembled<D> as;
    as.nxy = bvp.nxy;
    as.nz = bvp.nz;
    as.interior.assign(as.xy_count() * Assembled<D>::W, 0.0);
    as.bottom.assign(as.xy_count() * Assembled<D>::W, 0.0);

    const ElementBlocks<D> blocks(bvp.hx(), bvp.hz());
    constexpr int NN = ElementBlocks<D>::NN;

    const int ncol = bvp.nxy - 1;
    double grad[4];
    for (int ej = 0; ej < (D == 3 ? ncol : 1); ++ej) {
        for (int ei = 0; ei < ncol; ++ei) {
            Vec xc = Vec::zero(D - 1);
            xc[0] = -1.0 + bvp.hx() * (ei + 0.5);
            if (D == 3) xc[1] = -1.0 + bvp.hx() * (ej + 0.5);
            bvp.phi.gradient(xc.v.data(), grad);

            // K = S^xx (+ S^yy) + (1+|g|^2) S^zz - sum_r g_r (S^rz + S^zr)
            double g2 = 0.0;
            for (int r = 0; r < D - 1; ++r) g2 += grad[r] * grad[r];
            double K[NN][NN];
            for (int a = 0; a < NN; ++a)
                for (int b = 0; b < NN; ++b) {
                    double v = 0.0;
                    for (int r = 0; r < D - 1; ++r) v += blocks.S[r][r][a][b];
                    v += (1.0 + g2) * blocks.S[D - 1][D - 1][a][b];
                    for (int r = 0; r < D - 1; ++r)
                        v -= grad[r] * (blocks.S[r][D - 1][a][b] +
                                        blocks.S[D - 1][r][a][b]);
                    K[a][b] = v;
                }

            for (int a = 0; a < NN; ++a) {
                const int aix = a & 1;
                const int aiy = D == 3 ? ((a >> 1) & 1) : 0;
                const int az = (a >> (D - 1)) & 1;
                const std::size_t nxynode =
                    as.xy_node(ei + aix, D == 3 ? ej + aiy : 0);
                for (int b = 0; b < NN; ++b) {
                    const int bix = b & 1;
                    const int biy = D == 3 ? ((b >> 1) & 1) : 0;
                    const int bz = (b >> (D - 1)) & 1;
                    const int off = Assembled<D>::woff(
                        bix - aix, biy - aiy, bz - az);
                    as.interior[nxynode * Assembled<D>::W + off] += K[a][b];
                    if (az == 0)
                        as.bottom[nxynode * Assembled<D>::W + off] += K[a][b];
                }
            }
        }
    }

    as.pinned.assign(bvp.node_count(), false);
    as.dirichlet.assign(bvp.node_count(), 0.0);
    for (int k = 0; k < bvp.nz; ++k)
        for (int j = 0; j < (D == 3 ? bvp.nxy : 1); ++j)
            for (int i = 0; i < bvp.nxy; ++i) {
                const FaceClass fc = classify_node(bvp, i, j, k);
                const bool graph_dirichlet =
                    bvp.graph_bc ? *bvp.graph_bc == GraphBC::dirichlet
                                 : component == bvp.d - 1;
                const bool pin = fc == FaceClass::dirichlet ||
                                 (fc == FaceClass::graph_face && graph_dirichlet);
                if (pin) {
                    const std::size_t n = as.node(i, j, k);
                    as.pinned[n] = true;
                    as.dirichlet[n] = boundary_value(bvp, component, i, j, k);
                }
            }
    return as;
}

// y = K x over non-pinned rows (pinned rows: y = x); x must hold zeros on
// pinned entries when used as a CG direction.
template <int D>
void apply(const Assembled<D>& as, const std::vector<double>& x,
           std::vector<double>& y) {
    const int nxy = as.nxy, nz = as.nz;
    for (int k = 0; k < nz; ++k) {
        const bool bottom_row = k == 0;
        for (int j = 0; j < (D == 3 ? nxy : 1); ++j) {
            for (int i = 0; i < nxy; ++i) {
                const std::size_t n = as.node(i, j, k);
                if (as.pinned[n]) {
                    y[n] = x[n];
                    continue;
                }
                const double* w =
                    (bottom_row ? as.bottom.data() : as.interior.data()) +
                    as.xy_node(i, j) * Assembled<D>::W;
                double acc = 0.0;
                const int dk0 = bottom_row ? 0 : -1;
                for (int dk = dk0; dk <= 1; ++dk) {
                    if (k + dk < 0 || k + dk >= nz) continue;
                    for (int dj = (D == 3 ? -1 : 0); dj <= (D == 3 ? 1 : 0);
                         ++dj) {
                        for (int di = -1; di <= 1; ++di) {
                            const double wv =
                                w[Assembled<D>::woff(di, dj, dk)];
                            acc += wv * x[as.node(i + di, j + dj, k + dk)];
                        }
                    }
                }
                y[n] = acc;
            }
        }
    }
}

template <int D>
GridSolution solve_impl(const MixedBVP& bvp, int component) {
    const Assembled<D> as = assemble<D>(bvp, component);
    const std::size_t N = bvp.node_count();

    std::vector<double> gext(N, 0.0), f(N, 0.0), u(N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
        if (as.pinned[n]) gext[n] = as.dirichlet[n];
    apply<D>(as, gext, f);
    for (std::size_t n = 0; n < N; ++n) f[n] = as.pinned[n] ? 0.0 : -f[n];

    // warm start: the boundary-data formula is the exact solution when Phi
    // is flat and stays close for small seminorms
    for (int k = 0; k < bvp.nz; ++k)
        for (int j = 0; j < (D == 3 ? bvp.nxy : 1); ++j)
            for (int i = 0; i < bvp.nxy; ++i) {
                const std::size_t n = as.node(i, j, k);
                if (!as.pinned[n])
                    u[n] = boundary_value(bvp, component, i, j, k);
            }

    // Jacobi preconditioner from the stencil diagonal
    std::vector<double> dinv(N, 1.0);
    for (int k = 0; k < bvp.nz; ++k)
        for (int j = 0; j < (D == 3 ? bvp.nxy : 1); ++j)
            for (int i = 0; i < bvp.nxy; ++i) {
                const std::size_t n = as.node(i, j, k);
                if (as.pinned[n]) continue;
                const double* w =
                    (k == 0 ? as.bottom.data() : as.interior.data()) +
                    as.xy_node(i, j) * Assembled<D>::W;
                const double dg = w[Assembled<D>::woff(0, 0, 0)];
                dinv[n] = dg > 0.0 ? 1.0 / dg : 1.0;
            }

    GridSolution sol;
    sol.component = component;
    sol.d = bvp.d;
    sol.nxy = bvp.nxy;
    sol.nz = bvp.nz;

    std::vector<double> r(N, 0.0), z(N, 0.0), p(N, 0.0), Ap(N, 0.0);
    apply<D>(as, u, Ap);
    double fn2 = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        if (as.pinned[n]) continue;
        r[n] = f[n] - Ap[n];
        fn2 += f[n] * f[n];
    }
    sol.rhs_norm = std::sqrt(fn2);
    const double target =
        bvp.solve_tol * std::max(sol.rhs_norm, 1e-30);

    double rz = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        z[n] = dinv[n] * r[n];
        p[n] = z[n];
        rz += r[n] * z[n];
    }
    double rn = 0.0;
    for (std::size_t n = 0; n < N; ++n) rn += r[n] * r[n];
    rn = std::sqrt(rn);

    int it = 0;
    while (rn > target && it < bvp.max_iters) {
        apply<D>(as, p, Ap);
        double pAp = 0.0;
        for (std::size_t n = 0; n < N; ++n)
            if (!as.pinned[n]) pAp += p[n] * Ap[n];
        const double alpha = rz / pAp;
        for (std::size_t n = 0; n < N; ++n) {
            if (as.pinned[n]) continue;
            u[n] += alpha * p[n];
            r[n] -= alpha * Ap[n];
        }
        double rz_new = 0.0;
        rn = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            if (as.pinned[n]) continue;
            z[n] = dinv[n] * r[n];
            rz_new += r[n] * z[n];
            rn += r[n] * r[n];
        }
        rn = std::sqrt(rn);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t n = 0; n < N; ++n)
            if (!as.pinned[n]) p[n] = z[n] + beta * p[n];
        ++it;
        if (it % 25 == 0) sol.residual_history.push_back(rn);
    }

    sol.iterations = it;
    sol.residual_norm = rn;
    sol.residual_history.push_back(rn);
    sol.converged = rn <= target;
    sol.values.assign(N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
        sol.values[n] = as.pinned[n] ? gext[n] : u[n];
    for (int j = 0; j < (D == 3 ? bvp.nxy : 1); ++j)
        for (int i = 0; i < bvp.nxy; ++i) {
            const std::size_t n = as.node(i, j, 0);
            if (!as.pinned[n])
                sol.graph_flux_residual_max =
                    std::max(sol.graph_flux_residual_max, std::abs(r[n]));
        }
    return sol;
}

}  // namespace

GridSolution solve_component(const MixedBVP& bvp, int component) {
    if (component < 0 || component >= bvp.d)
        throw std::invalid_argument("component out of range");
    return bvp.d == 3 ? solve_impl<3>(bvp, component)
                      : solve_impl<2>(bvp, component);
}

}  // namespace sklab::mapping
