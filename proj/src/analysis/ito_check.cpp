#include "sklab/analysis/ito_check.hpp"

#include <cmath>

#include "sklab/engine/graph_sim.hpp"

namespace sklab::analysis {

namespace {

// nodal original-coordinate gradients cached per component for fast
// trilinear lookups along paths
struct GradientField {
    const mapping::MixedBVP* bvp;
    std::vector<Vec> g;

    GradientField(const mapping::MixedBVP& b, const mapping::GridSolution& s)
        : bvp(&b) {
        g.resize(b.node_count());
        for (int k = 0; k < b.nz; ++k)
            for (int j = 0; j < (b.d == 3 ? b.nxy : 1); ++j)
                for (int i = 0; i < b.nxy; ++i) {
                    const std::size_t n =
                        b.d == 3 ? (std::size_t(k) * b.nxy + j) * b.nxy + i
                                 : std::size_t(k) * b.nxy + i;
                    g[n] = mapping::node_derivs(b, s, i, j, k).grad;
                }
    }

    bool eval(const Vec& x, Vec* out) const {
        const int dh = bvp->d - 1;
        Vec xh = x;
        xh.d = dh;
        const double z = x[dh] - bvp->phi.eval(xh.v.data());
        const double fi = (x[0] + 1.0) / bvp->hx();
        const double fj = bvp->d == 3 ? (x[1] + 1.0) / bvp->hx() : 0.0;
        const double fk = z / bvp->hz();
        if (fi < 0 || fk < 0 || fi > bvp->nxy - 1 || fk > bvp->nz - 1 ||
            (bvp->d == 3 && (fj < 0 || fj > bvp->nxy - 1)))
            return false;
        const int i = std::min(int(fi), bvp->nxy - 2);
        const int j = bvp->d == 3 ? std::min(int(fj), bvp->nxy - 2) : 0;
        const int k = std::min(int(fk), bvp->nz - 2);
        const double a = fi - i, b = bvp->d == 3 ? fj - j : 0.0, c = fk - k;
        *out = Vec::zero(bvp->d);
        for (int dk = 0; dk <= 1; ++dk)
            for (int dj = 0; dj <= (bvp->d == 3 ? 1 : 0); ++dj)
                for (int di = 0; di <= 1; ++di) {
                    const double w = (di ? a : 1 - a) *
                                     (bvp->d == 3 ? (dj ? b : 1 - b) : 1.0) *
                                     (dk ? c : 1 - c);
                    const std::size_t n =
                        bvp->d == 3
                            ? (std::size_t(k + dk) * bvp->nxy + j + dj) *
                                      bvp->nxy + i + di
                            : std::size_t(k + dk) * bvp->nxy + i + di;
                    for (int r = 0; r < bvp->d; ++r)
                        (*out)[r] += w * g[n][r];
                }
        return true;
    }
};

}  // namespace

ItoCheckResult ito_consistency(const mapping::MixedBVP& bvp,
                               const std::vector<mapping::GridSolution>& H,
                               const ItoCheckConfig& cfg) {
    if (int(H.size()) != bvp.d)
        throw std::invalid_argument("need one solution per component");
    const int d = bvp.d;
    std::vector<GradientField> fields;
    fields.reserve(std::size_t(d));
    for (const auto& s : H) fields.emplace_back(bvp, s);

    geom::GraphDomain dom(bvp.phi, d);
    ItoCheckResult out;
    std::vector<double> realized(std::size_t(d), 0.0),
        predicted(std::size_t(d), 0.0);
    std::vector<double> drift_sum(std::size_t(d), 0.0),
        drift_sum2(std::size_t(d), 0.0);

    for (int p = 0; p < cfg.paths; ++p) {
        engine::GraphSimConfig gc;
        gc.y0 = cfg.x0;
        gc.dt = cfg.dt;
        gc.horizon = cfg.horizon;
        gc.scheme = engine::GraphScheme::project;
        gc.seed = cfg.seed;
        gc.path_id = std::uint64_t(p);
        gc.record_every = 1;
        const auto path = engine::simulate_graph_domain(dom, gc);

        std::vector<double> y_prev(std::size_t(d), 0.0),
            y_cur(std::size_t(d), 0.0);
        bool ok = true;
        for (int c = 0; c < d; ++c)
            ok = ok && mapping::eval_solution(bvp, H[std::size_t(c)],
                                              path.y.front(), &y_prev[std::size_t(c)]);
        if (!ok) {
            ++out.paths_aborted;
            continue;
        }
        std::vector<double> dtot(std::size_t(d), 0.0);
        bool aborted = false;
        for (std::size_t s = 1; s < path.y.size(); ++s) {
            Vec grad;
            for (int c = 0; c < d && ok; ++c)
                ok = mapping::eval_solution(bvp, H[std::size_t(c)], path.y[s],
                                            &y_cur[std::size_t(c)]);
            if (!ok) {
                aborted = true;
                break;
            }
            for (int c = 0; c < d; ++c) {
                const double dy = y_cur[std::size_t(c)] - y_prev[std::size_t(c)];
                realized[std::size_t(c)] += dy * dy;
                dtot[std::size_t(c)] += dy;
                if (!fields[std::size_t(c)].eval(path.y[s - 1], &grad)) {
                    aborted = true;
                    break;
                }
                predicted[std::size_t(c)] += grad.norm2() * cfg.dt;
            }
            if (aborted) break;
            if (path.dl[s] > 0.0) {
                ++out.contact_steps;
                out.contact_yd_max = std::max(
                    out.contact_yd_max, std::abs(y_cur[std::size_t(d - 1)]));
            }
            y_prev = y_cur;
        }
        if (aborted) {
            ++out.paths_aborted;
            continue;
        }
        ++out.paths_used;
        for (int c = 0; c < d; ++c) {
            drift_sum[std::size_t(c)] += dtot[std::size_t(c)];
            drift_sum2[std::size_t(c)] += dtot[std::size_t(c)] * dtot[std::size_t(c)];
        }
    }

    out.qv_ratio.resize(std::size_t(d), 0.0);
    for (int c = 0; c < d; ++c)
        out.qv_ratio[std::size_t(c)] =
            predicted[std::size_t(c)] > 0.0
                ? realized[std::size_t(c)] / predicted[std::size_t(c)]
                : 0.0;
    for (int c = 0; c < d - 1; ++c) {
        const double n = double(out.paths_used);
        if (n < 2) break;
        const double mean = drift_sum[std::size_t(c)] / n;
        const double var =
            drift_sum2[std::size_t(c)] / n - mean * mean;
        const double se = std::sqrt(std::max(var, 1e-30) / n);
        out.drift_z_max = std::max(out.drift_z_max, std::abs(mean / se));
    }
    return out;
}

}  // namespace sklab::analysis
