#include "sklab/engine/graph_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "sklab/engine/noise.hpp"

namespace sklab::engine {

namespace {

constexpr std::size_t kChunkSteps = 1024;

// push distance along the fixed direction n from x (below the graph) to the
// boundary: solve x_d + s n_d = Phi(xhat + s nhat) by Newton
double push_to_boundary(const geom::GraphDomain& dom, const Vec& x,
                        const Vec& n) {
    const int d = dom.d;
    double s = -dom.vertical_gap(x) / n[d - 1];
    for (int iter = 0; iter < 3; ++iter) {
        Vec p = x;
        for (int i = 0; i < d; ++i) p[i] += s * n[i];
        double grad[4];
        dom.phi.gradient(p.v.data(), grad);
        double gdotn = 0.0;
        for (int i = 0; i < d - 1; ++i) gdotn += grad[i] * n[i];
        const double g = dom.vertical_gap(p);
        const double dg = n[d - 1] - gdotn;
        s -= g / dg;
    }
    return s;
}

}  // namespace

GraphPath simulate_graph_domain(const geom::GraphDomain& domain,
                                const GraphSimConfig& cfg) {
    if (!domain.contains(cfg.y0))
        throw std::invalid_argument("y0 outside the closed domain");
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0))
        throw std::invalid_argument("dt and horizon must be positive");
    const int d = domain.d;
    NoiseStream noise(cfg.seed, cfg.path_id, d, cfg.dt);

    GraphPath out;
    Vec x = cfg.y0;
    double t = 0.0, local_time = 0.0, dl_step = 0.0;
    const std::uint64_t max_steps =
        std::uint64_t(std::ceil(cfg.horizon / cfg.dt));
    std::vector<double> dw(std::size_t(d) * kChunkSteps);

    const auto record = [&] {
        out.t.push_back(t);
        out.y.push_back(x);
        out.l.push_back(local_time);
        out.dl.push_back(dl_step);
    };
    if (cfg.record_every > 0) record();

    std::uint64_t step = 0;
    out.reason = StopReason::horizon;
    while (step < max_steps) {
        const std::size_t n =
            std::size_t(std::min<std::uint64_t>(kChunkSteps, max_steps - step));
        noise.fill_increments(step, n, dw.data());
        for (std::size_t i = 0; i < n && out.reason == StopReason::horizon;) {
            Vec xs = x;
            for (int c = 0; c < d; ++c) xs[c] += dw[std::size_t(d) * i + c];
            dl_step = 0.0;
            if (cfg.scheme == GraphScheme::project) {
                if (!domain.contains(xs)) {
                    Vec bp = xs;
                    bp[d - 1] = domain.phi.eval(xs.v.data());
                    const Vec nrm = geom::inward_normal(domain, bp);
                    const double s = push_to_boundary(domain, xs, nrm);
                    for (int c = 0; c < d; ++c) xs[c] += s * nrm[c];
                    dl_step = s;
                }
            } else {
                Vec u = geom::flatten(domain, xs);
                if (u[d - 1] < 0.0) {
                    const double inc = -u[d - 1];
                    u[d - 1] = 0.0;
                    xs = geom::unflatten(domain, u);
                    const Vec nrm = geom::inward_normal(domain, xs);
                    dl_step = inc * nrm[d - 1];
                }
            }
            x = xs;
            local_time += dl_step;
            t += cfg.dt;
            ++step;
            ++i;
            if (cfg.record_every > 0 &&
                step % std::uint64_t(cfg.record_every) == 0)
                record();
            if (cfg.box_halfwidth > 0.0) {
                for (int c = 0; c < d; ++c)
                    if (std::abs(x[c]) > cfg.box_halfwidth) {
                        out.reason = StopReason::box_exit;
                        break;
                    }
            }
        }
        if (out.reason != StopReason::horizon) break;
    }
    out.t_end = t;
    out.steps = std::uint64_t(std::llround(t / cfg.dt));
    out.y_end = x;
    out.l_end = local_time;
    if (cfg.record_every > 0) record();
    return out;
}

}  // namespace sklab::engine
