#include "sklab/engine/halfspace.hpp"

#include <cmath>
#include <stdexcept>

#include "sklab/engine/noise.hpp"
#include "sklab/engine/skorokhod.hpp"

namespace sklab::engine {

StopSpec StopSpec::parse(const std::string& text) {
    StopSpec s;
    if (text == "horizon") s.kind = Kind::horizon;
    else if (text == "annulus") s.kind = Kind::annulus;
    else if (text == "clock") s.kind = Kind::clock;
    else if (text == "localtime") s.kind = Kind::local_time;
    else if (text == "distance1") s.kind = Kind::distance1;
    else throw std::invalid_argument("unknown stopping rule: " + text);
    return s;
}

std::string StopSpec::describe() const {
    switch (kind) {
        case Kind::horizon: return "horizon";
        case Kind::annulus: return "annulus";
        case Kind::clock: return "clock";
        case Kind::local_time: return "localtime";
        case Kind::distance1: return "distance1";
    }
    return "?";
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::none: return "none";
        case StopReason::horizon: return "horizon";
        case StopReason::annulus_inner: return "annulus_inner";
        case StopReason::annulus_outer: return "annulus_outer";
        case StopReason::clock: return "clock";
        case StopReason::local_time: return "local_time";
        case StopReason::distance1: return "distance1";
        case StopReason::box_exit: return "box_exit";
    }
    return "?";
}

namespace {

constexpr std::size_t kChunkSteps = 2048;

inline double eval_phi(const field::CounterexampleField* f, bool fast,
                       double x, double y, double z) {
    if (!f) return 0.0;
    const double p = fast ? f->phi_total_fast(x, y, z) : f->phi_total(x, y, z);
    if (!(p >= 0.0 && p < 64.0))
        throw std::runtime_error("sigma evaluation out of range");
    return p;
}

inline void eval_phi_pair(const field::CounterexampleField* f, bool fast,
                          double x1, double y1, double x2, double y2,
                          double z, double out[2]) {
    if (!f) {
        out[0] = out[1] = 0.0;
        return;
    }
    if (fast) {
        f->phi_pair_fast(x1, y1, x2, y2, z, out);
    } else {
        out[0] = f->phi_total(x1, y1, z);
        out[1] = f->phi_total(x2, y2, z);
    }
    if (!(out[0] >= 0.0 && out[0] < 64.0 && out[1] >= 0.0 && out[1] < 64.0))
        throw std::runtime_error("sigma evaluation out of range");
}

}  // namespace

CouplingRun run_coupling(const CouplingConfig& cfg) {
    if (cfg.y0[2] != cfg.y0_prime[2])
        throw std::invalid_argument("coupling requires Y3(0) = Y'3(0)");
    if (cfg.y0[2] < 0.0) throw std::invalid_argument("y0 outside closed U");
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0))
        throw std::invalid_argument("dt and horizon must be positive");

    NoiseStream noise(cfg.seed, cfg.path_id, 3, cfg.dt);

    CouplingRun run;
    const double dx0 = cfg.y0[0] - cfg.y0_prime[0];
    const double dy0 = cfg.y0[1] - cfg.y0_prime[1];
    const double d0 = std::sqrt(dx0 * dx0 + dy0 * dy0);
    run.dist0 = d0;

    const double inner = cfg.stop.a0 * d0;
    const double outer = cfg.stop.a1 * d0;
    const double clock_thr = cfg.stop.b * d0 * d0;

    double a1 = cfg.y0[0], a2 = cfg.y0[1];
    double b1 = cfg.y0_prime[0], b2 = cfg.y0_prime[1];
    double m3 = cfg.y0[2];  // unreflected third coordinate
    SkorokhodState sk;
    double y3 = m3;
    double t = 0.0, clock = 0.0, local_time = 0.0;

    double phiA = eval_phi(cfg.field, cfg.use_fast_field, a1, a2, y3);
    double phiB = eval_phi(cfg.field, cfg.use_fast_field, b1, b2, y3);

    const std::uint64_t max_steps =
        std::uint64_t(std::ceil(cfg.horizon / cfg.dt));
    std::vector<double> dw(3 * kChunkSteps);

    const auto record = [&](double r2) {
        run.trace_t.push_back(t);
        run.trace_r2.push_back(r2);
        run.trace_clock.push_back(clock);
        run.trace_l.push_back(local_time);
    };
    if (cfg.trace_every > 0) record(d0 * d0);

    std::uint64_t step = 0;
    run.reason = StopReason::horizon;
    while (step < max_steps) {
        const std::size_t n =
            std::size_t(std::min<std::uint64_t>(kChunkSteps, max_steps - step));
        noise.fill_increments(step, n, dw.data());
        run.increment_checksum =
            fnv1a(dw.data(), 3 * n * sizeof(double), run.increment_checksum);
        for (std::size_t i = 0; i < n; ++i) {
            const double dw1 = dw[3 * i], dw2 = dw[3 * i + 1],
                         dw3 = dw[3 * i + 2];
            a1 += (1.0 + phiA) * dw1;
            a2 += (1.0 + phiA) * dw2;
            b1 += (1.0 + phiB) * dw1;
            b2 += (1.0 + phiB) * dw2;
            m3 += dw3;
            local_time += sk.push(m3);
            y3 = sk.reflect(m3);  // exact: y3 >= 0 always

            double pair[2];
            eval_phi_pair(cfg.field, cfg.use_fast_field, a1, a2, b1, b2, y3,
                          pair);
            const double phiA1 = pair[0], phiB1 = pair[1];
            const double e0 = phiA - phiB, e1 = phiA1 - phiB1;
            clock += 0.5 * (e0 * e0 + e1 * e1) * cfg.dt;
            phiA = phiA1;
            phiB = phiB1;
            t += cfg.dt;
            ++step;

            const double du = a1 - b1, dv = a2 - b2;
            const double r2 = du * du + dv * dv;
            const double dist = std::sqrt(r2);
            if (cfg.trace_every > 0 && step % std::uint64_t(cfg.trace_every) == 0)
                record(r2);

            StopReason fired = StopReason::none;
            switch (cfg.stop.kind) {
                case StopSpec::Kind::horizon:
                    break;
                case StopSpec::Kind::annulus:
                    if (dist <= inner) fired = StopReason::annulus_inner;
                    else if (dist >= outer) fired = StopReason::annulus_outer;
                    break;
                case StopSpec::Kind::clock:
                    if (clock >= clock_thr && d0 > 0.0)
                        fired = StopReason::clock;
                    break;
                case StopSpec::Kind::local_time:
                    if (local_time >= cfg.stop.ell)
                        fired = StopReason::local_time;
                    break;
                case StopSpec::Kind::distance1:
                    if (dist >= cfg.stop.delta) fired = StopReason::distance1;
                    break;
            }
            if (fired != StopReason::none) {
                run.reason = fired;
                step = max_steps;  // leave the chunk loop
                break;
            }
        }
        if (run.reason != StopReason::horizon) break;
    }

    const double du = a1 - b1, dv = a2 - b2;
    run.t_stop = t;
    run.steps = std::uint64_t(std::llround(t / cfg.dt));
    run.r2_end = du * du + dv * dv;
    run.dist_end = std::sqrt(run.r2_end);
    run.clock_end = clock;
    run.local_time_end = local_time;
    run.y_end = {a1, a2, y3};
    run.y_prime_end = {b1, b2, y3};
    if (cfg.trace_every > 0) record(run.r2_end);
    return run;
}

HalfspacePath simulate_halfspace(const HalfspaceConfig& cfg) {
    if (cfg.y0[2] < 0.0) throw std::invalid_argument("y0 outside closed U");
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0))
        throw std::invalid_argument("dt and horizon must be positive");
    NoiseStream noise(cfg.seed, cfg.path_id, 3, cfg.dt);

    HalfspacePath out;
    double y1 = cfg.y0[0], y2 = cfg.y0[1];
    double m3 = cfg.y0[2];
    SkorokhodState sk;
    double y3 = m3, t = 0.0, local_time = 0.0;
    double phi = eval_phi(cfg.field, cfg.use_fast_field, y1, y2, y3);

    const std::uint64_t max_steps =
        std::uint64_t(std::ceil(cfg.horizon / cfg.dt));
    std::vector<double> dw(3 * kChunkSteps);
    const auto record = [&] {
        out.t.push_back(t);
        out.y1.push_back(y1);
        out.y2.push_back(y2);
        out.y3.push_back(y3);
        out.l.push_back(local_time);
    };
    if (cfg.record_every > 0) record();

    std::uint64_t step = 0;
    out.reason = StopReason::horizon;
    while (step < max_steps) {
        const std::size_t n =
            std::size_t(std::min<std::uint64_t>(kChunkSteps, max_steps - step));
        noise.fill_increments(step, n, dw.data());
        for (std::size_t i = 0; i < n; ++i) {
            y1 += (1.0 + phi) * dw[3 * i];
            y2 += (1.0 + phi) * dw[3 * i + 1];
            m3 += dw[3 * i + 2];
            local_time += sk.push(m3);
            y3 = sk.reflect(m3);
            phi = eval_phi(cfg.field, cfg.use_fast_field, y1, y2, y3);
            t += cfg.dt;
            ++step;
            if (cfg.record_every > 0 &&
                step % std::uint64_t(cfg.record_every) == 0)
                record();
            if (cfg.local_time_stop >= 0.0 &&
                local_time >= cfg.local_time_stop) {
                out.reason = StopReason::local_time;
                step = max_steps;
                break;
            }
        }
        if (out.reason != StopReason::horizon) break;
    }
    out.t_end = t;
    out.steps = std::uint64_t(std::llround(t / cfg.dt));
    out.y_end = {y1, y2, y3};
    out.l_end = local_time;
    if (cfg.record_every > 0) record();
    return out;
}

}  // namespace sklab::engine
