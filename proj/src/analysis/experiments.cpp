#include "sklab/analysis/experiments.hpp"

#include <cmath>
#include <stdexcept>

#include "sklab/common/rng_util.hpp"
#include "sklab/engine/noise.hpp"
#include "sklab/engine/skorokhod.hpp"

namespace sklab::analysis {

double bessel_exit_prob(double a, double b, double r0) {
    if (!(a > 0.0) || !(b > a) || r0 < a || r0 > b)
        throw std::invalid_argument("bessel_exit_prob: need 0 < a <= r0 <= b, a < b");
    return std::log(r0 / a) / std::log(b / a);
}

ExitRow exit_table(const std::vector<engine::CouplingRun>& runs, double gamma,
                   int j, double a0, double a1) {
    ExitRow row;
    row.gamma = gamma;
    row.j = j;
    for (const auto& r : runs) {
        ++row.trials;
        if (r.reason == engine::StopReason::annulus_inner)
            ++row.hit_inner;
        else if (r.reason == engine::StopReason::annulus_outer)
            ++row.hit_outer;
        else
            ++row.excluded;
    }
    const std::uint64_t n = row.hit_inner + row.hit_outer;
    if (n > 0) {
        row.p_outer = double(row.hit_outer) / double(n);
        row.std_error = std::sqrt(row.p_outer * (1.0 - row.p_outer) /
                                  double(n));
    }
    const double d0 = std::pow(2.0, double(-j));
    row.oracle = bessel_exit_prob(a0 * d0, a1 * d0, d0);
    return row;
}

TimeChangeResult time_change_test(const std::vector<engine::CouplingRun>& runs,
                                  double b, double alpha,
                                  std::size_t min_stopped,
                                  std::uint64_t oracle_seed,
                                  std::size_t oracle_n) {
    TimeChangeResult res;
    std::vector<double> observed;
    for (const auto& r : runs) {
        if (r.reason == engine::StopReason::clock && r.dist0 > 0.0) {
            observed.push_back(r.dist_end / r.dist0);
            ++res.stopped;
        } else {
            ++res.excluded;
        }
    }
    res.enough = res.stopped >= min_stopped;
    if (!res.enough) return res;

    if (oracle_n == 0) oracle_n = observed.size();
    std::vector<double> oracle;
    oracle.reserve(oracle_n);
    SplitMix64 rng(oracle_seed);
    const double sb = std::sqrt(b);
    while (oracle.size() < oracle_n) {
        const double u1 = rng.unit(), u2 = rng.unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double g1 = r * std::cos(6.283185307179586 * u2);
        const double g2 = r * std::sin(6.283185307179586 * u2);
        oracle.push_back(std::sqrt((1.0 + sb * g1) * (1.0 + sb * g1) +
                                   sb * g2 * sb * g2));
    }
    res.ks = ks_two_sample(std::move(observed), std::move(oracle), alpha);
    return res;
}

LocalTimeScaling local_time_scaling(
    const std::vector<int>& k_levels,
    const std::vector<std::vector<double>>& l_samples, double gamma) {
    if (k_levels.size() < 3)
        throw std::invalid_argument("local_time_scaling: need >= 3 levels");
    if (k_levels.size() != l_samples.size())
        throw std::invalid_argument("local_time_scaling: shape mismatch");
    LocalTimeScaling out;
    out.predicted_slope = -(1.0 - 2.0 * gamma) * std::log(2.0);
    std::vector<double> x, y, se;
    for (std::size_t i = 0; i < k_levels.size(); ++i) {
        const auto& s = l_samples[i];
        if (s.size() < 2)
            throw std::invalid_argument("local_time_scaling: empty level");
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= double(s.size());
        double var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        var /= double(s.size() - 1);
        const double sem = std::sqrt(var / double(s.size()));
        out.ks.push_back(k_levels[i]);
        out.mean_l.push_back(mean);
        out.se_l.push_back(sem);
        x.push_back(double(k_levels[i]));
        y.push_back(std::log(mean));
        se.push_back(sem / mean);  // delta method for ln
    }
    out.fit = fit_line(x, y, se);
    return out;
}

LipschitzCheck check_weighted_lipschitz(const field::CounterexampleField& f,
                                        int n_pairs, std::uint64_t seed) {
    LipschitzCheck out;
    SplitMix64 rng(seed);
    const WeightFunction G{f.gamma()};
    for (int t = 0; t < n_pairs; ++t) {
        double x[3], y[3];
        for (int c = 0; c < 2; ++c) {
            x[c] = rng.range(-2.0, 2.0);
            y[c] = x[c] + rng.range(-0.5, 0.5);
        }
        // heights log-distributed, occasionally straddling the reflection
        x[2] = std::exp(rng.range(std::log(1e-6), std::log(2.0)));
        y[2] = std::exp(rng.range(std::log(1e-6), std::log(2.0)));
        if (t % 4 == 0) y[2] = -y[2];
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) d2 += (x[c] - y[c]) * (x[c] - y[c]);
        const double dist = std::sqrt(d2);
        if (dist < 1e-9) continue;
        const double num =
            std::abs(f.sigma11(x[0], x[1], x[2]) - f.sigma11(y[0], y[1], y[2]));
        const double ratio = num / (dist * (G(x[2]) + G(y[2])));
        if (ratio > out.max_ratio) {
            out.max_ratio = ratio;
            out.arg_x = {x[0], x[1], x[2]};
            out.arg_y = {y[0], y[1], y[2]};
        }
    }
    return out;
}

IntegrabilityResult integrability_check(double gamma, double dt, double horizon,
                                        int paths, std::uint64_t seed) {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("gamma must be in (0, 1]");
    IntegrabilityResult out;
    const std::uint64_t steps = std::uint64_t(std::ceil(horizon / dt));
    // The discrete reflected path sits exactly at 0 on pushing steps, which
    // the continuous occupation measure never does; heights below the step
    // resolution sqrt(dt) are not sampled meaningfully, so the integrand is
    // floored there. 1e-12 stays as the overflow guard of last resort.
    const double floor_h = std::max(std::sqrt(dt), 1e-12);
    double sum = 0.0, sum2 = 0.0;
    std::vector<double> dw(steps);
    for (int p = 0; p < paths; ++p) {
        engine::NoiseStream noise(seed, std::uint64_t(p), 1, dt);
        noise.fill_increments(0, steps, dw.data());
        engine::SkorokhodState sk;
        double m = 0.0, acc = 0.0;
        for (std::uint64_t i = 0; i < steps; ++i) {
            m += dw[i];
            sk.push(m);
            double y = sk.reflect(m);
            if (y < floor_h) {
                y = floor_h;
                ++out.clamped_steps;
            }
            acc += std::pow(y, 2.0 * (gamma - 1.0)) * dt;
        }
        sum += acc;
        sum2 += acc * acc;
    }
    out.estimate = sum / paths;
    const double var = sum2 / paths - out.estimate * out.estimate;
    out.std_error = std::sqrt(std::max(var, 0.0) / double(paths));
    return out;
}

const DivergenceCell* DivergenceMatrix::cell(double gamma, int j) const {
    for (const auto& c : cells)
        if (c.j == j && std::abs(c.gamma - gamma) < 1e-12) return &c;
    return nullptr;
}

DivergenceMatrix divergence_experiment(const DivergenceConfig& cfg) {
    if (cfg.gammas.empty() || cfg.js.empty())
        throw std::invalid_argument("divergence_experiment: empty sweep");
    if (!(cfg.delta > 0.0))
        throw std::invalid_argument("divergence_experiment: delta must be > 0");
    DivergenceMatrix out;
    for (double gamma : cfg.gammas) {
        field::CounterexampleField f(
            {gamma, cfg.n1, cfg.m_max, cfg.fourier_modes});
        std::vector<double> column;
        for (int j : cfg.js) {
            DivergenceCell cell;
            cell.gamma = gamma;
            cell.j = j;
            cell.paths = cfg.paths;
            const double sep = std::pow(2.0, double(-j));
            const double dt = cfg.dt_safety * std::pow(4.0, double(-j - 4));
            for (std::uint64_t p = 0; p < cfg.paths; ++p) {
                engine::CouplingConfig cc;
                cc.field = &f;
                cc.y0 = {0.0, 0.0, 0.0};
                cc.y0_prime = {sep, 0.0, 0.0};
                cc.dt = dt;
                cc.horizon = cfg.t0;
                cc.stop.kind = engine::StopSpec::Kind::distance1;
                cc.stop.delta = cfg.delta;
                cc.seed = hash_combine(cfg.seed,
                                       hash_combine(std::uint64_t(j),
                                                    std::uint64_t(gamma * 1e9)));
                cc.path_id = p;
                const auto run = engine::run_coupling(cc);
                if (run.reason == engine::StopReason::distance1) ++cell.reached;
            }
            cell.p = double(cell.reached) / double(cell.paths);
            cell.std_error =
                std::sqrt(cell.p * (1.0 - cell.p) / double(cell.paths));
            if (cfg.progress) cfg.progress(cell);
            column.push_back(cell.p);
            out.cells.push_back(cell);
        }
        out.gammas.push_back(gamma);
        if (column.size() >= 3)
            out.trend.push_back(mann_kendall(column));
        else
            out.trend.push_back(MannKendall{});
    }
    return out;
}

}  // namespace sklab::analysis
