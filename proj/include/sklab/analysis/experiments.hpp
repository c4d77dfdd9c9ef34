#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "sklab/analysis/stats.hpp"
#include "sklab/engine/halfspace.hpp"

namespace sklab::analysis {

// G(x) = |x_d|^{gamma - 1}
struct WeightFunction {
    double gamma = 0.5;
    double operator()(double xd) const {
        return std::pow(std::abs(xd), gamma - 1.0);
    }
};

// 2-D Bessel two-sided exit probability: P(reach b before a | start r0).
double bessel_exit_prob(double a, double b, double r0);

struct ExitRow {
    double gamma = 0.0;
    int j = 0;
    std::uint64_t trials = 0;
    std::uint64_t hit_inner = 0;
    std::uint64_t hit_outer = 0;
    std::uint64_t excluded = 0;  // horizon-exhausted
    double p_outer = 0.0;
    double std_error = 0.0;
    double oracle = 0.0;
};

// Tally annulus-stopped coupling runs against the Bessel oracle.
ExitRow exit_table(const std::vector<engine::CouplingRun>& runs, double gamma,
                   int j, double a0, double a1);

struct TimeChangeResult {
    KSResult ks;
    std::size_t stopped = 0;
    std::size_t excluded = 0;
    bool enough = false;
};

// KS comparison of |Y_tau2 - Y'_tau2| / d0 from clock-stopped runs against
// the oracle |a + Wbar(b)| sampled from fresh 2-D Gaussians.
TimeChangeResult time_change_test(const std::vector<engine::CouplingRun>& runs,
                                  double b, double alpha,
                                  std::size_t min_stopped,
                                  std::uint64_t oracle_seed,
                                  std::size_t oracle_n = 0);

struct LocalTimeScaling {
    LineFit fit;         // ln E[L] against k
    double predicted_slope = 0.0;  // -(1 - 2 gamma) ln 2
    std::vector<int> ks;
    std::vector<double> mean_l, se_l;
};

// Regression of ln E[L at stop] on the separation exponent k; needs >= 3
// dyadic levels.
LocalTimeScaling local_time_scaling(
    const std::vector<int>& k_levels,
    const std::vector<std::vector<double>>& l_samples, double gamma);

struct LipschitzCheck {
    double max_ratio = 0.0;
    std::array<double, 3> arg_x{}, arg_y{};
};

// max over sampled pairs of |sigma11(x) - sigma11(y)| / (|x-y| (G(x)+G(y))),
// pairs avoiding x3 = 0; includes pairs straddling the even reflection.
LipschitzCheck check_weighted_lipschitz(const field::CounterexampleField& f,
                                        int n_pairs, std::uint64_t seed);

struct IntegrabilityResult {
    double estimate = 0.0;   // MC estimate of E int_0^T G(Y3)^2 ds
    double std_error = 0.0;
    std::uint64_t clamped_steps = 0;  // x3 below the 1e-12 clamp
};

// Riemann estimate of E int_0^T |Y3|^{2(gamma-1)} ds over reflected BM paths.
IntegrabilityResult integrability_check(double gamma, double dt, double horizon,
                                        int paths, std::uint64_t seed);

struct DivergenceCell {
    double gamma = 0.0;
    int j = 0;
    std::uint64_t paths = 0;
    std::uint64_t reached = 0;
    double p = 0.0;
    double std_error = 0.0;
};

struct DivergenceMatrix {
    std::vector<DivergenceCell> cells;
    // per-gamma Mann-Kendall of p against j
    std::vector<double> gammas;
    std::vector<MannKendall> trend;

    const DivergenceCell* cell(double gamma, int j) const;
};

// P(sup_{[0, t0]} |Y - Y'| >= delta) per (gamma, j): paths run with shared
// noise from separation 2^{-j} until the distance threshold or t0.
// progress, when set, is called after each cell.
struct DivergenceConfig {
    std::vector<double> gammas;
    std::vector<int> js;
    double t0 = 0.1;
    double delta = 0.125;
    std::uint64_t paths = 1000;
    std::uint64_t seed = 1;
    int n1 = 1;
    int m_max = 12;
    int fourier_modes = 32;
    double dt_safety = 1.0;  // dt = dt_safety * 4^{-j-4}
    std::function<void(const DivergenceCell&)> progress;
};

DivergenceMatrix divergence_experiment(const DivergenceConfig& cfg);

}  // namespace sklab::analysis
