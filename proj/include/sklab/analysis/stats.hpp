#pragma once

#include <cstdint>
#include <vector>

namespace sklab::analysis {

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| (inputs need not
// be sorted) and the asymptotic critical value at level alpha.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_critical(std::size_t n, std::size_t m, double alpha);

struct KSResult {
    double statistic = 0.0;
    double critical = 0.0;
    std::size_t n = 0, m = 0;
    bool reject = false;
};

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                       double alpha);

// Mann-Kendall trend test with an exact permutation null (n <= 8).
// p_decreasing = P(S_perm <= S_obs), one-sided.
struct MannKendall {
    int s = 0;
    double p_decreasing = 1.0;
    double p_increasing = 1.0;
};

MannKendall mann_kendall(const std::vector<double>& x);

// least squares y = a + b x with optional per-point standard errors; the
// slope standard error uses the se-weighted normal equations
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& se = {});

}  // namespace sklab::analysis
