#include "sklab/analysis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sklab::analysis {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = double(i) / double(a.size());
        const double fb = double(j) / double(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(double(n + m) / (double(n) * double(m)));
}

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                       double alpha) {
    KSResult r;
    r.n = a.size();
    r.m = b.size();
    r.statistic = ks_statistic(std::move(a), std::move(b));
    r.critical = ks_critical(r.n, r.m, alpha);
    r.reject = r.statistic > r.critical;
    return r;
}

namespace {

int kendall_s(const std::vector<double>& x, const std::vector<int>& order) {
    int s = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const double d = x[std::size_t(order[j])] - x[std::size_t(order[i])];
            if (d > 0) ++s;
            else if (d < 0) --s;
        }
    return s;
}

}  // namespace

MannKendall mann_kendall(const std::vector<double>& x) {
    const int n = int(x.size());
    if (n < 3 || n > 8)
        throw std::invalid_argument("mann_kendall: supported for 3 <= n <= 8");
    MannKendall mk;
    std::vector<int> order(static_cast<std::size_t>(n), 0);
    std::iota(order.begin(), order.end(), 0);
    mk.s = kendall_s(x, order);
    // exact permutation null on the observed multiset
    long total = 0, le = 0, ge = 0;
    std::sort(order.begin(), order.end());
    do {
        const int s = kendall_s(x, order);
        ++total;
        if (s <= mk.s) ++le;
        if (s >= mk.s) ++ge;
    } while (std::next_permutation(order.begin(), order.end()));
    mk.p_decreasing = double(le) / double(total);
    mk.p_increasing = double(ge) / double(total);
    return mk;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& se) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 points");
    const std::size_t n = x.size();
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w =
            se.empty() ? 1.0 : 1.0 / std::max(se[i] * se[i], 1e-30);
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
        swxx += w * x[i] * x[i];
        swxy += w * x[i] * y[i];
    }
    LineFit f;
    const double den = sw * swxx - swx * swx;
    f.slope = (sw * swxy - swx * swy) / den;
    f.intercept = (swy - f.slope * swx) / sw;
    if (se.empty()) {
        // residual-based slope error
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        const double s2 = n > 2 ? rss / double(n - 2) : 0.0;
        f.slope_se = std::sqrt(s2 * sw / den);
    } else {
        f.slope_se = std::sqrt(sw / den);
    }
    return f;
}

}  // namespace sklab::analysis
