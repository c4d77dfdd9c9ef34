#include "sklab/mapping/green_sum.hpp"

#include <cmath>
#include <stdexcept>

namespace sklab::mapping {

GreenSum green_sum(double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("gamma must be in (0, 1]");
    GreenSum g;
    const double q = std::pow(2.0, -(2.0 * gamma - 1.0));

    // inner partial sums, reported in both regimes
    double inner = 0.0;
    for (int j = 1; j <= 64; ++j) {
        inner += std::pow(q, j);
        g.partial.push_back(inner);
    }

    if (gamma <= 0.5) {
        g.convergent = false;
        return g;
    }
    g.convergent = true;
    g.closed_form = 1.0 / (std::pow(2.0, 2.0 * gamma - 1.0) - 1.0);

    // full double sum, both indices run until the increments vanish
    double total = 0.0;
    for (int k = 1; k <= 80; ++k) {
        const double outer = std::pow(2.0, double(-k));
        double inner_full = 0.0;
        double term = q;
        int j = 1;
        while (term > 1e-18 * (1.0 - q) && j < 4000) {
            inner_full += term;
            term *= q;
            ++j;
        }
        total += outer * inner_full;
        if (outer * inner_full < 1e-18 * total) break;
    }
    g.value = total;
    return g;
}

}  // namespace sklab::mapping
