#pragma once

#include <vector>

namespace sklab::mapping {

// The dyadic Green-function bound: sum_{k>=1} 2^{-k} sum_{j>=1} 2^{-j(2 gamma - 1)}.
// Converges exactly when gamma > 1/2, to 1/(2^{2 gamma - 1} - 1); at or
// below 1/2 the inner series diverges and partial sums are reported.
struct GreenSum {
    bool convergent = false;
    double value = 0.0;        // the double sum when convergent
    double closed_form = 0.0;  // 1/(2^{2 gamma - 1} - 1) when convergent
    std::vector<double> partial;  // inner-series partial sums (diagnostics)
};

GreenSum green_sum(double gamma);

}  // namespace sklab::mapping
