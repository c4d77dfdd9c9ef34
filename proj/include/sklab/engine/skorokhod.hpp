#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace sklab::engine {

// One-dimensional Skorokhod map: l_i = max(0, max_{j<=i} -w_j),
// y_i = w_i + l_i. Minimal nondecreasing pushing keeping y >= 0.
struct SkorokhodState {
    double l = 0.0;

    // advance to the next path value; returns the pushing increment
    double push(double w) {
        const double lnew = (-w > l) ? -w : l;
        const double dl = lnew - l;
        l = lnew;
        return dl;
    }
    double reflect(double w) const { return w + l; }
};

inline void skorokhod_map_1d(std::span<const double> w, std::vector<double>& y,
                             std::vector<double>& l) {
    if (!w.empty() && w[0] < 0.0)
        throw std::invalid_argument("skorokhod_map_1d: w[0] must be >= 0");
    y.resize(w.size());
    l.resize(w.size());
    SkorokhodState st;
    for (std::size_t i = 0; i < w.size(); ++i) {
        st.push(w[i]);
        l[i] = st.l;
        y[i] = w[i] + st.l;
    }
}

}  // namespace sklab::engine
