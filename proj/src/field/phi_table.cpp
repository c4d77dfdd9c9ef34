#include "sklab/field/phi_table.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "sklab/field/mode_table.hpp"
#include "sklab/kernels/kernels.hpp"

namespace sklab::field {

namespace {

inline double wrap3(double x) {
    double u = std::fmod(x, 3.0);
    if (u < 0.0) u += 3.0;
    return u;
}

// 4-point Lagrange weights at position xi in [0, 3] relative to nodes 0..3
inline void lagrange4(double xi, double w[4]) {
    const double a = xi, b = xi - 1.0, c = xi - 2.0, d = xi - 3.0;
    w[0] = -(b * c * d) / 6.0;
    w[1] = (a * c * d) / 2.0;
    w[2] = -(a * b * d) / 2.0;
    w[3] = (a * b * c) / 6.0;
}

}  // namespace

PhiTable::PhiTable(int modes) {
    const ModeTable& mt = mode_table(modes);
    cell_mean_ = mt.cell_mean;
    data_.assign(stride_t_ * kNt, 0.0);

    std::vector<double> s(kNt);
    for (int it = 0; it < kNt; ++it) {
        const double t = double(it) / (kNt - 1);
        s[std::size_t(it)] = kSMax * t * t;
    }
    std::vector<double> col(kNt);
    for (int iv = 0; iv < kNv; ++iv) {
        const double v = 3.0 * iv / kNv;
        for (int iu = 0; iu < kNu; ++iu) {
            const double u = 3.0 * iu / kNu;
            eval_phi_p_many(mt, u, v, s.data(), col.data(), std::size_t(kNt));
            for (int it = 0; it < kNt; ++it)
                data_[std::size_t(it) * stride_t_ +
                      std::size_t(iv + 1) * stride_v_ + std::size_t(iu + 1)] =
                    col[std::size_t(it)];
        }
    }
    // periodic pad: storage row index j holds node j - 1
    for (int it = 0; it < kNt; ++it) {
        double* slab = data_.data() + std::size_t(it) * stride_t_;
        for (int jv = 0; jv < kNv + 3; ++jv) {
            double* row = slab + std::size_t(jv) * stride_v_;
            row[0] = row[kNu];          // node -1 = node nu-1
            row[kNu + 1] = row[1];      // node nu = node 0
            row[kNu + 2] = row[2];      // node nu+1 = node 1
        }
        double* r0 = slab;
        __builtin_memcpy(r0, slab + std::size_t(kNv) * stride_v_,
                         stride_v_ * sizeof(double));
        __builtin_memcpy(slab + std::size_t(kNv + 1) * stride_v_,
                         slab + 1 * stride_v_, stride_v_ * sizeof(double));
        __builtin_memcpy(slab + std::size_t(kNv + 2) * stride_v_,
                         slab + 2 * stride_v_, stride_v_ * sizeof(double));
    }
    // interpolation error bound measured against the mode sum off-grid
    double worst = 0.0;
    for (int i = 0; i < 4000; ++i) {
        const double u = wrap3(0.0131 + 2.9731 * i / 4000.0 * 17.0);
        const double v = wrap3(1.7 + 2.633 * i / 4000.0 * 23.0);
        const double t = (i % 97) / 96.0;
        const double sq = kSMax * t * t;
        const double exact = eval_phi_p(mt, u, v, sq);
        worst = std::max(worst, std::abs(eval(u, v, sq) - exact));
    }
    err_bound_ = 2.0 * worst + 1e-12;
}

double PhiTable::eval(double u, double v, double s) const {
    double out[2];
    eval_pair(u, v, u, v, s, out);
    return out[0];
}

void PhiTable::eval_pair(double u1, double v1, double u2, double v2, double s,
                         double out[2]) const {
    if (s >= kSMax) {
        out[0] = out[1] = cell_mean_;
        return;
    }
    const double ft = std::sqrt(s / kSMax) * (kNt - 1);
    int it = int(ft);
    if (it > kNt - 2) it = kNt - 2;
    double wt[2];
    wt[1] = ft - it;
    wt[0] = 1.0 - wt[1];

    const auto& kern_tab = kern::active();
    const double* slab = data_.data() + std::size_t(it) * stride_t_;
    for (int side = 0; side < 2; ++side) {
        const double fu = wrap3(side ? u2 : u1) * (kNu / 3.0);
        const double fv = wrap3(side ? v2 : v1) * (kNv / 3.0);
        int iu = int(fu);
        int iv = int(fv);
        if (iu >= kNu) iu = kNu - 1;  // wrap3 can return exactly 3.0
        if (iv >= kNv) iv = kNv - 1;
        double wu[4], wv[4];
        lagrange4(fu - iu + 1.0, wu);
        lagrange4(fv - iv + 1.0, wv);
        // storage offset: node n lives at index n + 1; stencil starts at n-1
        const double* base = slab + std::size_t(iv) * stride_v_ +
                             std::size_t(iu);
        out[side] = kern_tab.interp_t2(base, stride_v_, stride_t_, wu, wv, wt);
    }
}

const PhiTable& PhiTable::instance(int modes) {
    static std::map<int, std::unique_ptr<PhiTable>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(modes);
    if (it == cache.end())
        it = cache.emplace(modes, std::unique_ptr<PhiTable>(new PhiTable(modes)))
                 .first;
    return *it->second;
}

}  // namespace sklab::field
