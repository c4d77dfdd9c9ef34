#include "sklab/kernels/kernels.hpp"

#include <cmath>

#include "sklab/kernels/exp_core.hpp"

namespace sklab::kern {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], std::uint32_t k0,
                         std::uint32_t k1) {
    const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * c[0];
    const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * c[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32);
    const std::uint32_t lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32);
    const std::uint32_t lo1 = std::uint32_t(p1);
    c[0] = hi1 ^ c[1] ^ k0;
    c[1] = lo1;
    c[2] = hi0 ^ c[3] ^ k1;
    c[3] = lo0;
}

inline double two_pow(int n) {
    // n in [-1022, 1023]
    std::uint64_t bits = std::uint64_t(n + 1023) << 52;
    double r;
    __builtin_memcpy(&r, &bits, sizeof r);
    return r;
}

inline double exp_one(double x) {
    using namespace expc;
    if (x != x) return x;
    const bool under = x < kUnderflow;
    const bool over = x > kOverflow;
    double xc = x;
    if (xc < kUnderflow) xc = kUnderflow;
    if (xc > kOverflow) xc = kOverflow;
    const double kd = std::nearbyint(xc * kLog2E);
    const int k = int(kd);
    double r = std::fma(kd, -kLn2Hi, xc);
    r = std::fma(kd, -kLn2Lo, r);
    double p = kP[0];
    for (int i = 1; i < 11; ++i) p = std::fma(p, r, kP[i]);
    // exp(r) = 1 + r + r^2 * p
    double e = std::fma(r * r, p, r) + 1.0;
    const int k1 = k >> 1;
    const int k2 = k - k1;
    e = (e * two_pow(k1)) * two_pow(k2);
    if (under) e = 0.0;
    if (over) e = HUGE_VAL;
    return e;
}

}  // namespace

void philox_fill_scalar(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t block_begin, std::size_t nblocks,
                        std::uint32_t* out) {
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::uint64_t blk = block_begin + b;
        std::uint32_t c[4] = {std::uint32_t(blk), std::uint32_t(blk >> 32),
                              std::uint32_t(stream),
                              std::uint32_t(stream >> 32)};
        std::uint32_t k0 = std::uint32_t(seed);
        std::uint32_t k1 = std::uint32_t(seed >> 32);
        for (int r = 0; r < 10; ++r) {
            philox_round(c, k0, k1);
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        out[4 * b + 0] = c[0];
        out[4 * b + 1] = c[1];
        out[4 * b + 2] = c[2];
        out[4 * b + 3] = c[3];
    }
}

void exp_pd_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = exp_one(x[i]);
}

double mode_sum_scalar(const ModeSumView& view, const double* cu,
                       const double* cv, double s) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    double e[4];
    for (std::size_t i = 0; i < view.n; i += 4) {
        for (int l = 0; l < 4; ++l) e[l] = exp_one(view.negmu_r[i + l] * s);
        for (int l = 0; l < 4; ++l) {
            const double t1 = view.w[i + l] * cu[view.p[i + l]];
            const double t2 = cv[view.q[i + l]] * e[l];
            acc[l] = std::fma(t1, t2, acc[l]);
        }
    }
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double interp3_scalar(const double* base, std::size_t stride_v,
                      std::size_t stride_t, const double wu[4],
                      const double wv[4], const double wt[4]) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (int c = 0; c < 4; ++c) {
        double row[4] = {0.0, 0.0, 0.0, 0.0};
        const double* pc = base + std::size_t(c) * stride_t;
        for (int b = 0; b < 4; ++b) {
            const double* pb = pc + std::size_t(b) * stride_v;
            for (int a = 0; a < 4; ++a) row[a] = std::fma(wv[b], pb[a], row[a]);
        }
        for (int a = 0; a < 4; ++a) acc[a] = std::fma(wt[c], row[a], acc[a]);
    }
    const double m0 = acc[0] * wu[0];
    const double m1 = acc[1] * wu[1];
    const double m2 = acc[2] * wu[2];
    const double m3 = acc[3] * wu[3];
    return (m0 + m1) + (m2 + m3);
}

double interp_t2_scalar(const double* base, std::size_t stride_v,
                        std::size_t stride_t, const double wu[4],
                        const double wv[4], const double wt[2]) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
        double row[4] = {0.0, 0.0, 0.0, 0.0};
        const double* pc = base + std::size_t(c) * stride_t;
        for (int b = 0; b < 4; ++b) {
            const double* pb = pc + std::size_t(b) * stride_v;
            for (int a = 0; a < 4; ++a) row[a] = std::fma(wv[b], pb[a], row[a]);
        }
        for (int a = 0; a < 4; ++a) acc[a] = std::fma(wt[c], row[a], acc[a]);
    }
    const double m0 = acc[0] * wu[0];
    const double m1 = acc[1] * wu[1];
    const double m2 = acc[2] * wu[2];
    const double m3 = acc[3] * wu[3];
    return (m0 + m1) + (m2 + m3);
}

const KernelTable& scalar_kernels() {
    static const KernelTable table = {
        "scalar", &philox_fill_scalar, &exp_pd_scalar, &mode_sum_scalar,
        &interp3_scalar, &interp_t2_scalar,
    };
    return table;
}

}  // namespace sklab::kern
