#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "sklab/kernels/exp_core.hpp"
#include "sklab/kernels/kernels.hpp"

namespace sklab::kern {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// mulhi/mullo of unsigned 32-bit lanes
inline __m256i mullo32(__m256i a, __m256i b) { return _mm256_mullo_epi32(a, b); }

inline __m256i mulhi32(__m256i a, __m256i b) {
    const __m256i himask = _mm256_set1_epi64x(0xFFFFFFFF00000000ll);
    __m256i pe = _mm256_mul_epu32(a, b);
    __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), b);
    return _mm256_blend_epi32(_mm256_srli_epi64(pe, 32),
                              _mm256_and_si256(po, himask), 0xAA);
}

inline __m256d exp4(__m256d x) {
    using namespace expc;
    const __m256d vlog2e = _mm256_set1_pd(kLog2E);
    const __m256d vunder = _mm256_set1_pd(kUnderflow);
    const __m256d vover = _mm256_set1_pd(kOverflow);

    const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    const __m256d under_mask = _mm256_cmp_pd(x, vunder, _CMP_LT_OQ);
    const __m256d over_mask = _mm256_cmp_pd(x, vover, _CMP_GT_OQ);

    __m256d xc = _mm256_max_pd(x, vunder);
    xc = _mm256_min_pd(xc, vover);

    const __m256d kd = _mm256_round_pd(
        _mm256_mul_pd(xc, vlog2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m128i k = _mm256_cvtpd_epi32(kd);

    __m256d r = _mm256_fmadd_pd(kd, _mm256_set1_pd(-kLn2Hi), xc);
    r = _mm256_fmadd_pd(kd, _mm256_set1_pd(-kLn2Lo), r);

    __m256d p = _mm256_set1_pd(kP[0]);
    for (int i = 1; i < 11; ++i)
        p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kP[i]));
    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d e = _mm256_fmadd_pd(rr, p, r);
    e = _mm256_add_pd(e, _mm256_set1_pd(1.0));

    const __m128i k1 = _mm_srai_epi32(k, 1);
    const __m128i k2 = _mm_sub_epi32(k, k1);
    const __m128i bias = _mm_set1_epi32(1023);
    const __m256i e1 =
        _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm_add_epi32(k1, bias)), 52);
    const __m256i e2 =
        _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm_add_epi32(k2, bias)), 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(e1));
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(e2));

    e = _mm256_blendv_pd(e, _mm256_setzero_pd(), under_mask);
    e = _mm256_blendv_pd(e, _mm256_set1_pd(HUGE_VAL), over_mask);
    e = _mm256_blendv_pd(e, x, nan_mask);
    return e;
}

}  // namespace

void philox_fill_avx2(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t block_begin, std::size_t nblocks,
                      std::uint32_t* out) {
    const __m256i m0 = _mm256_set1_epi32(int(kPhiloxM0));
    const __m256i m1 = _mm256_set1_epi32(int(kPhiloxM1));
    const __m256i w0 = _mm256_set1_epi32(int(kPhiloxW0));
    const __m256i w1 = _mm256_set1_epi32(int(kPhiloxW1));
    const __m256i s2 = _mm256_set1_epi32(int(std::uint32_t(stream)));
    const __m256i s3 = _mm256_set1_epi32(int(std::uint32_t(stream >> 32)));

    std::size_t b = 0;
    alignas(32) std::uint32_t lo[8], hi[8];
    for (; b + 8 <= nblocks; b += 8) {
        for (int i = 0; i < 8; ++i) {
            const std::uint64_t blk = block_begin + b + i;
            lo[i] = std::uint32_t(blk);
            hi[i] = std::uint32_t(blk >> 32);
        }
        __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo));
        __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi));
        __m256i c2 = s2;
        __m256i c3 = s3;
        __m256i k0 = _mm256_set1_epi32(int(std::uint32_t(seed)));
        __m256i k1 = _mm256_set1_epi32(int(std::uint32_t(seed >> 32)));
        for (int r = 0; r < 10; ++r) {
            const __m256i hi0 = mulhi32(c0, m0);
            const __m256i lo0 = mullo32(c0, m0);
            const __m256i hi1 = mulhi32(c2, m1);
            const __m256i lo1 = mullo32(c2, m1);
            c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
            c1 = lo1;
            c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
            c3 = lo0;
            k0 = _mm256_add_epi32(k0, w0);
            k1 = _mm256_add_epi32(k1, w1);
        }
        // SoA -> per-block AoS
        const __m256i t0 = _mm256_unpacklo_epi32(c0, c1);
        const __m256i t1 = _mm256_unpackhi_epi32(c0, c1);
        const __m256i t2 = _mm256_unpacklo_epi32(c2, c3);
        const __m256i t3 = _mm256_unpackhi_epi32(c2, c3);
        const __m256i u0 = _mm256_unpacklo_epi64(t0, t2);
        const __m256i u1 = _mm256_unpackhi_epi64(t0, t2);
        const __m256i u2 = _mm256_unpacklo_epi64(t1, t3);
        const __m256i u3 = _mm256_unpackhi_epi64(t1, t3);
        __m256i* o = reinterpret_cast<__m256i*>(out + 4 * b);
        _mm256_storeu_si256(o + 0, _mm256_permute2x128_si256(u0, u1, 0x20));
        _mm256_storeu_si256(o + 1, _mm256_permute2x128_si256(u2, u3, 0x20));
        _mm256_storeu_si256(o + 2, _mm256_permute2x128_si256(u0, u1, 0x31));
        _mm256_storeu_si256(o + 3, _mm256_permute2x128_si256(u2, u3, 0x31));
    }
    if (b < nblocks)
        philox_fill_scalar(seed, stream, block_begin + b, nblocks - b,
                           out + 4 * b);
}

void exp_pd_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(x + i)));
    if (i < n) exp_pd_scalar(x + i, out + i, n - i);
}

double mode_sum_avx2(const ModeSumView& view, const double* cu,
                     const double* cv, double s) {
    const __m256d vs = _mm256_set1_pd(s);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < view.n; i += 4) {
        const __m256d e =
            exp4(_mm256_mul_pd(_mm256_loadu_pd(view.negmu_r + i), vs));
        const __m128i pi = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(view.p + i));
        const __m128i qi = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(view.q + i));
        const __m256d cup = _mm256_i32gather_pd(cu, pi, 8);
        const __m256d cvq = _mm256_i32gather_pd(cv, qi, 8);
        const __m256d t1 = _mm256_mul_pd(_mm256_loadu_pd(view.w + i), cup);
        const __m256d t2 = _mm256_mul_pd(cvq, e);
        acc = _mm256_fmadd_pd(t1, t2, acc);
    }
    alignas(32) double a[4];
    _mm256_store_pd(a, acc);
    return (a[0] + a[1]) + (a[2] + a[3]);
}

double interp3_avx2(const double* base, std::size_t stride_v,
                    std::size_t stride_t, const double wu[4],
                    const double wv[4], const double wt[4]) {
    __m256d acc = _mm256_setzero_pd();
    for (int c = 0; c < 4; ++c) {
        const double* pc = base + std::size_t(c) * stride_t;
        __m256d row = _mm256_setzero_pd();
        for (int b = 0; b < 4; ++b) {
            row = _mm256_fmadd_pd(_mm256_set1_pd(wv[b]),
                                  _mm256_loadu_pd(pc + std::size_t(b) * stride_v),
                                  row);
        }
        acc = _mm256_fmadd_pd(_mm256_set1_pd(wt[c]), row, acc);
    }
    const __m256d m = _mm256_mul_pd(acc, _mm256_loadu_pd(wu));
    alignas(32) double a[4];
    _mm256_store_pd(a, m);
    return (a[0] + a[1]) + (a[2] + a[3]);
}

double interp_t2_avx2(const double* base, std::size_t stride_v,
                      std::size_t stride_t, const double wu[4],
                      const double wv[4], const double wt[2]) {
    __m256d acc = _mm256_setzero_pd();
    for (int c = 0; c < 2; ++c) {
        const double* pc = base + std::size_t(c) * stride_t;
        __m256d row = _mm256_setzero_pd();
        for (int b = 0; b < 4; ++b) {
            row = _mm256_fmadd_pd(_mm256_set1_pd(wv[b]),
                                  _mm256_loadu_pd(pc + std::size_t(b) * stride_v),
                                  row);
        }
        acc = _mm256_fmadd_pd(_mm256_set1_pd(wt[c]), row, acc);
    }
    const __m256d m = _mm256_mul_pd(acc, _mm256_loadu_pd(wu));
    alignas(32) double a[4];
    _mm256_store_pd(a, m);
    return (a[0] + a[1]) + (a[2] + a[3]);
}

}  // namespace sklab::kern

#endif  // x86_64
