#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace sklab::kern {

// Philox4x32-10 counter layout used everywhere: block B of stream S under
// seed K produces 4 uint32 words. (counter = {lo32(B), hi32(B), lo32(S),
// hi32(S)}, key = {lo32(K), hi32(K)}.)
void philox_fill_scalar(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t block_begin, std::size_t nblocks,
                        std::uint32_t* out);

// Elementwise exp(x[i]). Same range reduction and polynomial in every
// variant so results agree bit for bit across ISAs.
void exp_pd_scalar(const double* x, double* out, std::size_t n);

// One term list of the half-space mode sum:
//   sum_i w[i] * cu[p[i]] * cv[q[i]] * exp(negmu_r[i] * s)
// Terms are processed in index order striped over four accumulators that
// are combined as (a0+a1)+(a2+a3); n must be a multiple of 4 (pad with
// w = 0, p = q = 0, negmu_r = 0).
struct ModeSumView {
    const double* w;
    const std::int32_t* p;
    const std::int32_t* q;
    const double* negmu_r;
    std::size_t n;
};
double mode_sum_scalar(const ModeSumView& view, const double* cu,
                       const double* cv, double s);

// 64-tap tensor-product cubic. base points at the (u0, v0, t0) corner of a
// 4x4x4 node block, u contiguous. Lane a accumulates
//   acc[a] = sum_c wt[c] * sum_b wv[b] * base[c*stride_t + b*stride_v + a]
// and the result is (acc0*wu0 + acc1*wu1) + (acc2*wu2 + acc3*wu3).
double interp3_scalar(const double* base, std::size_t stride_v,
                      std::size_t stride_t, const double wu[4],
                      const double wv[4], const double wt[4]);

// Same lane structure with a two-slab (linear) t stencil.
double interp_t2_scalar(const double* base, std::size_t stride_v,
                        std::size_t stride_t, const double wu[4],
                        const double wv[4], const double wt[2]);

#if defined(__x86_64__) || defined(_M_X64)
void philox_fill_avx2(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t block_begin, std::size_t nblocks,
                      std::uint32_t* out);
void exp_pd_avx2(const double* x, double* out, std::size_t n);
double mode_sum_avx2(const ModeSumView& view, const double* cu,
                     const double* cv, double s);
double interp3_avx2(const double* base, std::size_t stride_v,
                    std::size_t stride_t, const double wu[4],
                    const double wv[4], const double wt[4]);
double interp_t2_avx2(const double* base, std::size_t stride_v,
                      std::size_t stride_t, const double wu[4],
                      const double wv[4], const double wt[2]);
#endif

struct KernelTable {
    std::string_view name;
    void (*philox_fill)(std::uint64_t, std::uint64_t, std::uint64_t,
                        std::size_t, std::uint32_t*);
    void (*exp_pd)(const double*, double*, std::size_t);
    double (*mode_sum)(const ModeSumView&, const double*, const double*,
                       double);
    double (*interp3)(const double*, std::size_t, std::size_t,
                      const double[4], const double[4], const double[4]);
    double (*interp_t2)(const double*, std::size_t, std::size_t,
                        const double[4], const double[4], const double[2]);
};

const KernelTable& scalar_kernels();
bool avx2_available();
const KernelTable* avx2_kernels();  // nullptr when unsupported

// Selected once per process: AVX2 when the CPU has it, overridable with
// SKLAB_KERNEL=scalar|avx2|auto.
const KernelTable& active();

}  // namespace sklab::kern
