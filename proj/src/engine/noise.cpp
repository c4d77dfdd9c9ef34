#include "sklab/engine/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "sklab/kernels/kernels.hpp"

namespace sklab::engine {

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t path, int dim,
                         double dt)
    : seed_(seed), path_(path), dim_(dim), dt_(dt), sqrt_dt_(std::sqrt(dt)) {
    if (dim < 1 || dim > 8) throw std::invalid_argument("noise dim out of range");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

void NoiseStream::fill_normals(std::uint64_t first, std::size_t n,
                               double* out) const {
    // Each Philox block yields two normals via Box-Muller; normal index m
    // lives in block m / 2.
    const std::uint64_t blk0 = first / 2;
    const std::uint64_t blk1 = (first + n + 1) / 2;
    const std::size_t nblk = std::size_t(blk1 - blk0);
    std::vector<std::uint32_t> words(4 * nblk);
    kern::active().philox_fill(seed_, path_, blk0, nblk, words.data());

    constexpr double kTwoPi = 6.283185307179586476925;
    std::size_t o = 0;
    for (std::size_t b = 0; b < nblk; ++b) {
        const std::uint64_t ua =
            (std::uint64_t(words[4 * b + 1]) << 32) | words[4 * b + 0];
        const std::uint64_t ub =
            (std::uint64_t(words[4 * b + 3]) << 32) | words[4 * b + 2];
        const double u1 = double(ua >> 11) * 0x1.0p-53 + 0x1.0p-54;
        const double u2 = double(ub >> 11) * 0x1.0p-53 + 0x1.0p-54;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double z0 = r * std::cos(kTwoPi * u2);
        const double z1 = r * std::sin(kTwoPi * u2);
        const std::uint64_t m0 = 2 * (blk0 + b);
        if (m0 >= first && o < n) out[o++] = z0;
        if (m0 + 1 >= first && o < n) out[o++] = z1;
    }
}

void NoiseStream::fill_increments(std::uint64_t step, std::size_t n,
                                  double* out) const {
    fill_normals(step * std::uint64_t(dim_), n * std::size_t(dim_), out);
    for (std::size_t i = 0; i < n * std::size_t(dim_); ++i) out[i] *= sqrt_dt_;
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace sklab::engine
