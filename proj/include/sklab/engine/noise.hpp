#pragma once

#include <cstdint>
#include <vector>

namespace sklab::engine {

// Brownian increments from the counter-based generator, keyed by
// (seed, path index, position). Identical (seed, path, dt, d) reproduce the
// same increments bit for bit under any chunking or thread schedule.
class NoiseStream {
  public:
    NoiseStream(std::uint64_t seed, std::uint64_t path, int dim, double dt);

    int dim() const { return dim_; }
    double dt() const { return dt_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t path() const { return path_; }

    // increments for steps [step, step + n), laid out step-major:
    // out[i * dim + c] = sqrt(dt) * z where z is the (step + i, c) normal
    void fill_increments(std::uint64_t step, std::size_t n, double* out) const;

    // raw standard normals by absolute index
    void fill_normals(std::uint64_t first, std::size_t n, double* out) const;

  private:
    std::uint64_t seed_;
    std::uint64_t path_;
    int dim_;
    double dt_;
    double sqrt_dt_;
};

// FNV-1a over the raw bytes; used for increment checksums in run records.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull);

}  // namespace sklab::engine
