#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sklab::field {

class PhiTable;
struct ModeTable;

// Radial profile of the boundary bumps: smooth, psi(0) = 1, nonincreasing,
// zero beyond r = 3/4.
struct BumpProfile {
    static constexpr double radius = 0.75;
    double operator()(double r) const;
};

struct GradientCertRow {
    double x3;
    double max_normalized;  // max |d sigma_11 / d x_k| * x3^{1-gamma}
    std::array<double, 3> argmax;
};

struct GradientCertificate {
    std::vector<GradientCertRow> rows;
    double overall_max = 0.0;
    std::array<double, 3> argmax{};
};

// The diagonal diffusion matrix built from lacunary harmonic bump sums:
//   sigma = diag(1 + phi, 1 + phi, 1),  phi = sum_m phi_{m n1},
// with phi_k the half-space harmonic extension of the dyadic lattice bump
// layer Psi_k. Evaluation is pure after construction.
class CounterexampleField {
  public:
    struct Config {
        double gamma = 0.3;
        int n1 = 4;
        int m_max = 6;      // m_max < 0 gives phi == 0
        int fourier_modes = 32;
    };

    explicit CounterexampleField(Config cfg);

    const Config& config() const { return cfg_; }
    double gamma() const { return cfg_.gamma; }

    // Psi_k^1(x) = 2^{-k gamma} Psi(2^k x)
    double psi_k1(int k, double x, double y) const;
    // lattice sum over shifts 3 2^{-k} Z^2 (supports are disjoint, so the
    // nearest lattice point carries the only nonzero summand)
    double psi_k(int k, double x, double y) const;

    // harmonic extension of Psi_k; requires z >= 0
    double phi_k(int k, double x, double y, double z) const;
    // truncated sum over scales m n1, m = 0..m_max; requires z >= 0
    double phi_total(double x, double y, double z) const;
    // table-backed evaluation of the same sum (simulation hot path)
    double phi_total_fast(double x, double y, double z) const;
    // two horizontal positions at one shared height (coupled solutions)
    void phi_pair_fast(double x1, double y1, double x2, double y2, double z,
                       double out[2]) const;

    // diag(1 + phi, 1 + phi, 1) with even reflection in z
    std::array<double, 3> sigma_diag(double x, double y, double z) const;
    double sigma11(double x, double y, double z) const;
    double sigma11_fast(double x, double y, double z) const;

    double sup_phi_bound() const { return sup_phi_bound_; }
    double cell_mean() const;
    double fast_path_error_bound() const;

    // max over the level grid of |d sigma_11 / d x_k| x3^{1-gamma} by
    // central differences; levels x3 = 2^{-l}, l = l_min..l_max, nxy
    // samples per horizontal axis over one period cell.
    GradientCertificate certify_gradient_bound(int l_min, int l_max,
                                               int nxy) const;

    nlohmann::json to_json() const;
    static CounterexampleField from_json(const nlohmann::json& j);

  private:
    Config cfg_;
    const ModeTable* modes_;
    const PhiTable* table_;
    std::vector<int> scale_k_;
    std::vector<double> scale_amp_;
    std::vector<double> suffix_mean_;  // cell_mean * sum_{m' >= m} amp
    double sup_phi_bound_ = 0.0;
};

}  // namespace sklab::field
