#pragma once

#include <cstdint>
#include <vector>

namespace sklab::field {

// Fourier data of the unit-scale lattice bump sum on its 3x3 period cell.
// The periodization of the radial bump Psi has real coefficients c(|n|)
// at frequencies (2 pi / 3) n, n in Z^2, and its half-space harmonic
// extension is
//   phi_P(u, v, s) = sum_n c(|n|) cos((2pi/3) n.(u,v)) exp(-(2pi/3)|n| s).
// Folding the four quadrants gives the quarter-plane term list stored here
// (weights 1, 2 or 4 times c(r)); terms are sorted by increasing r so a
// height-dependent cutoff can skip factors that underflow exp.
struct ModeTable {
    int modes;              // per-axis truncation K (p, q < K)
    double mu;              // 2 pi / 3
    double cell_mean;       // c(0) = (1/9) integral of Psi
    double dropped_weight;  // sum |w| of discarded small terms
    double boundary_err;    // bound for |phi_P(.,0) - Psi_per|
    std::vector<double> w;
    std::vector<std::int32_t> p, q;
    std::vector<double> negmu_r;  // -mu * r, paired with w
    std::vector<double> r_sorted;

    std::size_t padded_size() const { return w.size(); }
};

// Build for the canonical profile psi(r) = exp(1 - 1/(1 - (4r/3)^2)).
const ModeTable& mode_table(int modes);

// phi_P evaluated with the active kernels. u, v in any range (periodic),
// s >= 0. Terms with mu * r * s > 45 are skipped (relative error < 3e-20).
double eval_phi_p(const ModeTable& t, double u, double v, double s);

// Evaluate for several heights at one (u, v); cos tables are shared.
void eval_phi_p_many(const ModeTable& t, double u, double v, const double* s,
                     double* out, std::size_t n);

}  // namespace sklab::field
