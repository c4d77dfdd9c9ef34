#pragma once

#include <cstddef>
#include <vector>

namespace sklab::field {

// Dense samples of the universal extension phi_P(u, v, s) on one period
// cell, used by the simulation hot path. Every dyadic scale reads the same
// table through the self-similar reduction
//   phi_k(x) = 2^{-k gamma} phi_P(2^k x mod 3, 2^k x_3).
// u, v are periodic (padded rows, no wraparound in the inner loop) and the
// height is stored on the graded axis t = sqrt(s / s_max). 4-point Lagrange
// interpolation horizontally, linear on the dense graded t axis; above
// s_max the field equals its cell mean to ~5e-8, which is returned exactly.
class PhiTable {
  public:
    static constexpr int kNu = 128;
    static constexpr int kNv = 128;
    static constexpr int kNt = 48;
    static constexpr double kSMax = 6.0;

    static const PhiTable& instance(int modes);

    double eval(double u, double v, double s) const;
    // two horizontal positions at one shared height
    void eval_pair(double u1, double v1, double u2, double v2, double s,
                   double out[2]) const;
    double cell_mean() const { return cell_mean_; }
    double max_abs_error_bound() const { return err_bound_; }

  private:
    explicit PhiTable(int modes);

    std::size_t stride_v_ = kNu + 3;
    std::size_t stride_t_ = std::size_t(kNu + 3) * (kNv + 3);
    double cell_mean_ = 0.0;
    double err_bound_ = 0.0;
    std::vector<double> data_;
};

}  // namespace sklab::field
