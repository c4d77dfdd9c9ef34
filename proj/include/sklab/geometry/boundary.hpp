#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sklab/common/vec.hpp"

namespace sklab::geom {

// Smooth compactly supported profile exp(1 - 1/(1 - r^2)) on |r| < 1.
double bump_profile(double r);
double bump_profile_d1(double r);
double bump_profile_d2(double r);

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smoothstep(double t);
double smoothstep_d1(double t);

// A boundary graph Phi: R^{d-1} -> R together with its Hoelder data. The
// seminorm_bound field is a certified upper bound for
// sup |grad Phi(x) - grad Phi(y)| / |x - y|^gamma, assembled analytically
// per kind (see the factory functions).
class BoundaryFunction {
  public:
    enum class Kind { flat, radial_bump, lacunary, scaled_cutoff };

    static BoundaryFunction flat(int dim, double gamma);
    static BoundaryFunction radial_bump(int dim, double gamma,
                                        double amplitude, double radius,
                                        const Vec& center);
    // Phi(x) = sum_{k=0}^{depth} A 2^{-k(1+gamma)} cos(b 2^k e.x + theta_k);
    // the gradient is exactly gamma-Hoelder with seminorm <= A b^{1+gamma} C(gamma).
    static BoundaryFunction lacunary(int dim, double gamma, double amplitude,
                                     int depth, std::uint64_t phase_seed,
                                     double base_freq = 1.0);
    // The dilated cutoff graph of the flattening-map construction:
    //   Phi_eps(x) = eta(|x|) (Phi(8 eps x) - Phi(0) - grad Phi(0).(8 eps x)) / (8 eps)
    // with eta == 1 on |x| <= 1/8 and eta == 0 on |x| >= 3/8.
    static BoundaryFunction scaled_cutoff(const BoundaryFunction& base,
                                          double epsilon);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    double gamma() const { return gamma_; }
    double seminorm_bound() const { return seminorm_bound_; }
    double sup_bound() const { return sup_bound_; }
    double grad_bound() const { return grad_bound_; }

    double eval(const double* xhat) const;
    void gradient(const double* xhat, double* out) const;

    double eval(const Vec& xhat) const { return eval(xhat.v.data()); }
    Vec gradient_vec(const Vec& xhat) const;

    nlohmann::json to_json() const;
    static BoundaryFunction from_json(const nlohmann::json& j);

  private:
    BoundaryFunction() = default;

    Kind kind_ = Kind::flat;
    int dim_ = 2;
    double gamma_ = 1.0;
    double seminorm_bound_ = 0.0;
    double sup_bound_ = 0.0;
    double grad_bound_ = 0.0;
    double hess_bound_ = 0.0;

    // radial bump
    double amplitude_ = 0.0;
    double radius_ = 1.0;
    Vec center_;

    // lacunary
    int depth_ = 0;
    std::uint64_t phase_seed_ = 0;
    double base_freq_ = 1.0;
    std::vector<double> phases_;
    Vec direction_;

    // scaled cutoff
    std::shared_ptr<const BoundaryFunction> base_;
    double epsilon_ = 0.0;
    double base0_ = 0.0;
    Vec base_grad0_;
};

// Max sampled Hoelder quotient of grad Phi over n_pairs random pairs with
// separations log-uniform in [rmin, rmax]. Deterministic given seed.
double holder_certificate(const BoundaryFunction& phi, int n_pairs,
                          std::uint64_t seed, double rmin = 1e-6,
                          double rmax = 4.0);

}  // namespace sklab::geom
