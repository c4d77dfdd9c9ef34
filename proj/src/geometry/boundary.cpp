#include "sklab/geometry/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sklab/common/rng_util.hpp"

namespace sklab::geom {

double bump_profile(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

double bump_profile_d1(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double den = 1.0 - r2;
    return bump_profile(r) * (-2.0 * r) / (den * den);
}

double bump_profile_d2(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double den = 1.0 - r2;
    const double a = 2.0 * r / (den * den);
    return bump_profile(r) * (a * a - 2.0 * (1.0 + 3.0 * r2) / (den * den * den));
}

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double smoothstep_d1(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    const double s = a + b;
    const double u = 1.0 - t;
    return a * b * (1.0 / (t * t) + 1.0 / (u * u)) / (s * s);
}

namespace {

// cutoff eta(s): 1 on s <= 1/8, 0 on s >= 3/8
double eta(double s) { return smoothstep((0.375 - s) / 0.25); }
double eta_d1(double s) { return -4.0 * smoothstep_d1((0.375 - s) / 0.25); }

struct ProfileBounds {
    double max_d1;       // sup |beta'|
    double max_d2;       // sup |beta''|
    double max_d1_over_r;  // sup |beta'(r)/r|
};

const ProfileBounds& profile_bounds() {
    static const ProfileBounds b = [] {
        ProfileBounds r{0.0, 0.0, 0.0};
        const int n = 200000;
        for (int i = 1; i < n; ++i) {
            const double x = double(i) / n;
            r.max_d1 = std::max(r.max_d1, std::abs(bump_profile_d1(x)));
            r.max_d2 = std::max(r.max_d2, std::abs(bump_profile_d2(x)));
            r.max_d1_over_r =
                std::max(r.max_d1_over_r, std::abs(bump_profile_d1(x) / x));
        }
        // scan slack
        r.max_d1 *= 1.001;
        r.max_d2 *= 1.001;
        r.max_d1_over_r *= 1.001;
        return r;
    }();
    return b;
}

double eta_d2_bound() {
    static const double b = [] {
        double m = 0.0;
        const int n = 200000;
        for (int i = 1; i < n; ++i) {
            const double s = 0.125 + 0.25 * double(i) / n;
            const double h = 1e-5;
            m = std::max(m, std::abs(eta_d1(s + h) - eta_d1(s - h)) / (2 * h));
        }
        return 1.01 * m;
    }();
    return b;
}

// gamma-seminorm of a function with Lipschitz gradient: interpolate between
// the Lipschitz bound L (small separations) and 2G (large separations).
double interp_seminorm(double gamma, double grad_bound, double hess_bound) {
    if (hess_bound == 0.0) return 0.0;
    return std::pow(hess_bound, gamma) *
           std::pow(2.0 * grad_bound, 1.0 - gamma);
}

// sup over t > 0 of sum_k 2^{-k gamma} min(2^k t, 2) / t^gamma, k = 0..depth.
double lacunary_envelope(double gamma, int depth) {
    double best = 0.0;
    const int steps = 4096;
    for (int i = 0; i <= steps; ++i) {
        // log-spaced t over the scales present in the sum
        const double lo = std::log(0.25 * std::pow(2.0, -depth));
        const double hi = std::log(8.0);
        const double t = std::exp(lo + (hi - lo) * double(i) / steps);
        double s = 0.0;
        for (int k = 0; k <= depth; ++k) {
            const double p = std::pow(2.0, double(k));
            s += std::pow(2.0, -gamma * k) * std::min(p * t, 2.0);
        }
        best = std::max(best, s / std::pow(t, gamma));
    }
    return 1.01 * best;
}

}  // namespace

BoundaryFunction BoundaryFunction::flat(int dim, double gamma) {
    BoundaryFunction f;
    f.kind_ = Kind::flat;
    f.dim_ = dim;
    f.gamma_ = gamma;
    return f;
}

BoundaryFunction BoundaryFunction::radial_bump(int dim, double gamma,
                                               double amplitude, double radius,
                                               const Vec& center) {
    if (radius <= 0.0) throw std::invalid_argument("bump radius must be > 0");
    BoundaryFunction f;
    f.kind_ = Kind::radial_bump;
    f.dim_ = dim;
    f.gamma_ = gamma;
    f.amplitude_ = amplitude;
    f.radius_ = radius;
    f.center_ = center;
    f.center_.d = dim;
    const ProfileBounds& pb = profile_bounds();
    f.sup_bound_ = std::abs(amplitude);
    f.grad_bound_ = std::abs(amplitude) / radius * pb.max_d1;
    f.hess_bound_ = std::abs(amplitude) / (radius * radius) *
                    std::max(pb.max_d2, pb.max_d1_over_r);
    f.seminorm_bound_ = interp_seminorm(gamma, f.grad_bound_, f.hess_bound_);
    return f;
}

BoundaryFunction BoundaryFunction::lacunary(int dim, double gamma,
                                            double amplitude, int depth,
                                            std::uint64_t phase_seed,
                                            double base_freq) {
    if (depth < 0) throw std::invalid_argument("lacunary depth must be >= 0");
    if (base_freq <= 0.0) throw std::invalid_argument("base_freq must be > 0");
    BoundaryFunction f;
    f.kind_ = Kind::lacunary;
    f.dim_ = dim;
    f.gamma_ = gamma;
    f.amplitude_ = amplitude;
    f.depth_ = depth;
    f.phase_seed_ = phase_seed;
    f.base_freq_ = base_freq;
    SplitMix64 rng(phase_seed);
    f.phases_.resize(std::size_t(depth) + 1);
    for (auto& th : f.phases_) th = rng.range(0.0, 6.283185307179586);
    // fixed oblique unit direction so the graph is genuinely (d-1)-dimensional
    f.direction_ = Vec::zero(dim);
    double nrm = 0.0;
    for (int i = 0; i < dim; ++i) {
        f.direction_[i] = 1.0 + 0.5 * i;
        nrm += f.direction_[i] * f.direction_[i];
    }
    nrm = std::sqrt(nrm);
    for (int i = 0; i < dim; ++i) f.direction_[i] /= nrm;

    double sup = 0.0, grad = 0.0, hess = 0.0;
    for (int k = 0; k <= depth; ++k) {
        const double ak = amplitude * std::pow(2.0, -k * (1.0 + gamma));
        const double bk = base_freq * std::pow(2.0, double(k));
        sup += std::abs(ak);
        grad += std::abs(ak) * bk;
        hess += std::abs(ak) * bk * bk;
    }
    f.sup_bound_ = sup;
    f.grad_bound_ = grad;
    f.hess_bound_ = hess;
    f.seminorm_bound_ = std::min(
        std::abs(amplitude) * std::pow(base_freq, 1.0 + gamma) *
            lacunary_envelope(gamma, depth),
        interp_seminorm(gamma, grad, hess));
    return f;
}

BoundaryFunction BoundaryFunction::scaled_cutoff(const BoundaryFunction& base,
                                                 double epsilon) {
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
    BoundaryFunction f;
    f.kind_ = Kind::scaled_cutoff;
    f.dim_ = base.dim_;
    f.gamma_ = base.gamma_;
    f.epsilon_ = epsilon;
    f.base_ = std::make_shared<BoundaryFunction>(base);
    Vec zero = Vec::zero(base.dim_);
    f.base0_ = base.eval(zero);
    f.base_grad0_ = base.gradient_vec(zero);

    // After removing the affine part at 0, |base(y) - affine| <=
    // B |y|^{1+gamma} / (1+gamma) and |grad base(y) - grad base(0)| <= B |y|^gamma.
    const double B = base.seminorm_bound_;
    const double g = base.gamma_;
    const double reach = 3.0 * epsilon;  // |8 eps x| for |x| <= 3/8
    const double sup_part =
        B * std::pow(reach, 1.0 + g) / ((1.0 + g) * 8.0 * epsilon);
    const double grad_part = B * std::pow(reach, g);
    f.sup_bound_ = sup_part;
    f.grad_bound_ = 8.0 * sup_part + grad_part;
    // Hessian pieces: eta'' f / (8eps) + 2 eta' grad f + eta (8 eps) Hess base
    const double hess_base = base.hess_bound_;
    f.hess_bound_ = eta_d2_bound() * sup_part + 2.0 * 8.0 * grad_part +
                    8.0 * epsilon * hess_base;
    f.seminorm_bound_ = interp_seminorm(g, f.grad_bound_, f.hess_bound_);
    return f;
}

double BoundaryFunction::eval(const double* xhat) const {
    switch (kind_) {
        case Kind::flat:
            return 0.0;
        case Kind::radial_bump: {
            double r2 = 0.0;
            for (int i = 0; i < dim_; ++i) {
                const double d = xhat[i] - center_[i];
                r2 += d * d;
            }
            return amplitude_ * bump_profile(std::sqrt(r2) / radius_);
        }
        case Kind::lacunary: {
            double t = 0.0;
            for (int i = 0; i < dim_; ++i) t += direction_[i] * xhat[i];
            double s = 0.0;
            for (int k = 0; k <= depth_; ++k) {
                const double ak =
                    amplitude_ * std::pow(2.0, -k * (1.0 + gamma_));
                s += ak * std::cos(base_freq_ * std::pow(2.0, double(k)) * t +
                                   phases_[std::size_t(k)]);
            }
            return s;
        }
        case Kind::scaled_cutoff: {
            double r2 = 0.0;
            double y[4];
            for (int i = 0; i < dim_; ++i) {
                r2 += xhat[i] * xhat[i];
                y[i] = 8.0 * epsilon_ * xhat[i];
            }
            const double e = eta(std::sqrt(r2));
            if (e == 0.0) return 0.0;
            double v = base_->eval(y) - base0_;
            for (int i = 0; i < dim_; ++i) v -= base_grad0_[i] * y[i];
            return e * v / (8.0 * epsilon_);
        }
    }
    return 0.0;
}

void BoundaryFunction::gradient(const double* xhat, double* out) const {
    switch (kind_) {
        case Kind::flat:
            for (int i = 0; i < dim_; ++i) out[i] = 0.0;
            return;
        case Kind::radial_bump: {
            double r2 = 0.0;
            for (int i = 0; i < dim_; ++i) {
                const double d = xhat[i] - center_[i];
                r2 += d * d;
            }
            const double r = std::sqrt(r2);
            if (r == 0.0 || r >= radius_) {
                for (int i = 0; i < dim_; ++i) out[i] = 0.0;
                return;
            }
            const double dpsi =
                amplitude_ * bump_profile_d1(r / radius_) / radius_;
            for (int i = 0; i < dim_; ++i)
                out[i] = dpsi * (xhat[i] - center_[i]) / r;
            return;
        }
        case Kind::lacunary: {
            double t = 0.0;
            for (int i = 0; i < dim_; ++i) t += direction_[i] * xhat[i];
            double s = 0.0;
            for (int k = 0; k <= depth_; ++k) {
                const double ak =
                    amplitude_ * std::pow(2.0, -k * (1.0 + gamma_));
                const double bk = base_freq_ * std::pow(2.0, double(k));
                s -= ak * bk * std::sin(bk * t + phases_[std::size_t(k)]);
            }
            for (int i = 0; i < dim_; ++i) out[i] = s * direction_[i];
            return;
        }
        case Kind::scaled_cutoff: {
            double r2 = 0.0;
            double y[4];
            for (int i = 0; i < dim_; ++i) {
                r2 += xhat[i] * xhat[i];
                y[i] = 8.0 * epsilon_ * xhat[i];
            }
            const double r = std::sqrt(r2);
            const double e = eta(r);
            if (e == 0.0) {
                for (int i = 0; i < dim_; ++i) out[i] = 0.0;
                return;
            }
            double v = base_->eval(y) - base0_;
            double gb[4];
            base_->gradient(y, gb);
            for (int i = 0; i < dim_; ++i) {
                v -= base_grad0_[i] * y[i];
                gb[i] -= base_grad0_[i];
            }
            const double de = (r > 0.0) ? eta_d1(r) : 0.0;
            for (int i = 0; i < dim_; ++i) {
                const double radial =
                    (r > 0.0) ? de * xhat[i] / r * v / (8.0 * epsilon_) : 0.0;
                out[i] = radial + e * gb[i];
            }
            return;
        }
    }
}

Vec BoundaryFunction::gradient_vec(const Vec& xhat) const {
    Vec g = Vec::zero(dim_);
    gradient(xhat.v.data(), g.v.data());
    return g;
}

nlohmann::json BoundaryFunction::to_json() const {
    nlohmann::json j;
    j["gamma"] = gamma_;
    j["dimension"] = dim_;
    switch (kind_) {
        case Kind::flat:
            j["kind"] = "flat";
            j["parameters"] = nlohmann::json::object();
            break;
        case Kind::radial_bump: {
            j["kind"] = "radial-bump";
            std::vector<double> c(center_.v.begin(),
                                  center_.v.begin() + dim_);
            j["parameters"] = {{"amplitude", amplitude_},
                               {"radius", radius_},
                               {"center", c}};
            break;
        }
        case Kind::lacunary:
            j["kind"] = "lacunary-series";
            j["parameters"] = {{"amplitude", amplitude_},
                               {"depth", depth_},
                               {"phase_seed", phase_seed_},
                               {"base_freq", base_freq_}};
            break;
        case Kind::scaled_cutoff:
            j["kind"] = "scaled-cutoff";
            j["parameters"] = {{"epsilon", epsilon_},
                               {"base", base_->to_json()}};
            break;
    }
    return j;
}

BoundaryFunction BoundaryFunction::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind");
    const double gamma = j.at("gamma");
    const int dim = j.at("dimension");
    const auto& p = j.at("parameters");
    if (kind == "flat") return flat(dim, gamma);
    if (kind == "radial-bump") {
        Vec c = Vec::zero(dim);
        const auto arr = p.at("center").get<std::vector<double>>();
        for (int i = 0; i < dim && i < int(arr.size()); ++i) c[i] = arr[size_t(i)];
        return radial_bump(dim, gamma, p.at("amplitude"), p.at("radius"), c);
    }
    if (kind == "lacunary-series")
        return lacunary(dim, gamma, p.at("amplitude"), p.at("depth"),
                        p.at("phase_seed"), p.value("base_freq", 1.0));
    if (kind == "scaled-cutoff")
        return scaled_cutoff(from_json(p.at("base")), p.at("epsilon"));
    throw std::invalid_argument("unknown boundary kind: " + kind);
}

double holder_certificate(const BoundaryFunction& phi, int n_pairs,
                          std::uint64_t seed, double rmin, double rmax) {
    if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
    SplitMix64 rng(seed);
    const int dim = phi.dim();
    double best = 0.0;
    double gx[4], gy[4];
    for (int p = 0; p < n_pairs; ++p) {
        double x[4], dir[4];
        double nrm = 0.0;
        for (int i = 0; i < dim; ++i) {
            x[i] = rng.range(-2.0, 2.0);
            dir[i] = rng.range(-1.0, 1.0);
            nrm += dir[i] * dir[i];
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) continue;
        const double r =
            std::exp(rng.range(std::log(rmin), std::log(rmax)));
        double y[4];
        for (int i = 0; i < dim; ++i) y[i] = x[i] + r * dir[i] / nrm;
        phi.gradient(x, gx);
        phi.gradient(y, gy);
        double diff2 = 0.0;
        for (int i = 0; i < dim; ++i) diff2 += (gx[i] - gy[i]) * (gx[i] - gy[i]);
        best = std::max(best, std::sqrt(diff2) / std::pow(r, phi.gamma()));
    }
    return best;
}

}  // namespace sklab::geom
