#include "sklab/field/counterexample_field.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sklab/field/mode_table.hpp"
#include "sklab/field/phi_table.hpp"
#include "sklab/geometry/boundary.hpp"

namespace sklab::field {

namespace {

inline double wrap3(double x) {
    double u = std::fmod(x, 3.0);
    if (u < 0.0) u += 3.0;
    return u;
}

// above this height every retained mode of phi_P has decayed to < 3e-20,
// the mode sum returns exactly its cell mean
constexpr double kMeanHeight = 22.0;

}  // namespace

double BumpProfile::operator()(double r) const {
    return geom::bump_profile(r / radius);
}

CounterexampleField::CounterexampleField(Config cfg) : cfg_(cfg) {
    if (!(cfg.gamma > 0.0) || cfg.gamma > 1.0)
        throw std::invalid_argument("field gamma must be in (0, 1]");
    if (cfg.n1 < 1) throw std::invalid_argument("n1 must be >= 1");
    if (cfg.m_max < -1) throw std::invalid_argument("m_max must be >= -1");
    if (cfg.m_max >= 0 && cfg.m_max * cfg.n1 > 48)
        throw std::invalid_argument("m_max * n1 too deep (scale underflow)");
    modes_ = &mode_table(cfg.fourier_modes);
    table_ = &PhiTable::instance(cfg.fourier_modes);
    for (int m = 0; m <= cfg.m_max; ++m) {
        scale_k_.push_back(m * cfg.n1);
        scale_amp_.push_back(std::pow(2.0, -cfg.gamma * m * cfg.n1));
        sup_phi_bound_ += scale_amp_.back();
    }
    suffix_mean_.assign(scale_amp_.size() + 1, 0.0);
    for (int m = int(scale_amp_.size()) - 1; m >= 0; --m)
        suffix_mean_[std::size_t(m)] = suffix_mean_[std::size_t(m) + 1] +
                                       modes_->cell_mean *
                                           scale_amp_[std::size_t(m)];
}

double CounterexampleField::psi_k1(int k, double x, double y) const {
    const double sx = std::ldexp(x, k);
    const double sy = std::ldexp(y, k);
    const double r = std::sqrt(sx * sx + sy * sy);
    if (r >= BumpProfile::radius) return 0.0;
    return std::pow(2.0, -cfg_.gamma * k) * BumpProfile{}(r);
}

double CounterexampleField::psi_k(int k, double x, double y) const {
    const double sx = std::ldexp(x, k);
    const double sy = std::ldexp(y, k);
    const double ox = sx - 3.0 * std::nearbyint(sx / 3.0);
    const double oy = sy - 3.0 * std::nearbyint(sy / 3.0);
    const double r = std::sqrt(ox * ox + oy * oy);
    if (r >= BumpProfile::radius) return 0.0;
    return std::pow(2.0, -cfg_.gamma * k) * BumpProfile{}(r);
}

double CounterexampleField::phi_k(int k, double x, double y, double z) const {
    if (z < 0.0) throw std::invalid_argument("phi_k: requires x3 >= 0");
    const double u = wrap3(std::ldexp(x, k));
    const double v = wrap3(std::ldexp(y, k));
    const double s = std::ldexp(z, k);
    return std::pow(2.0, -cfg_.gamma * k) * eval_phi_p(*modes_, u, v, s);
}

double CounterexampleField::phi_total(double x, double y, double z) const {
    if (z < 0.0) throw std::invalid_argument("phi_total: requires x3 >= 0");
    double sum = 0.0;
    for (std::size_t m = 0; m < scale_k_.size(); ++m) {
        const double s = std::ldexp(z, scale_k_[m]);
        if (s >= kMeanHeight) {
            sum += suffix_mean_[m];
            break;
        }
        const double u = wrap3(std::ldexp(x, scale_k_[m]));
        const double v = wrap3(std::ldexp(y, scale_k_[m]));
        sum += scale_amp_[m] * eval_phi_p(*modes_, u, v, s);
    }
    return sum;
}

double CounterexampleField::phi_total_fast(double x, double y, double z) const {
    if (z < 0.0) throw std::invalid_argument("phi_total_fast: requires x3 >= 0");
    double sum = 0.0;
    for (std::size_t m = 0; m < scale_k_.size(); ++m) {
        const double s = std::ldexp(z, scale_k_[m]);
        if (s >= PhiTable::kSMax) {
            sum += suffix_mean_[m];
            break;
        }
        const double u = std::ldexp(x, scale_k_[m]);
        const double v = std::ldexp(y, scale_k_[m]);
        sum += scale_amp_[m] * table_->eval(u, v, s);
    }
    // interpolation can undershoot the nonnegative extension near the bump
    // support edge by ~the table error bound
    return sum > 0.0 ? sum : 0.0;
}

void CounterexampleField::phi_pair_fast(double x1, double y1, double x2,
                                        double y2, double z,
                                        double out[2]) const {
    double sum0 = 0.0, sum1 = 0.0;
    double pair[2];
    for (std::size_t m = 0; m < scale_k_.size(); ++m) {
        const double s = std::ldexp(z, scale_k_[m]);
        if (s >= PhiTable::kSMax) {
            sum0 += suffix_mean_[m];
            sum1 += suffix_mean_[m];
            break;
        }
        const int k = scale_k_[m];
        table_->eval_pair(std::ldexp(x1, k), std::ldexp(y1, k),
                          std::ldexp(x2, k), std::ldexp(y2, k), s, pair);
        sum0 += scale_amp_[m] * pair[0];
        sum1 += scale_amp_[m] * pair[1];
    }
    out[0] = sum0 > 0.0 ? sum0 : 0.0;
    out[1] = sum1 > 0.0 ? sum1 : 0.0;
}

std::array<double, 3> CounterexampleField::sigma_diag(double x, double y,
                                                      double z) const {
    const double phi = phi_total(x, y, std::abs(z));
    return {1.0 + phi, 1.0 + phi, 1.0};
}

double CounterexampleField::sigma11(double x, double y, double z) const {
    return 1.0 + phi_total(x, y, std::abs(z));
}

double CounterexampleField::sigma11_fast(double x, double y, double z) const {
    return 1.0 + phi_total_fast(x, y, std::abs(z));
}

double CounterexampleField::cell_mean() const { return modes_->cell_mean; }

double CounterexampleField::fast_path_error_bound() const {
    return table_->max_abs_error_bound() * sup_phi_bound_;
}

GradientCertificate CounterexampleField::certify_gradient_bound(
    int l_min, int l_max, int nxy) const {
    if (l_min > l_max || nxy < 2)
        throw std::invalid_argument("certify_gradient_bound: bad grid");
    GradientCertificate cert;
    const double exp1mg = 1.0 - cfg_.gamma;
    for (int l = l_min; l <= l_max; ++l) {
        const double z = std::pow(2.0, double(-l));
        const double dz = std::max(z / 16.0, 1e-12);
        GradientCertRow row{z, 0.0, {0, 0, 0}};
        for (int i = 0; i < nxy; ++i) {
            // offset keeps samples away from the lattice symmetry axes
            const double x = 3.0 * (i + 0.31) / nxy;
            for (int j = 0; j < nxy; ++j) {
                const double y = 3.0 * (j + 0.17) / nxy;
                const double dxy = z / 16.0;
                const double gx = (sigma11(x + dxy, y, z) -
                                   sigma11(x - dxy, y, z)) /
                                  (2.0 * dxy);
                const double gy = (sigma11(x, y + dxy, z) -
                                   sigma11(x, y - dxy, z)) /
                                  (2.0 * dxy);
                const double gz =
                    (sigma11(x, y, z + dz) - sigma11(x, y, z - dz)) /
                    (2.0 * dz);
                const double g = std::max({std::abs(gx), std::abs(gy),
                                           std::abs(gz)});
                const double norm = g * std::pow(z, exp1mg);
                if (norm > row.max_normalized) {
                    row.max_normalized = norm;
                    row.argmax = {x, y, z};
                }
            }
        }
        if (row.max_normalized > cert.overall_max) {
            cert.overall_max = row.max_normalized;
            cert.argmax = row.argmax;
        }
        cert.rows.push_back(row);
    }
    return cert;
}

nlohmann::json CounterexampleField::to_json() const {
    return {{"gamma", cfg_.gamma},
            {"n1", cfg_.n1},
            {"m_max", cfg_.m_max},
            {"fourier_modes", cfg_.fourier_modes}};
}

CounterexampleField CounterexampleField::from_json(const nlohmann::json& j) {
    Config cfg;
    cfg.gamma = j.at("gamma");
    cfg.n1 = j.value("n1", 4);
    cfg.m_max = j.value("m_max", 6);
    cfg.fourier_modes = j.value("fourier_modes", 32);
    return CounterexampleField(cfg);
}

}  // namespace sklab::field
