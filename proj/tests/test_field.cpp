#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "sklab/common/quadrature.hpp"
#include "sklab/common/rng_util.hpp"
#include "sklab/field/counterexample_field.hpp"
#include "sklab/field/mode_table.hpp"
#include "sklab/field/phi_table.hpp"
#include "sklab/field/poisson_oracle.hpp"

using namespace sklab;
using namespace sklab::field;

namespace {

CounterexampleField make_field(double gamma, int n1 = 4, int m_max = 6,
                               int modes = 32) {
    return CounterexampleField({gamma, n1, m_max, modes});
}

}  // namespace

TEST_CASE("bump profile: value one at zero, monotone, compact support") {
    BumpProfile psi;
    CHECK(psi(0.0) == 1.0);
    CHECK(psi(0.75) == 0.0);
    CHECK(psi(0.9) == 0.0);
    double prev = psi(0.0);
    for (int i = 1; i <= 400; ++i) {
        const double cur = psi(0.75 * i / 400.0);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("psi_k1: scaling, support, identity at k = 0") {
    auto f = make_field(0.3);
    CHECK(f.psi_k1(3, 0.0, 0.0) == doctest::Approx(std::pow(2.0, -0.9)).epsilon(1e-14));
    // support radius (3/4) 2^{-k}
    CHECK(f.psi_k1(5, 0.75 / 32.0, 0.0) == 0.0);
    CHECK(f.psi_k1(5, 0.8 / 32.0, 0.0) == 0.0);
    CHECK(f.psi_k1(5, 0.7 / 32.0, 0.0) > 0.0);
    SplitMix64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.range(-1, 1), y = rng.range(-1, 1);
        CHECK(f.psi_k1(0, x, y) ==
              doctest::Approx(BumpProfile{}(std::sqrt(x * x + y * y)))
                  .epsilon(1e-14));
    }
}

TEST_CASE("psi_k: lattice periodicity and brute-force sum oracle") {
    auto f = make_field(0.3);
    const int k = 4;
    const double period = 3.0 * std::pow(2.0, -k);
    // exact value at a far lattice point
    CHECK(f.psi_k(k, 5 * period, -2 * period) ==
          doctest::Approx(std::pow(2.0, -0.3 * k)).epsilon(1e-14));
    // midway between lattice points: all supports miss
    CHECK(f.psi_k(k, 1.5 * period, 1.5 * period) == 0.0);

    SplitMix64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.range(-0.7, 0.7), y = rng.range(-0.7, 0.7);
        // brute-force lattice sum over |i1|, |i2| <= 3 around the rounded cell
        const double bx = std::nearbyint(x / period), by = std::nearbyint(y / period);
        double brute = 0.0;
        for (int i1 = -3; i1 <= 3; ++i1)
            for (int i2 = -3; i2 <= 3; ++i2)
                brute += f.psi_k1(k, x - (bx + i1) * period, y - (by + i2) * period);
        CHECK(f.psi_k(k, x, y) == doctest::Approx(brute).epsilon(1e-13));
        // periodicity
        CHECK(f.psi_k(k, x + period, y) ==
              doctest::Approx(f.psi_k(k, x, y)).epsilon(1e-12));
    }
}

TEST_CASE("phi_k: boundary values match psi_k within truncation tolerance") {
    auto f = make_field(0.3);
    const ModeTable& mt = mode_table(32);
    SplitMix64 rng(3);
    for (int i = 0; i < 300; ++i) {
        const double x = rng.range(-1.5, 1.5), y = rng.range(-1.5, 1.5);
        const double a = f.phi_k(0, x, y, 0.0);
        const double b = f.psi_k(0, x, y);
        CHECK(std::abs(a - b) <= mt.boundary_err + 1e-10);
    }
    CHECK(mt.boundary_err < 2e-3);  // undamped tail of the K = 32 truncation
}

TEST_CASE("phi_k: large-height limit is the cell mean") {
    auto f = make_field(0.3);
    // independent quadrature for int Psi over the cell
    const double integral = integrate_gl(
        [&](double y1) {
            return integrate_gl(
                [&](double y2) {
                    const double r = std::sqrt(y1 * y1 + y2 * y2);
                    return r < 0.75 ? BumpProfile{}(r) : 0.0;
                },
                -0.75, 0.75, 16, 16);
        },
        -0.75, 0.75, 16, 16);
    const double mean = integral / 9.0;
    CHECK(f.cell_mean() == doctest::Approx(mean).epsilon(1e-9));
    CHECK(f.phi_k(2, 0.3, 0.1, 30.0) ==
          doctest::Approx(std::pow(2.0, -0.3 * 2) * mean).epsilon(1e-9));
}

TEST_CASE("phi_k: discrete Laplacian residual is O(h^2)") {
    auto f = make_field(0.3);
    const double h1 = 0.02, z0 = 0.35;
    double worst1 = 0.0, worst2 = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double x = 0.1 + 0.45 * i, y = 0.23 + 0.31 * i;
        for (double h : {h1, h1 / 2}) {
            const double lap =
                (f.phi_k(0, x + h, y, z0) + f.phi_k(0, x - h, y, z0) +
                 f.phi_k(0, x, y + h, z0) + f.phi_k(0, x, y - h, z0) +
                 f.phi_k(0, x, y, z0 + h) + f.phi_k(0, x, y, z0 - h) -
                 6.0 * f.phi_k(0, x, y, z0)) /
                (h * h);
            (h == h1 ? worst1 : worst2) = std::max(
                h == h1 ? worst1 : worst2, std::abs(lap));
        }
    }
    CHECK(worst1 < 6e-3);
    CHECK(worst2 < worst1);         // shrinks under refinement
    CHECK(worst2 < 0.4 * worst1);   // consistent with O(h^2)
}

TEST_CASE("phi_total: single term, positivity, sup bound") {
    auto f0 = make_field(0.3, 4, 0);
    auto f = make_field(0.3, 4, 6);
    SplitMix64 rng(4);
    const double sup = f.sup_phi_bound();
    CHECK(sup == doctest::Approx(
        (1 - std::pow(2.0, -0.3 * 4 * 7)) / (1 - std::pow(2.0, -0.3 * 4))));
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.range(-2, 2), y = rng.range(-2, 2);
        const double z = rng.range(0.0, 3.0);
        if (i < 500)
            CHECK(f0.phi_total(x, y, z) ==
                  doctest::Approx(f0.phi_k(0, x, y, z)).epsilon(1e-15));
        const double p = f.phi_total(x, y, z);
        CHECK(p >= -1e-9);
        CHECK(p <= sup * (1 + 1e-9));
    }
    // flat field
    auto flat = make_field(0.3, 4, -1);
    CHECK(flat.phi_total(0.3, 0.2, 0.1) == 0.0);
}

TEST_CASE("sigma: diagonal structure, reflection symmetry, deep-height limit") {
    auto f = make_field(0.3);
    SplitMix64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.range(-2, 2), y = rng.range(-2, 2),
                     z = rng.range(-2, 2);
        auto s = f.sigma_diag(x, y, z);
        CHECK(s[2] == 1.0);
        CHECK(s[0] == s[1]);
        CHECK(s[0] >= 1.0);
        auto sr = f.sigma_diag(x, y, -z);
        CHECK(s[0] == sr[0]);  // even extension
    }
    // x3 large: sigma_11 -> 1 + sum_m amp_m * cell mean
    double suffix = 0.0;
    for (int m = 0; m <= 6; ++m) suffix += std::pow(2.0, -0.3 * 4 * m);
    CHECK(f.sigma11(0.4, 0.7, 50.0) ==
          doctest::Approx(1.0 + suffix * f.cell_mean()).epsilon(1e-9));
}

TEST_CASE("fourier vs poisson-kernel evaluation routes agree") {
    const ModeTable& mt = mode_table(32);
    // moderate heights, points across the cell
    const double pts[][3] = {{0.1, 0.2, 0.3}, {1.4, 2.2, 0.08},
                             {0.0, 0.0, 0.5}, {2.9, 0.4, 1.1},
                             {1.5, 1.5, 0.05}};
    for (const auto& p : pts) {
        const double a = eval_phi_p(mt, p[0], p[1], p[2]);
        const double b = poisson_phi_p(p[0], p[1], p[2], 24, 1e-9);
        CHECK(std::abs(a - b) < 1e-4);
    }
}

TEST_CASE("fast table path tracks the mode-sum reference") {
    auto f = make_field(0.3);
    CHECK(f.fast_path_error_bound() < 4e-3);
    SplitMix64 rng(6);
    double worst = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const double x = rng.range(-2, 2), y = rng.range(-2, 2);
        const double z = std::exp(rng.range(std::log(1e-9), std::log(30.0)));
        worst = std::max(worst,
                         std::abs(f.phi_total_fast(x, y, z) - f.phi_total(x, y, z)));
    }
    CHECK(worst < 4e-3);
}

TEST_CASE("gradient certificate: flat field zero, single-scale cross-check") {
    auto flat = make_field(0.3, 4, -1);
    auto cert = flat.certify_gradient_bound(0, 4, 4);
    CHECK(cert.overall_max == 0.0);

    // single-scale field: normalized derivative at x3 = 1 equals the raw
    // derivative of phi_0 there
    auto f0 = make_field(0.3, 4, 0);
    auto c0 = f0.certify_gradient_bound(0, 0, 24);
    const double z = 1.0, d = z / 16.0;
    double direct = 0.0;
    for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 24; ++j) {
            const double x = 3.0 * (i + 0.31) / 24.0, y = 3.0 * (j + 0.17) / 24.0;
            const double gx =
                (f0.phi_k(0, x + d, y, z) - f0.phi_k(0, x - d, y, z)) / (2 * d);
            const double gy =
                (f0.phi_k(0, x, y + d, z) - f0.phi_k(0, x, y - d, z)) / (2 * d);
            const double gz =
                (f0.phi_k(0, x, y, z + d) - f0.phi_k(0, x, y, z - d)) / (2 * d);
            direct = std::max({direct, std::abs(gx), std::abs(gy), std::abs(gz)});
        }
    CHECK(c0.rows[0].max_normalized == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("gradient certificate: normalized maxima bounded down the levels") {
    auto f = make_field(0.3, 4, 6);
    auto cert = f.certify_gradient_bound(0, 20, 6);
    REQUIRE(cert.rows.size() == 21);
    // the normalized quantity must not blow up as x3 -> 0
    double shallow = 0.0, deep = 0.0;
    for (const auto& r : cert.rows)
        (r.x3 > 1e-3 ? shallow : deep) = std::max(
            r.x3 > 1e-3 ? shallow : deep, r.max_normalized);
    CHECK(deep < 3.0 * shallow);
    CHECK(cert.overall_max > 0.0);
}

TEST_CASE("field config JSON round trip and validation") {
    auto f = make_field(0.45, 3, 5, 32);
    auto back = CounterexampleField::from_json(f.to_json());
    CHECK(back.config().gamma == 0.45);
    CHECK(back.config().n1 == 3);
    CHECK(back.phi_total(0.2, 0.4, 0.6) == f.phi_total(0.2, 0.4, 0.6));
    CHECK_THROWS_AS(make_field(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_field(1.2), std::invalid_argument);
    CHECK_THROWS_AS(make_field(0.3, 0), std::invalid_argument);
    CHECK_THROWS_AS(CounterexampleField({0.3, 4, 20, 32}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_field(0.3).phi_total(0, 0, -0.1),
                    std::invalid_argument);
}
