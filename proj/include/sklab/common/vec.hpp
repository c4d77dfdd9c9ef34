#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace sklab {

// Small fixed-capacity vector for points in R^d, d <= 4. Geometry and the
// SDE engines work in d = 2 or 3; the slack dimension stays zero.
struct Vec {
    std::array<double, 4> v{};
    int d = 3;

    Vec() = default;
    Vec(double x, double y) : v{x, y, 0.0, 0.0}, d(2) {}
    Vec(double x, double y, double z) : v{x, y, z, 0.0}, d(3) {}
    static Vec zero(int dim) {
        Vec r;
        r.d = dim;
        return r;
    }

    double& operator[](int i) { return v[std::size_t(i)]; }
    double operator[](int i) const { return v[std::size_t(i)]; }

    double norm2() const {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += v[std::size_t(i)] * v[std::size_t(i)];
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < d; ++i) v[std::size_t(i)] += o[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < d; ++i) v[std::size_t(i)] -= o[i];
        return *this;
    }
    Vec& operator*=(double a) {
        for (int i = 0; i < d; ++i) v[std::size_t(i)] *= a;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double a, Vec b) { return b *= a; }

    friend double dot(const Vec& a, const Vec& b) {
        double s = 0.0;
        for (int i = 0; i < a.d; ++i)
            s += a.v[std::size_t(i)] * b.v[std::size_t(i)];
        return s;
    }
};

}  // namespace sklab
