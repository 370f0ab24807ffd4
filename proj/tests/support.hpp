#pragma once

#include "pwarp/connection.hpp"
#include "pwarp/curvature.hpp"
#include "pwarp/manifold.hpp"
#include "pwarp/warped.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using namespace pwarp;

inline bool rel_close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Bivariate polynomial of degree <= 3 with its derivatives evaluated straight
// from the coefficients.  This is the independent oracle for every golden
// Christoffel / sectional formula: it never touches ScalarExpr::differentiate.
struct Poly2 {
    // coefficient of x^i y^j, i + j <= 3
    double c[4][4] = {};

    static Poly2 random(std::mt19937_64& rng, double scale = 1.0) {
        std::uniform_real_distribution<double> d(-scale, scale);
        Poly2 p;
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; j <= 3 - i; ++j) p.c[i][j] = d(rng);
        return p;
    }

    double value(double x, double y) const {
        double s = 0;
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; j <= 3 - i; ++j) s += c[i][j] * std::pow(x, i) * std::pow(y, j);
        return s;
    }
    double dx(double x, double y) const {
        double s = 0;
        for (int i = 1; i <= 3; ++i)
            for (int j = 0; j <= 3 - i; ++j) s += i * c[i][j] * std::pow(x, i - 1) * std::pow(y, j);
        return s;
    }
    double dy(double x, double y) const {
        double s = 0;
        for (int i = 0; i <= 3; ++i)
            for (int j = 1; j <= 3 - i; ++j) s += j * c[i][j] * std::pow(x, i) * std::pow(y, j - 1);
        return s;
    }
    double dxx(double x, double y) const {
        double s = 0;
        for (int i = 2; i <= 3; ++i)
            for (int j = 0; j <= 3 - i; ++j)
                s += i * (i - 1) * c[i][j] * std::pow(x, i - 2) * std::pow(y, j);
        return s;
    }
    double dyy(double x, double y) const {
        double s = 0;
        for (int i = 0; i <= 3; ++i)
            for (int j = 2; j <= 3 - i; ++j)
                s += j * (j - 1) * c[i][j] * std::pow(x, i) * std::pow(y, j - 2);
        return s;
    }

    std::string source(const std::string& x, const std::string& y) const {
        std::string s = "0";
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; j <= 3 - i; ++j) {
                s += " + (" + num(c[i][j]) + ")";
                for (int r = 0; r < i; ++r) s += "*" + x;
                for (int r = 0; r < j; ++r) s += "*" + y;
            }
        return s;
    }
};

// --- Chart builders used across the suites ---------------------------------

// Hyperbolic-plane style chart: cometric diag(-1, 1), coords (x1, x2).
inline ManifoldSpec make_h2(const std::string& pi12 = "c*x1", double c = 2.0) {
    return ManifoldSpec::Builder("H2_1", 2, 1, {"x1", "x2"})
        .box({{0.8, 1.8}, {-1.0, 1.0}})
        .param("c", c)
        .cometric(0, 0, "-1")
        .cometric(1, 1, "1")
        .bivector(0, 1, pi12)
        .build();
}

// Anti-Euclidean chart: cometric diag(-1, -1), coords (y1, y2).
inline ManifoldSpec make_e2(const std::string& pi12 = "cbar*y1", double cbar = 2.0) {
    return ManifoldSpec::Builder("E2_2", 2, 2, {"y1", "y2"})
        .box({{0.5, 1.5}, {-1.0, 1.0}})
        .param("cbar", cbar)
        .cometric(0, 0, "-1")
        .cometric(1, 1, "-1")
        .bivector(0, 1, pi12)
        .build();
}

// Round-sphere chart: cometric diag(1, 1/sin^2 theta), coords (theta, phi).
inline ManifoldSpec make_s2(const std::string& pith = "kpi") {
    return ManifoldSpec::Builder("S2_0", 2, 0, {"theta", "phi"})
        .box({{0.4, 1.2}, {0.1, 1.4}})
        .param("kpi", 0.7)
        .cometric(0, 0, "1")
        .cometric(1, 1, "1/sin(theta)^2")
        .bivector(0, 1, pith)
        .build();
}

// Flat Euclidean plane with an arbitrary Poisson component.
inline ManifoldSpec make_r2(const std::string& pi12) {
    return ManifoldSpec::Builder("R2", 2, 0, {"u1", "u2"})
        .box({{0.6, 1.6}, {-0.9, 0.9}})
        .cometric(0, 0, "1")
        .cometric(1, 1, "1")
        .bivector(0, 1, pi12)
        .build();
}

// 3-dimensional Lorentzian chart with Pi = x3 d1^d2, Poisson.
inline ManifoldSpec make_m3() {
    return ManifoldSpec::Builder("M3_1", 3, 1, {"x1", "x2", "x3"})
        .box({{0.5, 1.5}, {-1.0, 1.0}, {0.7, 1.7}})
        .cometric(0, 0, "-1")
        .cometric(1, 1, "1")
        .cometric(2, 2, "1")
        .bivector(0, 1, "x3")
        .build();
}

// The non-Jacobi 3-dimensional example: residual 1 everywhere.
inline ManifoldSpec make_jacobi_fail() {
    return ManifoldSpec::Builder("J3", 3, 0, {"x1", "x2", "x3"})
        .box({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}})
        .cometric(0, 0, "1")
        .cometric(1, 1, "1")
        .cometric(2, 2, "1")
        .bivector(0, 1, "1")
        .bivector(0, 2, "x1")
        .build();
}

inline std::vector<std::vector<double>> box_points(const ManifoldSpec& spec, int n,
                                                   std::uint64_t seed = 7) {
    PointSampler sampler(std::vector<Interval>(spec.box().begin(), spec.box().end()), seed);
    return sampler.take(n);
}

// Central finite difference of a ScalarExpr along one coordinate.
inline double fd_derivative(const ScalarExpr& e, std::vector<double> p, int var,
                            const ParamTable& params, double h = 1e-6) {
    p[static_cast<std::size_t>(var)] += h;
    double hi = e.eval(p, params);
    p[static_cast<std::size_t>(var)] -= 2 * h;
    double lo = e.eval(p, params);
    return (hi - lo) / (2 * h);
}

} // namespace testsupport
