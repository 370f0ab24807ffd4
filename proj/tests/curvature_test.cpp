#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace pwarp;
using namespace testsupport;

namespace {

CoVector cov(std::vector<double> v) { return CoVector(std::move(v)); }

// Hand-coded sectional-curvature closed forms for the three example charts,
// fed by the coefficient-level polynomial oracle.
double golden_k_h2(const Poly2& q, double x, double y) {
    return q.value(x, y) * (q.dxx(x, y) - q.dyy(x, y)) - q.dx(x, y) * q.dx(x, y) +
           q.dy(x, y) * q.dy(x, y);
}

double golden_k_e2(const Poly2& q, double x, double y) {
    return q.dx(x, y) * q.dx(x, y) + q.dy(x, y) * q.dy(x, y) -
           q.value(x, y) * (q.dxx(x, y) + q.dyy(x, y));
}

// Sphere chart.  The sin(2 theta)/2 term enters with a plus sign: that is
// what the chart's own Christoffel list produces (two independent
// derivations agree), and the generic pipeline must match it.
double golden_k_s2(const Poly2& q, double th, double ph) {
    double s = std::sin(th), c = std::cos(th);
    return q.value(th, ph) * (s * s * q.dxx(th, ph) + q.dyy(th, ph) + s * c * q.dx(th, ph)) -
           (s * s * q.dx(th, ph) * q.dx(th, ph) + q.dy(th, ph) * q.dy(th, ph));
}

} // namespace

TEST_CASE("sectional curvature golden values with linear bivectors") {
    for (double c : {0.5, 1.0, 2.0}) {
        ManifoldSpec h2 = make_h2("c*x1", c);
        for (auto& p : box_points(h2, 20)) {
            double k = sectional(h2, p, coordinate_form(h2, 0), coordinate_form(h2, 1));
            CHECK(std::fabs(k - (-c * c)) <= 1e-12 * (1 + c * c));
        }
        ManifoldSpec e2 = make_e2("cbar*y1", c);
        for (auto& p : box_points(e2, 20)) {
            double k = sectional(e2, p, coordinate_form(e2, 0), coordinate_form(e2, 1));
            CHECK(std::fabs(k - c * c) <= 1e-12 * (1 + c * c));
        }
    }
    // Constant bivector on the sphere chart: flat.
    ManifoldSpec s2 = make_s2();
    for (auto& p : box_points(s2, 10)) {
        double k = sectional(s2, p, coordinate_form(s2, 0), coordinate_form(s2, 1));
        CHECK(std::fabs(k) <= 1e-12);
    }
}

TEST_CASE("golden closed forms match the pipeline for random cubic bivectors") {
    std::mt19937_64 rng(271828);
    for (int trial = 0; trial < 6; ++trial) {
        Poly2 q = Poly2::random(rng);
        ManifoldSpec h2 = make_h2(q.source("x1", "x2"));
        ManifoldSpec e2 = make_e2(q.source("y1", "y2"));
        ManifoldSpec s2 = make_s2(q.source("theta", "phi"));
        for (auto& p : box_points(h2, 20, 100 + static_cast<std::uint64_t>(trial))) {
            double got = sectional(h2, p, coordinate_form(h2, 0), coordinate_form(h2, 1));
            CHECK(rel_close(got, golden_k_h2(q, p[0], p[1]), 1e-8));
        }
        for (auto& p : box_points(e2, 20, 200 + static_cast<std::uint64_t>(trial))) {
            double got = sectional(e2, p, coordinate_form(e2, 0), coordinate_form(e2, 1));
            CHECK(rel_close(got, golden_k_e2(q, p[0], p[1]), 1e-8));
        }
        for (auto& p : box_points(s2, 20, 300 + static_cast<std::uint64_t>(trial))) {
            double got = sectional(s2, p, coordinate_form(s2, 0), coordinate_form(s2, 1));
            CHECK(rel_close(got, golden_k_s2(q, p[0], p[1]), 1e-8));
        }
    }
}

TEST_CASE("curvature tensor symmetries on Poisson charts") {
    std::mt19937_64 rng(161803);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    for (ManifoldSpec spec : {make_h2("c*x1 + 0.4*x2^2"), make_s2("theta*phi + 0.5"), make_m3()}) {
        const int k = spec.dim();
        for (auto& p : box_points(spec, 25)) {
            CurvatureAtPoint R = curvature_at(spec, p);
            SquareMatrix G = cometric_at(spec, p);
            CoVector a = cov(std::vector<double>(static_cast<std::size_t>(k)));
            CoVector b = a, c = a, e = a;
            for (int i = 0; i < k; ++i) {
                a[i] = d(rng);
                b[i] = d(rng);
                c[i] = d(rng);
                e[i] = d(rng);
            }
            double abce = curvature_pairing(R, G, a, b, c, e);
            double bace = curvature_pairing(R, G, b, a, c, e);
            double ceab = curvature_pairing(R, G, c, e, a, b);
            double scale = 1 + std::fabs(abce);
            CHECK(std::fabs(abce + bace) <= 1e-9 * scale);   // antisymmetry in (a,b)
            CHECK(std::fabs(abce - ceab) <= 1e-9 * scale);   // pair symmetry
            // First Bianchi: R(a,b)c + R(b,c)a + R(c,a)b = 0.
            for (int m = 0; m < k; ++m) {
                double cyc = 0;
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j)
                        for (int kk = 0; kk < k; ++kk)
                            cyc += R.at(i, j, kk, m) *
                                   (a[i] * b[j] * c[kk] + b[i] * c[j] * a[kk] + c[i] * a[j] * b[kk]);
                CHECK(std::fabs(cyc) <= 1e-9 * scale);
            }
        }
    }
}

TEST_CASE("R(omega, omega) vanishes and zero bivector is flat") {
    ManifoldSpec h2 = make_h2();
    for (auto& p : box_points(h2, 10)) {
        CurvatureAtPoint R = curvature_at(h2, p);
        for (int kk = 0; kk < 2; ++kk)
            for (int m = 0; m < 2; ++m) {
                CHECK(R.at(0, 0, kk, m) == 0.0);
                CHECK(R.at(1, 1, kk, m) == 0.0);
            }
    }
    ManifoldSpec flat = make_r2("0");
    for (auto& p : box_points(flat, 5)) {
        CurvatureAtPoint R = curvature_at(flat, p);
        for (double v : R.r) CHECK(v == 0.0);
    }
}

TEST_CASE("sectional curvature is invariant under plane re-parameterization") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    ManifoldSpec m3 = make_m3();
    for (auto& p : box_points(m3, 20)) {
        CoVector a = cov({d(rng), d(rng), d(rng)});
        CoVector b = cov({d(rng), d(rng), d(rng)});
        double ab, cd;
        try {
            ab = sectional(m3, p, a, b);
        } catch (const Error&) {
            continue;
        }
        double m00 = d(rng), m01 = d(rng), m10 = d(rng), m11 = d(rng);
        if (std::fabs(m00 * m11 - m01 * m10) < 0.15) continue;
        CoVector u = cov({0, 0, 0}), v = cov({0, 0, 0});
        for (int i = 0; i < 3; ++i) {
            u[i] = m00 * a[i] + m01 * b[i];
            v[i] = m10 * a[i] + m11 * b[i];
        }
        try {
            cd = sectional(m3, p, u, v);
        } catch (const Error&) {
            continue;
        }
        CHECK(rel_close(ab, cd, 1e-8));
    }
}

TEST_CASE("degenerate planes are rejected with the dedicated error") {
    ManifoldSpec h2 = make_h2();
    std::vector<double> p = {1.0, 0.0};
    try {
        sectional(h2, p, coordinate_form(h2, 0), coordinate_form(h2, 0));
        FAIL("expected DegeneratePlane");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegeneratePlane);
    }
    // Degenerate plane: a null form paired with an orthogonal direction.
    ManifoldSpec m3 = make_m3();
    std::vector<double> p3 = {1.0, 0.2, 1.0};
    try {
        sectional(m3, p3, cov({1.0, 1.0, 0.0}), cov({0.0, 0.0, 1.0}));
        FAIL("expected DegeneratePlane");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegeneratePlane);
    }
}

TEST_CASE("orthonormal coframe construction") {
    ManifoldSpec h2 = make_h2();
    std::vector<double> p = {1.0, 0.0};
    OrthonormalCoframe f = orthonormal_coframe(h2, p);
    REQUIRE(f.dim() == 2);
    CHECK(f.signs[0] == -1);
    CHECK(f.signs[1] == 1);
    CHECK(std::fabs(f.rows[0][0]) == doctest::Approx(1.0));
    CHECK(f.rows[0][1] == doctest::Approx(0.0));
    CHECK(std::fabs(f.rows[1][1]) == doctest::Approx(1.0));

    // Scaled vertical block: cometric diag(1, 1/f^2) normalizes to f dx2.
    ManifoldSpec scaled = ManifoldSpec::Builder("V", 2, 0, {"x1", "x2"})
                              .cometric(0, 0, "1")
                              .cometric(1, 1, "1/4")
                              .build();
    OrthonormalCoframe fs = orthonormal_coframe(scaled, p);
    CHECK(fs.signs[0] == 1);
    CHECK(fs.signs[1] == 1);
    CHECK(std::fabs(fs.rows[1][1]) == doctest::Approx(2.0));  // f = 2

    // Signature mismatch reports CoframeConstruction failure.
    ManifoldSpec wrong = ManifoldSpec::Builder("W", 2, 1, {"x1", "x2"})
                             .cometric(0, 0, "1")
                             .cometric(1, 1, "1")
                             .build();
    try {
        orthonormal_coframe(wrong, p);
        FAIL("expected CoframeConstruction");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CoframeConstruction);
    }

    // General pseudo-orthonormality on mixed charts.
    for (ManifoldSpec spec : {make_m3(), make_s2("theta")}) {
        for (auto& q : box_points(spec, 15)) {
            OrthonormalCoframe fr = orthonormal_coframe(spec, q);
            for (int a = 0; a < fr.dim(); ++a) {
                for (int b = 0; b < fr.dim(); ++b) {
                    double want = (a == b) ? fr.signs[static_cast<std::size_t>(a)] : 0.0;
                    double got = pairing(spec, q, fr.rows[static_cast<std::size_t>(a)],
                                         fr.rows[static_cast<std::size_t>(b)]);
                    CHECK(std::fabs(got - want) <= 1e-10);
                }
            }
            int negs = 0;
            for (int s : fr.signs)
                if (s < 0) ++negs;
            CHECK(negs == spec.index());
            for (int a = 1; a < fr.dim(); ++a)
                CHECK(fr.signs[static_cast<std::size_t>(a - 1)] <= fr.signs[static_cast<std::size_t>(a)]);
        }
    }
}

TEST_CASE("Ricci and scalar curvature") {
    ManifoldSpec flat = make_r2("0");
    std::vector<double> p0 = {1.0, 0.1};
    CHECK(ricci(flat, p0, coordinate_form(flat, 0), coordinate_form(flat, 1)) == 0.0);
    CHECK(scalar_curvature(flat, p0) == 0.0);

    // Brute-force oracle on the hyperbolic chart: S = sum over the coframe of
    // g(R(theta_a, theta_b) theta_b, theta_a); with K = -c^2 this collapses
    // to 2 c^2 under the plain-sum convention.
    for (double c : {0.5, 1.0, 2.0}) {
        ManifoldSpec h2 = make_h2("c*x1", c);
        for (auto& p : box_points(h2, 10)) {
            double s = scalar_curvature(h2, p);
            CHECK(rel_close(s, 2.0 * c * c, 1e-10));
        }
    }

    // Ricci symmetry on Poisson charts.
    std::mt19937_64 rng(10007);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    ManifoldSpec m3 = make_m3();
    for (auto& p : box_points(m3, 15)) {
        CoVector a = cov({d(rng), d(rng), d(rng)});
        CoVector b = cov({d(rng), d(rng), d(rng)});
        double rab = ricci(m3, p, a, b);
        double rba = ricci(m3, p, b, a);
        CHECK(std::fabs(rab - rba) <= 1e-9 * (1 + std::fabs(rab)));
    }
}

TEST_CASE("qualar curvature on the hyperbolic chart") {
    for (double c : {0.5, 1.0, 2.0}) {
        ManifoldSpec h2 = make_h2("c*x1", c);
        for (auto& p : box_points(h2, 10)) {
            QualarResult q = qualar(h2, p);
            CHECK_FALSE(q.empty_signature_range);
            CHECK(rel_close(q.value, -2.0 * c * c, 1e-10));
        }
    }
    // Riemannian chart: empty signature range.
    ManifoldSpec s2 = make_s2();
    QualarResult q = qualar(s2, std::vector<double>{0.8, 0.5});
    CHECK(q.empty_signature_range);
    CHECK(q.value == 0.0);
    // Zero bivector: flat, qualar 0 without the warning.
    ManifoldSpec flat = ManifoldSpec::Builder("F", 2, 1, {"x1", "x2"})
                            .cometric(0, 0, "-1")
                            .cometric(1, 1, "1")
                            .build();
    QualarResult qf = qualar(flat, std::vector<double>{0.3, 0.4});
    CHECK_FALSE(qf.empty_signature_range);
    CHECK(qf.value == 0.0);
}

TEST_CASE("null forms satisfy their normalization") {
    ManifoldSpec h2 = make_h2();
    std::vector<double> p = {1.2, -0.3};
    auto forms = null_forms(h2, p);
    REQUIRE(forms.size() == 1);
    const NullForm& nf = forms[0];
    CHECK(std::fabs(pairing(h2, p, nf.xi, nf.xi)) <= 1e-10);
    CHECK(std::fabs(pairing(h2, p, nf.xibar, nf.xibar)) <= 1e-10);
    CHECK(std::fabs(pairing(h2, p, nf.xi, nf.xibar) - 1.0) <= 1e-10);

    // q (k - q) pairs in general.
    ManifoldSpec m3 = make_m3();
    auto forms3 = null_forms(m3, std::vector<double>{1.0, 0.2, 1.1});
    CHECK(forms3.size() == 2);
    for (const auto& f3 : forms3) {
        std::vector<double> q3 = {1.0, 0.2, 1.1};
        CHECK(std::fabs(pairing(m3, q3, f3.xi, f3.xi)) <= 1e-10);
        CHECK(std::fabs(pairing(m3, q3, f3.xi, f3.xibar) - 1.0) <= 1e-10);
    }

    // Riemannian chart has none.
    ManifoldSpec s2 = make_s2();
    CHECK(null_forms(s2, std::vector<double>{0.8, 0.5}).empty());
}

TEST_CASE("null sectional curvature: flat case and three-term decomposition") {
    ManifoldSpec flat = ManifoldSpec::Builder("F3", 3, 1, {"x1", "x2", "x3"})
                            .cometric(0, 0, "-1")
                            .cometric(1, 1, "1")
                            .cometric(2, 2, "1")
                            .build();
    std::vector<double> pf = {0.1, 0.2, 0.3};
    auto ff = null_forms(flat, pf);
    OrthonormalCoframe framef = orthonormal_coframe(flat, pf);
    CHECK(null_sectional(flat, pf, ff[0].xi, framef.rows[2]) == 0.0);

    // K(xi^i_s, theta_l) = -K(theta_i,theta_l)/2 + K(theta_s,theta_l)/2
    //   + eps_l g(R(theta_i,theta_l)theta_l, theta_s) on a curved 3-chart.
    ManifoldSpec m3 = make_m3();
    for (auto& p : box_points(m3, 15)) {
        OrthonormalCoframe frame = orthonormal_coframe(m3, p);
        CurvatureAtPoint R = curvature_at(m3, p);
        SquareMatrix G = cometric_at(m3, p);
        for (const auto& nf : null_forms(m3, p)) {
            for (int l = 0; l < 3; ++l) {
                if (l == nf.i || l == nf.s) continue;
                const CoVector& tl = frame.rows[static_cast<std::size_t>(l)];
                double lhs = null_sectional(m3, p, nf.xi, tl);
                double k_i = sectional(m3, p, frame.rows[static_cast<std::size_t>(nf.i)], tl);
                double k_s = sectional(m3, p, frame.rows[static_cast<std::size_t>(nf.s)], tl);
                double cross = curvature_pairing(R, G, frame.rows[static_cast<std::size_t>(nf.i)],
                                                 tl, tl, frame.rows[static_cast<std::size_t>(nf.s)]);
                double rhs = -0.5 * k_i + 0.5 * k_s + frame.signs[static_cast<std::size_t>(l)] * cross;
                CHECK(std::fabs(lhs - rhs) <= 1e-9 * (1 + std::fabs(lhs)));
            }
        }
    }

    // Guards.
    std::vector<double> p0 = box_points(m3, 1)[0];
    OrthonormalCoframe fr0 = orthonormal_coframe(m3, p0);
    CHECK_THROWS_AS(null_sectional(m3, p0, fr0.rows[0], fr0.rows[1]), Error);  // xi not null
    auto nfs = null_forms(m3, p0);
    CHECK_THROWS_AS(null_sectional(m3, p0, nfs[0].xi, nfs[0].xi), Error);  // direction null
}

TEST_CASE("qualar via null forms equals qualar") {
    for (ManifoldSpec spec : {make_h2("c*x1 + 0.2*x2^2"), make_m3()}) {
        for (auto& p : box_points(spec, 15)) {
            QualarResult a = qualar(spec, p);
            QualarResult b = qualar_via_null_forms(spec, p);
            CHECK(rel_close(a.value, b.value, 1e-9));
        }
    }
    // Holds even on the non-Jacobi chart (plane-span algebra only).
    ManifoldSpec bad = ManifoldSpec::Builder("B3", 3, 1, {"x1", "x2", "x3"})
                           .box({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}})
                           .cometric(0, 0, "-1")
                           .cometric(1, 1, "1")
                           .cometric(2, 2, "1")
                           .bivector(0, 1, "1")
                           .bivector(0, 2, "x1")
                           .build();
    for (auto& p : box_points(bad, 10)) {
        QualarResult a = qualar(bad, p);
        QualarResult b = qualar_via_null_forms(bad, p);
        CHECK(rel_close(a.value, b.value, 1e-9));
    }
}

TEST_CASE("second derivative of 1-form fields satisfies the Ricci identity") {
    // For torsion-free D and constant-coefficient fields,
    //   D^2_{omega,eta} T - D^2_{eta,omega} T = R(omega, eta) T.
    std::mt19937_64 rng(171717);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    for (ManifoldSpec spec : {make_h2("c*x1 + 0.5*x2^2"), make_m3()}) {
        const int k = spec.dim();
        CoVectorField omega(k), eta(k), T(k);
        for (int i = 0; i < k; ++i) {
            omega.c[static_cast<std::size_t>(i)] = ex_const(d(rng));
            eta.c[static_cast<std::size_t>(i)] = ex_const(d(rng));
            T.c[static_cast<std::size_t>(i)] = ex_const(d(rng));
        }
        CoVectorField fwd = second_derivative(spec, omega, eta, T);
        CoVectorField bwd = second_derivative(spec, eta, omega, T);
        for (auto& p : box_points(spec, 15)) {
            CurvatureAtPoint R = curvature_at(spec, p);
            CoVector ov = omega.at(p, spec.params());
            CoVector ev = eta.at(p, spec.params());
            CoVector tv = T.at(p, spec.params());
            CoVector f = fwd.at(p, spec.params());
            CoVector b = bwd.at(p, spec.params());
            for (int m = 0; m < k; ++m) {
                double rterm = 0;
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j)
                        for (int kk = 0; kk < k; ++kk)
                            rterm += ov[i] * ev[j] * tv[kk] * R.at(i, j, kk, m);
                CHECK(std::fabs(f[m] - b[m] - rterm) <= 1e-10 * (1 + std::fabs(rterm)));
            }
        }
    }
}

TEST_CASE("symbolic Christoffel derivatives agree with finite differences") {
    // The curvature pipeline consumes d_l Gamma_m^{ij} symbolically; shadow
    // every entry with a central difference of the Gamma expressions.
    for (ManifoldSpec spec : {make_h2("c*x1 + 0.3*x1*x2"), make_s2("theta^2 + phi")}) {
        const int k = spec.dim();
        for (auto& p : box_points(spec, 10)) {
            for (int l = 0; l < k; ++l)
                for (int m = 0; m < k; ++m)
                    for (int i = 0; i < k; ++i)
                        for (int j = 0; j < k; ++j) {
                            double sym = spec.geom().DGamma(l, m, i, j).eval(p, spec.params());
                            double fd = fd_derivative(spec.geom().Gamma(m, i, j), p, l,
                                                      spec.params());
                            CHECK(std::fabs(sym - fd) <= 1e-5 * (1 + std::fabs(sym)));
                        }
        }
    }
}
