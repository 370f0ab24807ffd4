#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace pwarp;
using namespace testsupport;

namespace {

CoVector cov(std::vector<double> v) { return CoVector(std::move(v)); }

} // namespace

TEST_CASE("cometric and metric evaluation") {
    ManifoldSpec h2 = make_h2();
    std::vector<double> p = {1.1, 0.4};
    SquareMatrix G = cometric_at(h2, p);
    CHECK(G.at(0, 0) == -1.0);
    CHECK(G.at(1, 1) == 1.0);
    CHECK(G.at(0, 1) == 0.0);

    SquareMatrix g = metric_at(h2, p);
    CHECK(g.at(0, 0) == doctest::Approx(-1.0));
    CHECK(g.at(1, 1) == doctest::Approx(1.0));

    ManifoldSpec s2 = make_s2();
    std::vector<double> eq = {M_PI / 2, 0.3};
    SquareMatrix Gs = cometric_at(s2, eq);
    CHECK(Gs.at(0, 0) == doctest::Approx(1.0));
    CHECK(Gs.at(1, 1) == doctest::Approx(1.0));

    // Coordinate singularity: 1/sin^2(0) blows up.
    CHECK_THROWS_AS(cometric_at(s2, std::vector<double>{0.0, 0.3}), Error);
}

TEST_CASE("metric inversion handles scaling and rejects degeneracy") {
    ManifoldSpec m = ManifoldSpec::Builder("diag", 2, 0, {"a", "b"})
                         .cometric(0, 0, "1")
                         .cometric(1, 1, "0.25")
                         .build();
    std::vector<double> p = {0.0, 0.0};
    SquareMatrix g = metric_at(m, p);
    CHECK(g.at(0, 0) == doctest::Approx(1.0));
    CHECK(g.at(1, 1) == doctest::Approx(4.0));

    ManifoldSpec zero = ManifoldSpec::Builder("zero", 2, 0, {"a", "b"})
                            .cometric(0, 0, "0")
                            .cometric(1, 1, "0")
                            .build();
    try {
        metric_at(zero, p);
        FAIL("expected SingularCometric");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularCometric);
    }
}

TEST_CASE("bivector assembly is exactly antisymmetric") {
    ManifoldSpec h2 = make_h2();  // Pi^12 = c x1, c = 2
    std::vector<double> p = {3.0, 0.0};
    SquareMatrix P = bivector_at(h2, p);
    CHECK(P.at(0, 1) == 6.0);
    CHECK(P.at(1, 0) == -6.0);
    CHECK(P.at(0, 0) == 0.0);
    CHECK(P.at(1, 1) == 0.0);

    ManifoldSpec s2 = make_s2();  // constant Pi
    for (auto& q : box_points(s2, 5)) {
        SquareMatrix Ps = bivector_at(s2, q);
        CHECK(Ps.at(0, 1) == 0.7);
        CHECK(Ps.at(1, 0) == -0.7);
    }
}

TEST_CASE("builder rejects malformed tables") {
    ManifoldSpec::Builder b("bad", 2, 0, {"a", "b"});
    CHECK_THROWS_AS(b.bivector(1, 0, "1"), Error);   // lower triangle
    CHECK_THROWS_AS(b.bivector(0, 0, "1"), Error);   // diagonal
    CHECK_THROWS_AS(b.cometric(1, 0, "1"), Error);   // lower triangle
    ManifoldSpec::Builder missing("bad2", 2, 0, {"a", "b"});
    missing.cometric(0, 0, "1");
    CHECK_THROWS_AS(missing.build(), Error);         // missing diagonal entry
    CHECK_THROWS_AS(ManifoldSpec::Builder("dup", 2, 0, {"a", "a"}), Error);
}

TEST_CASE("anchor satisfies eta(sharp(omega)) = Pi(omega, eta)") {
    ManifoldSpec h2 = make_h2();
    std::vector<double> p = {3.0, 0.2};

    auto x = anchor(h2, p, coordinate_form(h2, 0));
    CHECK(x[0] == 0.0);
    CHECK(x[1] == 6.0);
    auto y = anchor(h2, p, coordinate_form(h2, 1));
    CHECK(y[0] == -6.0);
    CHECK(y[1] == 0.0);

    // Duality against the bivector for random covectors.
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> d(-2, 2);
    for (auto& q : box_points(h2, 100)) {
        CoVector omega = cov({d(rng), d(rng)});
        CoVector eta = cov({d(rng), d(rng)});
        auto X = anchor(h2, q, omega);
        double lhs = eta[0] * X[0] + eta[1] * X[1];
        double rhs = bivector_pairing(h2, q, omega, eta);
        CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1 + std::fabs(rhs)));
    }

    ManifoldSpec flat = make_r2("0");
    auto z = anchor(flat, std::vector<double>{1.0, 0.0}, cov({1.0, 1.0}));
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
}

TEST_CASE("J endomorphism reproduces the hyperbolic-chart identities") {
    ManifoldSpec h2 = make_h2();
    for (auto& p : box_points(h2, 10)) {
        double pi12 = 2.0 * p[0];
        CoVector j1 = j_endomorphism(h2, p, coordinate_form(h2, 0));
        CHECK(rel_close(j1[0], 0.0, 1e-14));
        CHECK(rel_close(j1[1], pi12, 1e-14));
        CoVector j2 = j_endomorphism(h2, p, coordinate_form(h2, 1));
        CHECK(rel_close(j2[0], pi12, 1e-14));
        CHECK(rel_close(j2[1], 0.0, 1e-14));
    }

    ManifoldSpec flat = make_r2("0");
    CoVector j = j_endomorphism(flat, std::vector<double>{1.0, 0.1}, cov({0.3, -0.4}));
    CHECK(j[0] == 0.0);
    CHECK(j[1] == 0.0);
}

TEST_CASE("J is antisymmetric for the cometric") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> d(-2, 2);
    for (ManifoldSpec spec : {make_h2(), make_e2(), make_s2("theta + 2*phi")}) {
        for (auto& p : box_points(spec, 30)) {
            CoVector omega = cov({d(rng), d(rng)});
            CoVector eta = cov({d(rng), d(rng)});
            double a = pairing(spec, p, j_endomorphism(spec, p, omega), eta);
            double b = pairing(spec, p, omega, j_endomorphism(spec, p, eta));
            CHECK(std::fabs(a + b) <= 1e-12 * (1 + std::fabs(a)));
            // and Pi(omega, eta) = g(J omega, eta)
            double c = bivector_pairing(spec, p, omega, eta);
            CHECK(rel_close(a, c, 1e-12));
        }
    }
}

TEST_CASE("metric times cometric is the identity") {
    for (ManifoldSpec spec : {make_h2(), make_s2(), make_m3()}) {
        for (auto& p : box_points(spec, 30)) {
            SquareMatrix G = cometric_at(spec, p);
            SquareMatrix g = metric_at(spec, p);
            for (int i = 0; i < spec.dim(); ++i) {
                for (int j = 0; j < spec.dim(); ++j) {
                    double acc = 0;
                    for (int l = 0; l < spec.dim(); ++l) acc += g.at(i, l) * G.at(l, j);
                    CHECK(std::fabs(acc - (i == j ? 1.0 : 0.0)) <= 1e-10);
                }
            }
        }
    }
}

TEST_CASE("causal classification on the hyperbolic chart") {
    ManifoldSpec h2 = make_h2();
    std::vector<double> p = {1.0, 0.0};
    CHECK(causal_type(h2, p, coordinate_form(h2, 0)) == CausalType::Timelike);
    CHECK(causal_type(h2, p, coordinate_form(h2, 1)) == CausalType::Spacelike);
    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(causal_type(h2, p, cov({inv_sqrt2, inv_sqrt2})) == CausalType::Lightlike);
}

TEST_CASE("signature validation catches a wrong declared index") {
    ManifoldSpec wrong = ManifoldSpec::Builder("wrong", 2, 1, {"a", "b"})
                             .cometric(0, 0, "1")
                             .cometric(1, 1, "1")
                             .build();
    CHECK_THROWS_AS(check_signature_at(wrong, std::vector<double>{0.0, 0.0}), Error);
    ManifoldSpec right = make_h2();
    for (auto& p : box_points(right, 20)) check_signature_at(right, p);
    ManifoldSpec m3 = make_m3();
    for (auto& p : box_points(m3, 20)) check_signature_at(m3, p);
}

TEST_CASE("Jacobi validation") {
    // Any 2-dimensional bivector is Poisson.
    ManifoldSpec h2 = make_h2("c*x1 + sin(x2)*x1^2");
    PoissonReport r2d = validate_poisson(h2, box_points(h2, 25), 1e-10);
    CHECK(r2d.pass);
    CHECK(r2d.worst_residual <= 1e-12);

    // The dim-3 counterexample has residual exactly 1.
    ManifoldSpec bad = make_jacobi_fail();
    PoissonReport rbad = validate_poisson(bad, box_points(bad, 25), 1e-10);
    CHECK_FALSE(rbad.pass);
    CHECK(rbad.worst_residual == doctest::Approx(1.0).epsilon(1e-12));

    // Constant bivector in dim 3 passes.
    ManifoldSpec constant = ManifoldSpec::Builder("C3", 3, 0, {"x1", "x2", "x3"})
                                .cometric(0, 0, "1")
                                .cometric(1, 1, "1")
                                .cometric(2, 2, "1")
                                .bivector(0, 1, "2")
                                .bivector(0, 2, "-1")
                                .bivector(1, 2, "0.5")
                                .build();
    CHECK(validate_poisson(constant, box_points(constant, 25), 1e-12).pass);

    CHECK_THROWS_AS(validate_poisson(h2, {}, 1e-10), Error);
}

TEST_CASE("Casimir detection") {
    ManifoldSpec h2 = make_h2();
    auto pts = box_points(h2, 30);
    ScalarExpr constant = parse_expr("3.5", h2.coords(), h2.params().names());
    CHECK(is_casimir(h2, constant, pts, 1e-10));

    ScalarExpr x1 = parse_expr("x1", h2.coords(), h2.params().names());
    CHECK_FALSE(is_casimir(h2, x1, pts, 1e-10));  // box avoids x1 = 0

    ManifoldSpec flat = make_r2("0");
    ScalarExpr any = parse_expr("u1^2 + sin(u2)", flat.coords(), flat.params().names());
    CHECK(is_casimir(flat, any, box_points(flat, 20), 1e-12));
}

TEST_CASE("Koszul bracket of coordinate forms is d Pi^{ij}") {
    ManifoldSpec h2 = make_h2();  // Pi^12 = c x1, c = 2
    CoVectorField br =
        koszul_bracket(h2, coordinate_form_field(h2, 0), coordinate_form_field(h2, 1));
    for (auto& p : box_points(h2, 10)) {
        CoVector v = br.at(p, h2.params());
        CHECK(rel_close(v[0], 2.0, 1e-14));  // d(c x1) = c dx1
        CHECK(rel_close(v[1], 0.0, 1e-14));
    }

    // [omega, omega] = 0 for an expression-valued field.
    CoVectorField omega(2);
    omega.c[0] = parse_expr("x2^2", h2.coords(), h2.params().names());
    omega.c[1] = parse_expr("sin(x1)", h2.coords(), h2.params().names());
    CoVectorField self = koszul_bracket(h2, omega, omega);
    for (auto& p : box_points(h2, 10)) {
        CoVector v = self.at(p, h2.params());
        CHECK(std::fabs(v[0]) <= 1e-13);
        CHECK(std::fabs(v[1]) <= 1e-13);
    }
}

TEST_CASE("Koszul bracket is anchor-compatible on Poisson charts") {
    // sharp([omega,eta]) = [sharp omega, sharp eta] as vector fields; the
    // right side is expanded symbolically through the anchor components.
    for (ManifoldSpec spec : {make_h2("c*x1 + x2^2"), make_m3()}) {
        const int k = spec.dim();
        std::mt19937_64 rng(7321);
        std::uniform_real_distribution<double> d(-1.5, 1.5);
        CoVectorField omega(k), eta(k);
        for (int i = 0; i < k; ++i) {
            omega.c[static_cast<std::size_t>(i)] = ex_const(d(rng));
            eta.c[static_cast<std::size_t>(i)] = ex_const(d(rng));
        }
        CoVectorField bracket = koszul_bracket(spec, omega, eta);

        // Symbolic anchor components X^l = omega_i Pi^{il}.
        auto anchor_exprs = [&](const CoVectorField& w) {
            std::vector<ScalarExpr> X(static_cast<std::size_t>(k), ex_const(0));
            for (int l = 0; l < k; ++l)
                for (int i = 0; i < k; ++i)
                    X[static_cast<std::size_t>(l)] =
                        ex_add(X[static_cast<std::size_t>(l)],
                               ex_mul(w.c[static_cast<std::size_t>(i)], spec.geom().Pi(i, l)));
            return X;
        };
        auto X = anchor_exprs(omega), Y = anchor_exprs(eta), B = anchor_exprs(bracket);

        for (auto& p : box_points(spec, 40)) {
            for (int m = 0; m < k; ++m) {
                // [X,Y]^m = X^l d_l Y^m - Y^l d_l X^m
                double lie = 0;
                for (int l = 0; l < k; ++l) {
                    lie += X[static_cast<std::size_t>(l)].eval(p, spec.params()) *
                           Y[static_cast<std::size_t>(m)]
                               .differentiate(spec.coords()[l])
                               .eval(p, spec.params());
                    lie -= Y[static_cast<std::size_t>(l)].eval(p, spec.params()) *
                           X[static_cast<std::size_t>(m)]
                               .differentiate(spec.coords()[l])
                               .eval(p, spec.params());
                }
                double via_bracket = B[static_cast<std::size_t>(m)].eval(p, spec.params());
                CHECK(std::fabs(lie - via_bracket) <= 1e-9 * (1 + std::fabs(lie)));
            }
        }
    }
}

TEST_CASE("with_params rebinds parameter values") {
    ManifoldSpec h2 = make_h2();
    ParamTable t;
    t.set("c", 0.5);
    ManifoldSpec h2half = h2.with_params(t);
    std::vector<double> p = {3.0, 0.0};
    CHECK(bivector_at(h2half, p).at(0, 1) == 1.5);
    ParamTable missing;
    missing.set("q", 1.0);
    CHECK_THROWS_AS(h2.with_params(missing), Error);
}
