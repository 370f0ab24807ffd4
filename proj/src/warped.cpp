#include "pwarp/warped.hpp"

#include "pwarp/connection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace pwarp {

namespace {

std::vector<int> iota_map(int n, int offset) {
    std::vector<int> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] = i + offset;
    return m;
}

CoVector zero_cov(int n) { return CoVector(std::vector<double>(static_cast<std::size_t>(n), 0.0)); }

void axpy(CoVector& acc, double a, const CoVector& x, int offset = 0) {
    for (int i = 0; i < x.dim(); ++i) acc[offset + i] += a * x[i];
}

} // namespace

// ---------------------------------------------------------------------------
// Assembly

WarpedSpec WarpedSpec::make(ManifoldSpec base, ManifoldSpec fiber, std::string_view f_source,
                            std::string_view nu_source) {
    for (const auto& bc : base.coords())
        for (const auto& fc : fiber.coords())
            if (bc == fc)
                throw Error(ErrorKind::NameCollision,
                            "coordinate '" + bc + "' appears in both factors");
    for (auto bp : base.params().names())
        for (auto fp : fiber.params().names())
            if (bp == fp)
                throw Error(ErrorKind::NameCollision,
                            "parameter '" + std::string(bp) + "' appears in both factors");

    ScalarExpr f = normalized(parse_expr(f_source, base.coords(), base.params().names()));
    ScalarExpr nu = normalized(parse_expr(nu_source, base.coords(), base.params().names()));

    {
        PointSampler sampler(std::vector<Interval>(base.box().begin(), base.box().end()), 1);
        for (int i = 0; i < 64; ++i) {
            auto p1 = sampler.next();
            if (f.eval(p1, base.params()) <= 0.0)
                throw Error(ErrorKind::NonPositiveWarp,
                            "warping function is not positive on the base box");
        }
    }

    const int k1 = base.dim(), k2 = fiber.dim();
    const int nb = static_cast<int>(base.params().size());

    std::vector<std::string> coords(base.coords().begin(), base.coords().end());
    coords.insert(coords.end(), fiber.coords().begin(), fiber.coords().end());

    ManifoldSpec::Builder b(base.name() + "x" + fiber.name(), k1 + k2,
                            base.index() + fiber.index(), coords);
    std::vector<Interval> box(base.box().begin(), base.box().end());
    box.insert(box.end(), fiber.box().begin(), fiber.box().end());
    b.box(box);
    for (std::size_t i = 0; i < base.params().size(); ++i)
        b.param(base.params().names()[i], base.params().values()[i]);
    for (std::size_t i = 0; i < fiber.params().size(); ++i)
        b.param(fiber.params().names()[i], fiber.params().values()[i]);

    auto base_var_map = iota_map(k1, 0);
    auto base_param_map = iota_map(nb, 0);
    auto fiber_var_map = iota_map(k2, k1);
    auto fiber_param_map = iota_map(static_cast<int>(fiber.params().size()), nb);

    // Base blocks carry over unchanged.
    for (int i = 0; i < k1; ++i)
        for (int j = i; j < k1; ++j) {
            const ScalarExpr& e = base.geom().G(i, j);
            if (!e.is_zero()) b.cometric(i, j, rebind(e, base_var_map, base_param_map));
        }
    for (int i = 0; i < k1; ++i)
        for (int j = i + 1; j < k1; ++j) {
            const ScalarExpr& e = base.geom().Pi(i, j);
            if (!e.is_zero()) b.bivector(i, j, rebind(e, base_var_map, base_param_map));
        }

    // Fiber cometric scaled by 1/f^2, fiber bivector by nu.
    ScalarExpr f_sq = ex_mul(f, f);
    for (int a = 0; a < k2; ++a)
        for (int c = a; c < k2; ++c) {
            const ScalarExpr& e = fiber.geom().G(a, c);
            if (e.is_zero() && a != c) continue;
            b.cometric(k1 + a, k1 + c, ex_div(rebind(e, fiber_var_map, fiber_param_map), f_sq));
        }
    for (int a = 0; a < k2; ++a)
        for (int c = a + 1; c < k2; ++c) {
            const ScalarExpr& e = fiber.geom().Pi(a, c);
            if (!e.is_zero())
                b.bivector(k1 + a, k1 + c, ex_mul(nu, rebind(e, fiber_var_map, fiber_param_map)));
        }

    ManifoldSpec assembled = b.build();
    return WarpedSpec(std::move(base), std::move(fiber), std::move(f), std::move(nu),
                      std::move(assembled));
}

std::vector<double> WarpedSpec::base_point(std::span<const double> p) const {
    return {p.begin(), p.begin() + base_.dim()};
}

std::vector<double> WarpedSpec::fiber_point(std::span<const double> p) const {
    return {p.begin() + base_.dim(), p.end()};
}

const ManifoldSpec& assemble(const WarpedSpec& w) { return w.assembled(); }

ScalarExpr lift_scalar(const WarpedSpec& w, const ScalarExpr& e, LiftPart part) {
    const int k1 = w.base().dim(), k2 = w.fiber().dim();
    const int nb = static_cast<int>(w.base().params().size());
    const int nf = static_cast<int>(w.fiber().params().size());
    if (part == LiftPart::Horizontal)
        return rebind(e, iota_map(k1, 0), iota_map(nb, 0));
    return rebind(e, iota_map(k2, k1), iota_map(nf, nb));
}

CoVectorField lift_field(const WarpedSpec& w, const CoVectorField& field, LiftPart part) {
    const int k1 = w.base().dim(), k2 = w.fiber().dim();
    CoVectorField out(k1 + k2);
    if (part == LiftPart::Horizontal) {
        for (int i = 0; i < k1; ++i)
            out.c[static_cast<std::size_t>(i)] =
                lift_scalar(w, field.c[static_cast<std::size_t>(i)], part);
    } else {
        for (int a = 0; a < k2; ++a)
            out.c[static_cast<std::size_t>(k1 + a)] =
                lift_scalar(w, field.c[static_cast<std::size_t>(a)], part);
    }
    return out;
}

CoVectorField lift_field(const WarpedSpec& w, const LiftedForm& form) {
    return lift_field(w, form.components, form.part);
}

CoVector lift_covector(const WarpedSpec& w, const CoVector& v, LiftPart part) {
    const int k1 = w.base().dim(), k2 = w.fiber().dim();
    CoVector out = zero_cov(k1 + k2);
    axpy(out, 1.0, v, part == LiftPart::Horizontal ? 0 : k1);
    return out;
}

// ---------------------------------------------------------------------------
// Factor-level evaluation context

namespace {

// Numeric quantities reused by every closed form at one product point.
struct Ctx {
    const WarpedSpec& w;
    std::vector<double> p1, p2;
    double f, nu;
    CoVector df1, jdf1, dnu;           // at p1, base chart
    CoVectorField jdf1_field, dnu_field;

    explicit Ctx(const WarpedSpec& w_, std::span<const double> p) : w(w_) {
        p1 = w.base_point(p);
        p2 = w.fiber_point(p);
        f = w.f().eval(p1, w.base().params());
        nu = w.nu().eval(p1, w.base().params());
        CoVectorField df_field = differential(w.base(), w.f());
        df1 = df_field.at(p1, w.base().params());
        jdf1_field = j_field(w.base(), df_field);
        jdf1 = jdf1_field.at(p1, w.base().params());
        dnu_field = differential(w.base(), w.nu());
        dnu = dnu_field.at(p1, w.base().params());
    }

    // g1 / g2 / Pi2 pairings of field values.
    double g1(const CoVector& a, const CoVector& b) const { return pairing(w.base(), p1, a, b); }
    double g2(const CoVector& a, const CoVector& b) const { return pairing(w.fiber(), p2, a, b); }
    double pi1(const CoVector& a, const CoVector& b) const {
        return bivector_pairing(w.base(), p1, a, b);
    }
    double pi2(const CoVector& a, const CoVector& b) const {
        return bivector_pairing(w.fiber(), p2, a, b);
    }

    CoVector base_val(const CoVectorField& x) const { return x.at(p1, w.base().params()); }
    CoVector fiber_val(const CoVectorField& x) const { return x.at(p2, w.fiber().params()); }

    CoVector d_base(const CoVectorField& along, const CoVectorField& x) const {
        return base_val(contravariant_derivative(w.base(), along, x));
    }
    CoVector d_fiber(const CoVectorField& along, const CoVectorField& x) const {
        return fiber_val(contravariant_derivative(w.fiber(), along, x));
    }

    CoVector j2(const CoVector& v) const { return j_endomorphism(w.fiber(), p2, v); }
    CoVector j1(const CoVector& v) const { return j_endomorphism(w.base(), p1, v); }

    double sharp1(const CoVectorField& omega, const ScalarExpr& u) const {
        return sharp_apply(w.base(), omega, u).eval(p1, w.base().params());
    }

    CoVector lift_h(const CoVector& v) const { return lift_covector(w, v, LiftPart::Horizontal); }
    CoVector lift_v(const CoVector& v) const { return lift_covector(w, v, LiftPart::Vertical); }
};

} // namespace

// ---------------------------------------------------------------------------
// Connection closed forms

CoVector connection_cf_hh(const WarpedSpec& w, const CoVectorField& omega1,
                          const CoVectorField& gamma1, std::span<const double> p) {
    Ctx c(w, p);
    return c.lift_h(c.d_base(omega1, gamma1));
}

CoVector connection_cf_vv(const WarpedSpec& w, const CoVectorField& omega2,
                          const CoVectorField& gamma2, std::span<const double> p) {
    Ctx c(w, p);
    CoVector o2 = c.fiber_val(omega2), g2v = c.fiber_val(gamma2);
    CoVector out = zero_cov(w.assembled().dim());
    axpy(out, c.nu, c.d_fiber(omega2, gamma2), w.base().dim());
    axpy(out, 0.5 * c.pi2(o2, g2v), c.dnu, 0);
    axpy(out, -c.g2(o2, g2v) / (c.f * c.f * c.f), c.jdf1, 0);
    return out;
}

CoVector connection_cf_hv(const WarpedSpec& w, const CoVectorField& omega1,
                          const CoVectorField& gamma2, std::span<const double> p) {
    Ctx c(w, p);
    CoVector o1 = c.base_val(omega1), g2v = c.fiber_val(gamma2);
    CoVector out = zero_cov(w.assembled().dim());
    double jdf_o = c.g1(c.jdf1, o1);
    double dnu_o = c.g1(c.dnu, o1);
    axpy(out, (2.0 * jdf_o) / (2.0 * c.f), g2v, w.base().dim());
    axpy(out, -(c.f * c.f * c.f * dnu_o) / (2.0 * c.f), c.j2(g2v), w.base().dim());
    return out;
}

// ---------------------------------------------------------------------------
// Curvature closed forms

CoVector curvature_cf_hh(const WarpedSpec& w, const CoVectorField& omega1,
                         const CoVectorField& eta1, const CoVectorField& gamma1,
                         const CoVectorField& gamma2, std::span<const double> p) {
    Ctx c(w, p);
    const int k1 = w.base().dim();
    CoVector o1 = c.base_val(omega1), e1 = c.base_val(eta1);
    CoVector g2v = c.fiber_val(gamma2);

    CoVector out = zero_cov(w.assembled().dim());

    // [R1(omega1, eta1) gamma1]^h
    {
        CurvatureAtPoint R1 = curvature_at(w.base(), c.p1);
        CoVector g1v = c.base_val(gamma1);
        CoVector r = zero_cov(k1);
        for (int i = 0; i < k1; ++i)
            for (int j = 0; j < k1; ++j)
                for (int kk = 0; kk < k1; ++kk)
                    for (int m = 0; m < k1; ++m)
                        r[m] += o1[i] * e1[j] * g1v[kk] * R1.at(i, j, kk, m);
        axpy(out, 1.0, r, 0);
    }

    double d_o_jdf_e = c.g1(c.d_base(omega1, c.jdf1_field), e1);
    double d_e_jdf_o = c.g1(c.d_base(eta1, c.jdf1_field), o1);
    double do_f = c.sharp1(omega1, w.f());
    double de_f = c.sharp1(eta1, w.f());

    // (1/f)[g1(D_o J df, e) - g1(D_e J df, o)] gamma2^v
    axpy(out, (d_o_jdf_e - d_e_jdf_o) / c.f, g2v, k1);
    // (1/f^2)[D_e(f) g1(Jdf, o) - D_o(f) g1(Jdf, e)] gamma2^v
    axpy(out, (de_f * c.g1(c.jdf1, o1) - do_f * c.g1(c.jdf1, e1)) / (c.f * c.f), g2v, k1);

    CoVector j2g2 = c.j2(g2v);
    double d_e_dnu_o = c.g1(c.d_base(eta1, c.dnu_field), o1);
    double d_o_dnu_e = c.g1(c.d_base(omega1, c.dnu_field), e1);
    // (f^2/2)[g1(D_e dnu, o) - g1(D_o dnu, e)] (J2 gamma2)^v
    axpy(out, 0.5 * c.f * c.f * (d_e_dnu_o - d_o_dnu_e), j2g2, k1);
    // f [D_e(f) g1(dnu, o) - D_o(f) g1(dnu, e)] (J2 gamma2)^v
    axpy(out, c.f * (de_f * c.g1(c.dnu, o1) - do_f * c.g1(c.dnu, e1)), j2g2, k1);
    return out;
}

CoVector curvature_cf_hv_h(const WarpedSpec& w, const CoVectorField& omega1,
                           const CoVectorField& eta2, const CoVectorField& gamma1,
                           std::span<const double> p) {
    Ctx c(w, p);
    const int k1 = w.base().dim();
    CoVector o1 = c.base_val(omega1), g1v = c.base_val(gamma1);
    CoVector e2 = c.fiber_val(eta2);

    CoVector out = zero_cov(w.assembled().dim());

    // (1/f^2) g1(Jdf, o) g1(Jdf, g) eta2^v
    axpy(out, c.g1(c.jdf1, o1) * c.g1(c.jdf1, g1v) / (c.f * c.f), e2, k1);

    // g1(D_o (Jdf / f), g) eta2^v
    {
        CoVectorField jdf_over_f(w.base().dim());
        for (int m = 0; m < w.base().dim(); ++m)
            jdf_over_f.c[static_cast<std::size_t>(m)] =
                ex_div(c.jdf1_field.c[static_cast<std::size_t>(m)], w.f());
        axpy(out, c.g1(c.d_base(omega1, jdf_over_f), g1v), e2, k1);
    }

    CoVector j2e2 = c.j2(e2);
    // -(f/2)[g1(dnu,o) g1(Jdf,g) + g1(Jdf,o) g1(dnu,g)] (J2 eta2)^v
    axpy(out,
         -0.5 * c.f *
             (c.g1(c.dnu, o1) * c.g1(c.jdf1, g1v) + c.g1(c.jdf1, o1) * c.g1(c.dnu, g1v)),
         j2e2, k1);

    // -g1(D_o (f^2 dnu / 2), g) (J2 eta2)^v
    {
        ScalarExpr half_f2 = ex_mul(ex_const(0.5), ex_mul(w.f(), w.f()));
        CoVectorField scaled(w.base().dim());
        for (int m = 0; m < w.base().dim(); ++m)
            scaled.c[static_cast<std::size_t>(m)] =
                ex_mul(half_f2, c.dnu_field.c[static_cast<std::size_t>(m)]);
        axpy(out, -c.g1(c.d_base(omega1, scaled), g1v), j2e2, k1);
    }

    // (f^4/4) g1(dnu,o) g1(dnu,g) (J2^2 eta2)^v
    axpy(out, 0.25 * std::pow(c.f, 4) * c.g1(c.dnu, o1) * c.g1(c.dnu, g1v), c.j2(j2e2), k1);
    return out;
}

CoVector curvature_cf_hv_v(const WarpedSpec& w, const CoVectorField& omega1,
                           const CoVectorField& eta2, const CoVectorField& gamma2,
                           std::span<const double> p) {
    Ctx c(w, p);
    const int k1 = w.base().dim();
    CoVector o1 = c.base_val(omega1);
    CoVector e2 = c.fiber_val(eta2), g2v = c.fiber_val(gamma2);

    CoVector out = zero_cov(w.assembled().dim());

    // -(1/f^3) g2(e,g) (D_o J df)^h
    axpy(out, -c.g2(e2, g2v) / (c.f * c.f * c.f), c.d_base(omega1, c.jdf1_field), 0);

    // -Pi1(dnu, o) (D_e g)^v
    axpy(out, -c.pi1(c.dnu, o1), c.d_fiber(eta2, gamma2), k1);

    double f3_dnu_o = c.f * c.f * c.f * c.g1(c.dnu, o1);
    // -(1/(2 f^4)) [ f^3 g1(dnu,o) g2(J2 g, e) + 4 g1(Jdf,o) g2(e,g) ] (J df)^h
    axpy(out,
         -(f3_dnu_o * c.g2(c.j2(g2v), e2) + 4.0 * c.g1(c.jdf1, o1) * c.g2(e2, g2v)) /
             (2.0 * std::pow(c.f, 4)),
         c.jdf1, 0);

    // +(1/2)[ nu f^2 g1(dnu,o) {D_e J2 g - J2 D_e g}^v + Pi2(e,g) (D_o dnu)^h ]
    {
        CoVectorField j2g_field = j_field(w.fiber(), gamma2);
        CoVector d_e_j2g = c.d_fiber(eta2, j2g_field);
        CoVector j2_d_e_g = c.j2(c.d_fiber(eta2, gamma2));
        CoVector brace = zero_cov(w.fiber().dim());
        axpy(brace, 1.0, d_e_j2g, 0);
        axpy(brace, -1.0, j2_d_e_g, 0);
        axpy(out, 0.5 * c.nu * c.f * c.f * c.g1(c.dnu, o1), brace, k1);
        axpy(out, 0.5 * c.pi2(e2, g2v), c.d_base(omega1, c.dnu_field), 0);
    }

    // +(1/(4f)) [ f^3 g1(dnu,o) Pi2(e, J2 g) - 2 g1(Jdf,o) Pi2(e,g) ] (dnu)^h
    axpy(out,
         (f3_dnu_o * c.pi2(e2, c.j2(g2v)) - 2.0 * c.g1(c.jdf1, o1) * c.pi2(e2, g2v)) /
             (4.0 * c.f),
         c.dnu, 0);
    return out;
}

CoVector curvature_cf_vv_h(const WarpedSpec& w, const CoVectorField& omega2,
                           const CoVectorField& eta2, const CoVectorField& gamma1,
                           std::span<const double> p) {
    Ctx c(w, p);
    const int k1 = w.base().dim();
    CoVector o2 = c.fiber_val(omega2), e2 = c.fiber_val(eta2);
    CoVector g1v = c.base_val(gamma1);

    CoVector out = zero_cov(w.assembled().dim());

    // (1/f) Pi2(o,e) [ g1(Jdf,g) dnu - g1(dnu,g) Jdf - f D_{dnu} g ]^h
    {
        CoVector bracket = zero_cov(k1);
        axpy(bracket, c.g1(c.jdf1, g1v), c.dnu, 0);
        axpy(bracket, -c.g1(c.dnu, g1v), c.jdf1, 0);
        axpy(bracket, -c.f, c.d_base(c.dnu_field, gamma1), 0);
        axpy(out, c.pi2(o2, e2) / c.f, bracket, 0);
    }

    // (f^2 nu g1(dnu,g)/2) [ D_e(J2 o) - D_o(J2 e) + J2 [o,e]_{Pi2} ]^v
    {
        CoVectorField j2o_field = j_field(w.fiber(), omega2);
        CoVectorField j2e_field = j_field(w.fiber(), eta2);
        CoVector term = zero_cov(w.fiber().dim());
        axpy(term, 1.0, c.d_fiber(eta2, j2o_field), 0);
        axpy(term, -1.0, c.d_fiber(omega2, j2e_field), 0);
        CoVector br = c.fiber_val(koszul_bracket(w.fiber(), omega2, eta2));
        axpy(term, 1.0, c.j2(br), 0);
        axpy(out, 0.5 * c.f * c.f * c.nu * c.g1(c.dnu, g1v), term, k1);
    }
    return out;
}

CoVector curvature_cf_vv_v(const WarpedSpec& w, const CoVectorField& omega2,
                           const CoVectorField& eta2, const CoVectorField& gamma2,
                           std::span<const double> p) {
    Ctx c(w, p);
    const int k1 = w.base().dim();
    const int k2 = w.fiber().dim();
    CoVector o2 = c.fiber_val(omega2), e2 = c.fiber_val(eta2), g2v = c.fiber_val(gamma2);

    CoVector out = zero_cov(w.assembled().dim());

    // nu^2 [R2(o,e)g]^v
    {
        CurvatureAtPoint R2 = curvature_at(w.fiber(), c.p2);
        CoVector r = zero_cov(k2);
        for (int i = 0; i < k2; ++i)
            for (int j = 0; j < k2; ++j)
                for (int kk = 0; kk < k2; ++kk)
                    for (int m = 0; m < k2; ++m)
                        r[m] += o2[i] * e2[j] * g2v[kk] * R2.at(i, j, kk, m);
        axpy(out, c.nu * c.nu, r, k1);
    }

    // (nu/2) [ (D_o Pi2)(e,g) - (D_e Pi2)(o,g) ] (dnu)^h
    {
        auto d_pi2 = [&](const CoVectorField& along, const CoVectorField& a,
                         const CoVectorField& b) {
            ScalarExpr pair = bivector_pairing_expr(w.fiber(), a, b);
            double lead = sharp_apply(w.fiber(), along, pair).eval(c.p2, w.fiber().params());
            CoVector da = c.d_fiber(along, a);
            CoVector db = c.d_fiber(along, b);
            return lead - c.pi2(da, c.fiber_val(b)) - c.pi2(c.fiber_val(a), db);
        };
        double bracket = d_pi2(omega2, eta2, gamma2) - d_pi2(eta2, omega2, gamma2);
        axpy(out, 0.5 * c.nu * bracket, c.dnu, 0);
    }

    double norm_dnu = c.g1(c.dnu, c.dnu);
    double norm_jdf = c.g1(c.jdf1, c.jdf1);
    double dnu_jdf = c.g1(c.dnu, c.jdf1);

    // (f^2 ||dnu||^2 / 4) [ J2{ Pi2(o,g) e - Pi2(e,g) o + 2 Pi2(o,e) g } ]^v
    {
        CoVector combo = zero_cov(k2);
        axpy(combo, c.pi2(o2, g2v), e2, 0);
        axpy(combo, -c.pi2(e2, g2v), o2, 0);
        axpy(combo, 2.0 * c.pi2(o2, e2), g2v, 0);
        axpy(out, 0.25 * c.f * c.f * norm_dnu, c.j2(combo), k1);
    }

    // (||Jdf||^2 / f^4) [ g2(o,g) e - g2(e,g) o ]^v
    {
        CoVector combo = zero_cov(k2);
        axpy(combo, c.g2(o2, g2v), e2, 0);
        axpy(combo, -c.g2(e2, g2v), o2, 0);
        axpy(out, norm_jdf / std::pow(c.f, 4), combo, k1);
    }

    // (g1(dnu,Jdf)/(2f)) [ Pi2(e,g) o - Pi2(o,g) e - 2 Pi2(o,e) g ]^v
    {
        CoVector combo = zero_cov(k2);
        axpy(combo, c.pi2(e2, g2v), o2, 0);
        axpy(combo, -c.pi2(o2, g2v), e2, 0);
        axpy(combo, -2.0 * c.pi2(o2, e2), g2v, 0);
        axpy(out, dnu_jdf / (2.0 * c.f), combo, k1);
    }

    // (g1(dnu,Jdf)/(2f)) [ J2{ g2(e,g) o - g2(o,g) e } ]^v
    {
        CoVector combo = zero_cov(k2);
        axpy(combo, c.g2(e2, g2v), o2, 0);
        axpy(combo, -c.g2(o2, g2v), e2, 0);
        axpy(out, dnu_jdf / (2.0 * c.f), c.j2(combo), k1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sectional closed forms

double sectional_closed_form(const WarpedSpec& w, std::span<const double> p, PlaneCase which,
                             const CoVector& first, const CoVector& second) {
    Ctx c(w, p);
    switch (which) {
        case PlaneCase::HH:
            return sectional(w.base(), c.p1, first, second);
        case PlaneCase::HV: {
            const CoVector& o1 = first;
            const CoVector& e2 = second;
            double goo = c.g1(o1, o1);
            double gee = c.g2(e2, e2);
            if (std::fabs(goo) < 1e-14 || std::fabs(gee) < 1e-14)
                throw Error(ErrorKind::DegeneratePlane, "null lifted plane in mixed case");
            CoVector d_o_jdf = c.d_base(constant_field(o1), c.jdf1_field);
            CoVector j2e = c.j2(e2);
            double t1 = -c.g1(d_o_jdf, o1) / (c.f * goo);
            double jo = c.g1(c.jdf1, o1);
            double t2 = -2.0 * jo * jo / (c.f * c.f * goo);
            double dn = c.g1(c.dnu, o1);
            double t3 = c.g2(j2e, j2e) * std::pow(c.f * c.f * dn, 2) / (4.0 * goo * gee);
            return t1 + t2 + t3;
        }
        case PlaneCase::VV: {
            const CoVector& o2 = first;
            const CoVector& e2 = second;
            double goo = c.g2(o2, o2), gee = c.g2(e2, e2), goe = c.g2(o2, e2);
            double denom = goo * gee - goe * goe;
            if (std::fabs(denom) < 1e-14)
                throw Error(ErrorKind::DegeneratePlane, "degenerate fiber plane");
            double K2 = sectional(w.fiber(), c.p2, o2, e2);
            double norm_jdf = c.g1(c.jdf1, c.jdf1);
            double norm_dnu = c.g1(c.dnu, c.dnu);
            double j2oe = c.g2(c.j2(o2), e2);
            double mix = 3.0 * std::pow(c.f, 4) * norm_dnu * j2oe * j2oe +
                         4.0 * c.f * c.g1(c.dnu, c.jdf1) * goe * j2oe;
            return c.nu * c.nu * c.f * c.f * K2 - norm_jdf / (c.f * c.f) - mix / (4.0 * denom);
        }
    }
    throw Error(ErrorKind::Usage, "unknown plane case");
}

// ---------------------------------------------------------------------------
// Laplacian split and qualar closed form

double laplacian_split(const WarpedSpec& w, const ScalarExpr& u1, const ScalarExpr& u2,
                       std::span<const double> p) {
    Ctx c(w, p);
    const int k2 = w.fiber().dim();
    const int q2 = w.fiber().index();
    double base_term = laplacian(w.base(), u1, c.p1);
    CoVector du1 = differential(w.base(), u1).at(c.p1, w.base().params());
    CoVector jdu1 = c.j1(du1);
    double mid = (static_cast<double>(k2) - 2.0 * q2) / c.f * c.g1(c.jdf1, jdu1);
    double fiber_term = std::pow(c.nu * c.f, 2) * laplacian(w.fiber(), u2, c.p2);
    return base_term + mid + fiber_term;
}

QualarResult qualar_closed_form(const WarpedSpec& w, std::span<const double> p) {
    Ctx c(w, p);
    const int k1 = w.base().dim(), k2 = w.fiber().dim();
    const int q1 = w.base().index(), q2 = w.fiber().index();

    QualarResult res;
    if (q1 + q2 == 0 || q1 + q2 == k1 + k2) {
        res.empty_signature_range = true;
        return res;
    }

    OrthonormalCoframe bf = orthonormal_coframe(w.base(), c.p1);
    OrthonormalCoframe ff = orthonormal_coframe(w.fiber(), c.p2);

    double Q1 = qualar(w.base(), c.p1).value;
    double Q2 = qualar(w.fiber(), c.p2).value;

    // Base-coframe contractions of J df and dnu, and the Hessian-type terms
    // H~_a = g1(D_{theta^a} J df, theta^a).
    std::vector<double> ja(static_cast<std::size_t>(k1)), na(static_cast<std::size_t>(k1)),
        ha(static_cast<std::size_t>(k1));
    for (int a = 0; a < k1; ++a) {
        const CoVector& th = bf.rows[static_cast<std::size_t>(a)];
        ja[static_cast<std::size_t>(a)] = c.g1(c.jdf1, th);
        na[static_cast<std::size_t>(a)] = c.g1(c.dnu, th);
        ha[static_cast<std::size_t>(a)] = c.g1(c.d_base(constant_field(th), c.jdf1_field), th);
    }
    // Fiber-coframe J2 norms and bivector pairings.
    std::vector<double> wb(static_cast<std::size_t>(k2));
    for (int b = 0; b < k2; ++b) {
        CoVector j2b = c.j2(ff.rows[static_cast<std::size_t>(b)]);
        wb[static_cast<std::size_t>(b)] = c.g2(j2b, j2b);
    }

    double pi2_sq_sum = 0.0;
    for (int b = 0; b < q2; ++b)
        for (int s = q2; s < k2; ++s) {
            double v = c.pi2(ff.rows[static_cast<std::size_t>(b)], ff.rows[static_cast<std::size_t>(s)]);
            pi2_sq_sum += v * v;
        }

    double sum_h = 0.0, sum_h_time = 0.0, sum_j2 = 0.0, sum_j2_time = 0.0;
    double sum_n2_time = 0.0, sum_n2_space = 0.0;
    for (int a = 0; a < k1; ++a) {
        sum_h += ha[static_cast<std::size_t>(a)];
        sum_j2 += ja[static_cast<std::size_t>(a)] * ja[static_cast<std::size_t>(a)];
        if (a < q1) {
            sum_h_time += ha[static_cast<std::size_t>(a)];
            sum_j2_time += ja[static_cast<std::size_t>(a)] * ja[static_cast<std::size_t>(a)];
            sum_n2_time += na[static_cast<std::size_t>(a)] * na[static_cast<std::size_t>(a)];
        } else {
            sum_n2_space += na[static_cast<std::size_t>(a)] * na[static_cast<std::size_t>(a)];
        }
    }
    double sum_w_space = 0.0, sum_w_time = 0.0;
    for (int b = 0; b < k2; ++b) {
        if (b < q2)
            sum_w_time += wb[static_cast<std::size_t>(b)];
        else
            sum_w_space += wb[static_cast<std::size_t>(b)];
    }

    double norm_dnu = c.g1(c.dnu, c.dnu);
    double norm_jdf = c.g1(c.jdf1, c.jdf1);
    double f = c.f;
    double f2 = f * f, f4 = f2 * f2;

    double Q = Q1 + f2 * c.nu * c.nu * Q2;
    Q += 1.5 * f4 * norm_dnu * pi2_sq_sum;
    Q += -(2.0 * q2 / f) * sum_h + (2.0 * k2 / f) * sum_h_time;
    Q += -(4.0 * q2 / f2) * sum_j2 + (4.0 * k2 / f2) * sum_j2_time;
    Q += -(f4 / 2.0) * sum_n2_time * sum_w_space - (f4 / 2.0) * sum_n2_space * sum_w_time;
    Q += -(2.0 * q2 * (k2 - q2) / f2) * norm_jdf;

    res.value = Q;
    return res;
}

// ---------------------------------------------------------------------------
// Null sectional relations (four lightlike combinations)

std::vector<NullRelation> null_sectional_relations(const WarpedSpec& w, std::span<const double> p,
                                                   NullCase which) {
    Ctx c(w, p);
    const ManifoldSpec& M = w.assembled();
    const int k1 = w.base().dim(), k2 = w.fiber().dim();
    const int q1 = w.base().index(), q2 = w.fiber().index();

    OrthonormalCoframe bf = orthonormal_coframe(w.base(), c.p1);
    OrthonormalCoframe ff = orthonormal_coframe(w.fiber(), c.p2);

    // Unit product-coframe elements and their unweighted lifts.
    auto unit_base = [&](int a) { return c.lift_h(bf.rows[static_cast<std::size_t>(a)]); };
    auto raw_fiber = [&](int b) { return c.lift_v(ff.rows[static_cast<std::size_t>(b)]); };
    auto unit_fiber = [&](int b) {
        CoVector v = raw_fiber(b);
        for (int m = 0; m < v.dim(); ++m) v[m] *= c.f;
        return v;
    };

    SquareMatrix G = cometric_at(M, p);
    CurvatureAtPoint R = curvature_at(M, p);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    std::vector<NullRelation> out;

    // Builds both sides for timelike/spacelike constituents (t, s) and the
    // direction eta_l.  raw_* are the unweighted coordinate-form lifts and
    // fpow the power of f that restores the unit normalization in the
    // curvature term.
    auto emit = [&](int i, int s, int l, bool l_fiber, const CoVector& unit_t,
                    const CoVector& unit_s, const CoVector& raw_t, const CoVector& raw_s,
                    const CoVector& unit_l, const CoVector& raw_l, int fpow, int eps_l) {
        CoVector xi = zero_cov(M.dim());
        axpy(xi, inv_sqrt2, unit_t, 0);
        axpy(xi, inv_sqrt2, unit_s, 0);

        NullRelation rel;
        rel.which = which;
        rel.i = i;
        rel.s = s;
        rel.l = l;
        rel.l_in_fiber = l_fiber;
        rel.lhs = null_sectional(M, p, xi, unit_l);

        double k_t = sectional(M, p, raw_t, raw_l);
        double k_s = sectional(M, p, raw_s, raw_l);
        double curv = curvature_pairing(R, G, raw_t, raw_l, raw_l, raw_s);
        rel.rhs = -0.5 * k_t + 0.5 * k_s + eps_l * std::pow(c.f, fpow) * curv;
        out.push_back(rel);
    };

    auto directions = [&](int skip_base, int skip_fiber, auto&& fn) {
        for (int l = 0; l < k1; ++l)
            if (l != skip_base) fn(l, false);
        for (int l = 0; l < k2; ++l)
            if (l != skip_fiber) fn(l, true);
    };

    // The timelike constituent contributes -K/2, the spacelike +K/2, and the
    // f power in the curvature term counts fiber legs among {t, l, l, s}.
    switch (which) {
        case NullCase::HH: {
            for (int i = 0; i < q1; ++i) {
                for (int s = q1; s < k1; ++s) {
                    directions(-1, -1, [&](int l, bool l_fiber) {
                        if (!l_fiber && (l == i || l == s)) return;
                        CoVector unit_l = l_fiber ? unit_fiber(l) : unit_base(l);
                        CoVector raw_l = l_fiber ? raw_fiber(l) : unit_base(l);
                        int eps = l_fiber ? ff.signs[static_cast<std::size_t>(l)]
                                          : bf.signs[static_cast<std::size_t>(l)];
                        emit(i, s, l, l_fiber, unit_base(i), unit_base(s), unit_base(i),
                             unit_base(s), unit_l, raw_l, l_fiber ? 2 : 0, eps);
                    });
                }
            }
            break;
        }
        case NullCase::HV: {
            for (int i = 0; i < q1; ++i) {
                for (int s = q2; s < k2; ++s) {
                    directions(i, s, [&](int l, bool l_fiber) {
                        CoVector unit_l = l_fiber ? unit_fiber(l) : unit_base(l);
                        CoVector raw_l = l_fiber ? raw_fiber(l) : unit_base(l);
                        int eps = l_fiber ? ff.signs[static_cast<std::size_t>(l)]
                                          : bf.signs[static_cast<std::size_t>(l)];
                        emit(i, s, l, l_fiber, unit_base(i), unit_fiber(s), unit_base(i),
                             raw_fiber(s), unit_l, raw_l, l_fiber ? 3 : 1, eps);
                    });
                }
            }
            break;
        }
        case NullCase::VH: {
            for (int i = 0; i < q2; ++i) {
                for (int s = q1; s < k1; ++s) {
                    directions(s, i, [&](int l, bool l_fiber) {
                        CoVector unit_l = l_fiber ? unit_fiber(l) : unit_base(l);
                        CoVector raw_l = l_fiber ? raw_fiber(l) : unit_base(l);
                        int eps = l_fiber ? ff.signs[static_cast<std::size_t>(l)]
                                          : bf.signs[static_cast<std::size_t>(l)];
                        emit(i, s, l, l_fiber, unit_fiber(i), unit_base(s), raw_fiber(i),
                             unit_base(s), unit_l, raw_l, l_fiber ? 3 : 1, eps);
                    });
                }
            }
            break;
        }
        case NullCase::VV: {
            for (int i = 0; i < q2; ++i) {
                for (int s = q2; s < k2; ++s) {
                    directions(-1, -1, [&](int l, bool l_fiber) {
                        if (l_fiber && (l == i || l == s)) return;
                        CoVector unit_l = l_fiber ? unit_fiber(l) : unit_base(l);
                        CoVector raw_l = l_fiber ? raw_fiber(l) : unit_base(l);
                        int eps = l_fiber ? ff.signs[static_cast<std::size_t>(l)]
                                          : bf.signs[static_cast<std::size_t>(l)];
                        emit(i, s, l, l_fiber, unit_fiber(i), unit_fiber(s), raw_fiber(i),
                             raw_fiber(s), unit_l, raw_l, l_fiber ? 4 : 2, eps);
                    });
                }
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sign-theorem sampling

namespace {

CoVector random_cov(PointSampler& sampler, int dim) {
    CoVector v = zero_cov(dim);
    for (int i = 0; i < dim; ++i) v[i] = sampler.next_scalar(-1.0, 1.0);
    return v;
}

// Sample a nondegenerate sectional curvature, retrying a few times.
bool try_sectional(const ManifoldSpec& spec, std::span<const double> p, PointSampler& sampler,
                   double& out) {
    for (int attempt = 0; attempt < 12; ++attempt) {
        CoVector a = random_cov(sampler, spec.dim());
        CoVector b = random_cov(sampler, spec.dim());
        try {
            out = sectional(spec, p, a, b);
            return true;
        } catch (const Error&) {
            continue;
        }
    }
    return false;
}

} // namespace

SignReport sign_property_check(const WarpedSpec& w, int npoints, int planes_per_point,
                               std::uint64_t seed, double tol) {
    SignReport rep;
    const ManifoldSpec& M = w.assembled();
    const int k1 = w.base().dim(), k2 = w.fiber().dim();

    std::vector<Interval> box(M.box().begin(), M.box().end());
    PointSampler sampler(box, seed);
    auto points = sampler.take(npoints);

    std::vector<std::vector<double>> base_pts, fiber_pts;
    for (auto& p : points) {
        base_pts.push_back(w.base_point(p));
        fiber_pts.push_back(w.fiber_point(p));
    }

    rep.f_casimir = is_casimir(w.base(), w.f(), base_pts, 1e-10);
    rep.base_riemannian = w.base().index() == 0;
    rep.fiber_riemannian = w.fiber().index() == 0;
    rep.product_riemannian = M.index() == 0;

    rep.nu_constant = true;
    CoVectorField dnu = differential(w.base(), w.nu());
    for (auto& p1 : base_pts) {
        CoVector v = dnu.at(p1, w.base().params());
        for (int i = 0; i < v.dim(); ++i)
            if (std::fabs(v[i]) > 1e-12) rep.nu_constant = false;
    }

    double inf = std::numeric_limits<double>::infinity();
    rep.base_min = inf, rep.base_max = -inf;
    rep.fiber_min = inf, rep.fiber_max = -inf;
    rep.product_min = inf, rep.product_max = -inf;

    for (std::size_t n = 0; n < points.size(); ++n) {
        const auto& p = points[n];
        const auto& p1 = base_pts[n];
        const auto& p2 = fiber_pts[n];
        Ctx c(w, p);
        for (int t = 0; t < planes_per_point; ++t) {
            double K;
            if (try_sectional(w.base(), p1, sampler, K)) {
                rep.base_min = std::min(rep.base_min, K);
                rep.base_max = std::max(rep.base_max, K);
            }
            if (try_sectional(w.fiber(), p2, sampler, K)) {
                rep.fiber_min = std::min(rep.fiber_min, K);
                rep.fiber_max = std::max(rep.fiber_max, K);
            }
            // hh
            CoVector a1 = random_cov(sampler, k1), b1 = random_cov(sampler, k1);
            CoVector a2 = random_cov(sampler, k2), b2 = random_cov(sampler, k2);
            struct Pair {
                CoVector u, v;
            };
            Pair lifted[3] = {
                {c.lift_h(a1), c.lift_h(b1)},
                {c.lift_h(a1), c.lift_v(a2)},
                {c.lift_v(a2), c.lift_v(b2)},
            };
            for (auto& pr : lifted) {
                try {
                    double Kp = sectional(M, p, pr.u, pr.v);
                    rep.product_min = std::min(rep.product_min, Kp);
                    rep.product_max = std::max(rep.product_max, Kp);
                    ++rep.planes_sampled;
                } catch (const Error&) {
                }
            }
            // Mixed-plane obstruction terms (the fiber-independent rows of the
            // mixed sectional formula).
            double goo = c.g1(a1, a1);
            if (std::fabs(goo) > 1e-8) {
                CoVector d_jdf = c.d_base(constant_field(a1), c.jdf1_field);
                rep.max_obstruction_hessian =
                    std::max(rep.max_obstruction_hessian, std::fabs(c.g1(d_jdf, a1) / (c.f * goo)));
                double jo = c.g1(c.jdf1, a1);
                rep.max_obstruction_jdf =
                    std::max(rep.max_obstruction_jdf, 2.0 * jo * jo / (c.f * c.f * std::fabs(goo)));
            }
        }
    }

    auto nonneg = [&](double lo) { return lo >= -tol; };
    auto nonpos = [&](double hi) { return hi <= tol; };

    bool prod_nonneg = nonneg(rep.product_min);
    bool prod_nonpos = nonpos(rep.product_max);
    bool base_nonneg = nonneg(rep.base_min), base_nonpos = nonpos(rep.base_max);
    bool fiber_nonneg = nonneg(rep.fiber_min), fiber_nonpos = nonpos(rep.fiber_max);
    rep.base_flat = base_nonneg && base_nonpos;

    {
        SignStatement s;
        s.name = "positive_product_implies_positive_factors";
        s.regime_met = rep.product_riemannian && rep.f_casimir;
        bool prod_positive = rep.product_min > tol;
        s.holds = !s.regime_met || !prod_positive ||
                  (rep.base_min > tol && rep.fiber_min > tol);
        if (!prod_positive) s.note = "antecedent not met on sample (product not strictly positive)";
        rep.statements.push_back(s);
    }
    {
        SignStatement s;
        s.name = "sign_equivalence_riemannian_casimir_constnu";
        s.regime_met = rep.product_riemannian && rep.nu_constant && rep.f_casimir;
        s.holds = !s.regime_met || ((prod_nonneg == (base_nonneg && fiber_nonneg)) &&
                                    (prod_nonpos == (base_nonpos && fiber_nonpos)));
        rep.statements.push_back(s);
    }
    {
        SignStatement s;
        s.name = "nonneg_iff_factors_nonneg_and_casimir";
        s.regime_met = rep.base_riemannian && rep.nu_constant;
        bool rhs = base_nonneg && fiber_nonneg && rep.f_casimir;
        s.holds = !s.regime_met || (prod_nonneg == rhs);
        if (s.regime_met && !rep.f_casimir && !prod_nonneg)
            s.note = "non-Casimir warp; mixed-plane obstruction terms nonzero";
        rep.statements.push_back(s);
    }
    {
        SignStatement s;
        s.name = "flat_base_nonneg_iff_fiber_nonneg";
        s.regime_met =
            rep.base_riemannian && rep.nu_constant && rep.base_flat && rep.f_casimir;
        s.holds = !s.regime_met || (prod_nonneg == fiber_nonneg);
        rep.statements.push_back(s);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Cross-check driver

namespace {

double rel_residual(const CoVector& a, const CoVector& b) {
    double diff = 0, scale = 0;
    for (int i = 0; i < a.dim(); ++i) {
        diff = std::max(diff, std::fabs(a[i] - b[i]));
        scale = std::max({scale, std::fabs(a[i]), std::fabs(b[i])});
    }
    return diff / (1.0 + scale);
}

double rel_residual(double a, double b) {
    return std::fabs(a - b) / (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

struct Harness {
    const WarpedSpec& w;
    PointSampler sampler;
    std::vector<std::vector<double>> points;
    VerifyReport& report;
    double tol;

    Harness(const WarpedSpec& w_, int npoints, std::uint64_t seed, VerifyReport& rep, double t)
        : w(w_), sampler(std::vector<Interval>(w_.assembled().box().begin(),
                                               w_.assembled().box().end()),
                         seed),
          report(rep), tol(t) {
        points = sampler.take(npoints);
    }

    CoVectorField rand_field(int dim) {
        CoVectorField f(dim);
        for (int i = 0; i < dim; ++i)
            f.c[static_cast<std::size_t>(i)] = ex_const(sampler.next_scalar(-1.0, 1.0));
        return f;
    }

    void record(const std::string& name, double residual, double tolerance,
                const std::string& note = "") {
        VerifyCase c;
        c.name = name;
        c.max_residual = residual;
        c.tol = tolerance;
        c.pass = residual <= tolerance;
        c.note = note;
        report.cases.push_back(c);
        if (!c.pass) report.pass = false;
    }
};

void verify_connection(Harness& h) {
    const WarpedSpec& w = h.w;
    const ManifoldSpec& M = w.assembled();
    double r_hh = 0, r_vv = 0, r_hv = 0, r_hv_sym = 0;
    for (const auto& p : h.points) {
        CoVectorField o1 = h.rand_field(w.base().dim());
        CoVectorField g1 = h.rand_field(w.base().dim());
        CoVectorField o2 = h.rand_field(w.fiber().dim());
        CoVectorField g2 = h.rand_field(w.fiber().dim());

        CoVectorField o1h = lift_field(w, o1, LiftPart::Horizontal);
        CoVectorField g1h = lift_field(w, g1, LiftPart::Horizontal);
        CoVectorField o2v = lift_field(w, o2, LiftPart::Vertical);
        CoVectorField g2v = lift_field(w, g2, LiftPart::Vertical);

        CoVector direct_hh = contravariant_derivative(M, o1h, g1h).at(p, M.params());
        r_hh = std::max(r_hh, rel_residual(direct_hh, connection_cf_hh(w, o1, g1, p)));

        CoVector direct_vv = contravariant_derivative(M, o2v, g2v).at(p, M.params());
        r_vv = std::max(r_vv, rel_residual(direct_vv, connection_cf_vv(w, o2, g2, p)));

        CoVector direct_hv = contravariant_derivative(M, o1h, g2v).at(p, M.params());
        CoVector cf_hv = connection_cf_hv(w, o1, g2, p);
        r_hv = std::max(r_hv, rel_residual(direct_hv, cf_hv));

        CoVector direct_vh = contravariant_derivative(M, g2v, o1h).at(p, M.params());
        r_hv_sym = std::max(r_hv_sym, rel_residual(direct_vh, cf_hv));
    }
    h.record("connection.hh", r_hh, h.tol);
    h.record("connection.vv", r_vv, h.tol);
    h.record("connection.hv", r_hv, h.tol);
    h.record("connection.hv_commuted", r_hv_sym, h.tol);
}

void verify_curvature(Harness& h) {
    const WarpedSpec& w = h.w;
    const ManifoldSpec& M = w.assembled();
    double r[5] = {0, 0, 0, 0, 0};
    for (const auto& p : h.points) {
        CoVectorField o1 = h.rand_field(w.base().dim());
        CoVectorField e1 = h.rand_field(w.base().dim());
        CoVectorField g1 = h.rand_field(w.base().dim());
        CoVectorField o2 = h.rand_field(w.fiber().dim());
        CoVectorField e2 = h.rand_field(w.fiber().dim());
        CoVectorField g2 = h.rand_field(w.fiber().dim());

        CoVectorField o1h = lift_field(w, o1, LiftPart::Horizontal);
        CoVectorField e1h = lift_field(w, e1, LiftPart::Horizontal);
        CoVectorField g1h = lift_field(w, g1, LiftPart::Horizontal);
        CoVectorField o2v = lift_field(w, o2, LiftPart::Vertical);
        CoVectorField e2v = lift_field(w, e2, LiftPart::Vertical);
        CoVectorField g2v = lift_field(w, g2, LiftPart::Vertical);

        CurvatureAtPoint R = curvature_at(M, p);
        auto apply_R = [&](const CoVectorField& a, const CoVectorField& b,
                           const CoVectorField& cfield) {
            CoVector av = a.at(p, M.params()), bv = b.at(p, M.params()),
                     cv = cfield.at(p, M.params());
            CoVector out = zero_cov(M.dim());
            for (int i = 0; i < M.dim(); ++i)
                for (int j = 0; j < M.dim(); ++j)
                    for (int kk = 0; kk < M.dim(); ++kk)
                        for (int m = 0; m < M.dim(); ++m)
                            out[m] += av[i] * bv[j] * cv[kk] * R.at(i, j, kk, m);
            return out;
        };

        // Case 1: gamma = gamma1^h + gamma2^v.
        {
            CoVectorField gamma(M.dim());
            for (int m = 0; m < M.dim(); ++m)
                gamma.c[static_cast<std::size_t>(m)] =
                    ex_add(g1h.c[static_cast<std::size_t>(m)], g2v.c[static_cast<std::size_t>(m)]);
            CoVector direct = apply_R(o1h, e1h, gamma);
            CoVector cf = curvature_cf_hh(w, o1, e1, g1, g2, p);
            r[0] = std::max(r[0], rel_residual(direct, cf));
        }
        r[1] = std::max(r[1], rel_residual(apply_R(o1h, e2v, g1h),
                                           curvature_cf_hv_h(w, o1, e2, g1, p)));
        r[2] = std::max(r[2], rel_residual(apply_R(o1h, e2v, g2v),
                                           curvature_cf_hv_v(w, o1, e2, g2, p)));
        r[3] = std::max(r[3], rel_residual(apply_R(o2v, e2v, g1h),
                                           curvature_cf_vv_h(w, o2, e2, g1, p)));
        r[4] = std::max(r[4], rel_residual(apply_R(o2v, e2v, g2v),
                                           curvature_cf_vv_v(w, o2, e2, g2, p)));
    }
    for (int i = 0; i < 5; ++i)
        h.record("curvature.case" + std::to_string(i + 1), r[i], h.tol);
}

void verify_sectional(Harness& h) {
    const WarpedSpec& w = h.w;
    const ManifoldSpec& M = w.assembled();
    double r_hh = 0, r_hv = 0, r_vv = 0;
    for (const auto& p : h.points) {
        Ctx c(w, p);
        for (int attempt = 0; attempt < 24; ++attempt) {
            CoVector a1 = random_cov(h.sampler, w.base().dim());
            CoVector b1 = random_cov(h.sampler, w.base().dim());
            CoVector a2 = random_cov(h.sampler, w.fiber().dim());
            CoVector b2 = random_cov(h.sampler, w.fiber().dim());
            try {
                double hh_direct = sectional(M, p, c.lift_h(a1), c.lift_h(b1));
                double hh_cf = sectional_closed_form(w, p, PlaneCase::HH, a1, b1);
                r_hh = std::max(r_hh, rel_residual(hh_direct, hh_cf));

                double hv_direct = sectional(M, p, c.lift_h(a1), c.lift_v(a2));
                double hv_cf = sectional_closed_form(w, p, PlaneCase::HV, a1, a2);
                r_hv = std::max(r_hv, rel_residual(hv_direct, hv_cf));

                double vv_direct = sectional(M, p, c.lift_v(a2), c.lift_v(b2));
                double vv_cf = sectional_closed_form(w, p, PlaneCase::VV, a2, b2);
                r_vv = std::max(r_vv, rel_residual(vv_direct, vv_cf));
                break;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegeneratePlane) throw;
            }
        }
    }
    h.record("sectional.hh", r_hh, h.tol);
    h.record("sectional.hv", r_hv, h.tol);
    h.record("sectional.vv", r_vv, h.tol);
}

// Smooth deterministic factor function for the Laplacian check.
ScalarExpr canned_function(const ManifoldSpec& spec, PointSampler& sampler) {
    ScalarExpr acc = ex_const(0);
    for (int i = 0; i < spec.dim(); ++i) {
        ScalarExpr x = ex_var(i, spec.coords()[i]);
        acc = ex_add(acc, ex_mul(ex_const(sampler.next_scalar(-1, 1)), x));
        acc = ex_add(acc, ex_mul(ex_const(sampler.next_scalar(-0.5, 0.5)), ex_mul(x, x)));
        acc = ex_add(acc, ex_mul(ex_const(sampler.next_scalar(-1, 1)), ex_call(detail::Func::Sin, x)));
        if (i + 1 < spec.dim()) {
            ScalarExpr y = ex_var(i + 1, spec.coords()[i + 1]);
            acc = ex_add(acc, ex_mul(ex_const(sampler.next_scalar(-0.5, 0.5)), ex_mul(x, y)));
        }
    }
    return acc;
}

void verify_laplacian(Harness& h) {
    const WarpedSpec& w = h.w;
    const ManifoldSpec& M = w.assembled();
    double r = 0;
    ScalarExpr u1 = canned_function(w.base(), h.sampler);
    ScalarExpr u2 = canned_function(w.fiber(), h.sampler);
    ScalarExpr u = ex_add(lift_scalar(w, u1, LiftPart::Horizontal),
                          lift_scalar(w, u2, LiftPart::Vertical));
    for (const auto& p : h.points) {
        double direct = laplacian(M, u, p);
        double split = laplacian_split(w, u1, u2, p);
        r = std::max(r, rel_residual(direct, split));
    }
    h.record("laplacian.split", r, h.tol);
}

void verify_qualar(Harness& h) {
    const WarpedSpec& w = h.w;
    const ManifoldSpec& M = w.assembled();
    double r_null = 0, r_closed = 0;
    double sample_direct = 0, sample_closed = 0;
    for (const auto& p : h.points) {
        QualarResult direct = qualar(M, p);
        QualarResult via_null = qualar_via_null_forms(M, p);
        QualarResult closed = qualar_closed_form(w, p);
        if (&p == &h.points.front()) {
            sample_direct = direct.value;
            sample_closed = closed.value;
        }
        r_null = std::max(r_null, rel_residual(direct.value, via_null.value));
        r_closed = std::max(r_closed, rel_residual(direct.value, closed.value));
    }
    char note[96];
    std::snprintf(note, sizeof(note), "first point: direct %.12g, closed %.12g", sample_direct,
                  sample_closed);
    h.record("qualar.via_null_forms", r_null, h.tol);
    h.record("qualar.closed_form", r_closed, h.tol, note);
}

void verify_nullsec(Harness& h) {
    const WarpedSpec& w = h.w;

    // The decompositions use the pair symmetry of the curvature tensor,
    // which holds when the product bivector Pi1 + nu Pi2 satisfies the
    // Jacobi identity, i.e. when nu is a Casimir of the base.  Outside that
    // regime the residual is reported but not asserted.
    std::vector<std::vector<double>> base_pts;
    for (const auto& p : h.points) base_pts.push_back(w.base_point(p));
    bool poisson_regime = is_casimir(w.base(), w.nu(), base_pts, 1e-10);

    double r[4] = {0, 0, 0, 0};
    int counts[4] = {0, 0, 0, 0};
    for (const auto& p : h.points) {
        for (int cse = 0; cse < 4; ++cse) {
            auto rels = null_sectional_relations(w, p, static_cast<NullCase>(cse + 1));
            for (const auto& rel : rels) {
                r[cse] = std::max(r[cse], rel_residual(rel.lhs, rel.rhs));
                ++counts[cse];
            }
        }
    }
    for (int cse = 0; cse < 4; ++cse) {
        std::string name = "nullsec.case" + std::to_string(cse + 1);
        if (counts[cse] == 0) {
            h.record(name, 0.0, h.tol, "no admissible triples for this signature");
        } else if (!poisson_regime) {
            VerifyCase c;
            c.name = name;
            c.max_residual = r[cse];
            c.tol = h.tol;
            c.pass = true;
            c.note = "regime violation: nu is not a Casimir of the base, the product "
                     "bivector is not Poisson; residual reported, not asserted";
            h.report.cases.push_back(c);
        } else {
            h.record(name, r[cse], h.tol);
        }
    }
}

void verify_axioms(Harness& h) {
    const ManifoldSpec& M = h.w.assembled();
    double r_torsion = 0, r_compat = 0, r_anchor = 0, r_koszul = 0;
    const WarpedSpec& w = h.w;

    // Torsion and compatibility on the assembled chart.
    const int k = M.dim();
    std::vector<CoVectorField> dfields;
    for (int i = 0; i < k; ++i) dfields.push_back(coordinate_form_field(M, i));
    std::vector<CoVectorField> brackets;
    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i < j) idx.emplace_back(i, j);
    for (auto [i, j] : idx) {
        CoVectorField dij = contravariant_derivative(M, dfields[static_cast<std::size_t>(i)],
                                                     dfields[static_cast<std::size_t>(j)]);
        CoVectorField dji = contravariant_derivative(M, dfields[static_cast<std::size_t>(j)],
                                                     dfields[static_cast<std::size_t>(i)]);
        CoVectorField br = koszul_bracket(M, dfields[static_cast<std::size_t>(i)],
                                          dfields[static_cast<std::size_t>(j)]);
        CoVectorField resid(k);
        for (int m = 0; m < k; ++m)
            resid.c[static_cast<std::size_t>(m)] =
                ex_sub(ex_sub(dij.c[static_cast<std::size_t>(m)], dji.c[static_cast<std::size_t>(m)]),
                       br.c[static_cast<std::size_t>(m)]);
        brackets.push_back(resid);
    }

    for (const auto& p : h.points) {
        for (auto& resid : brackets) {
            CoVector v = resid.at(p, M.params());
            for (int m = 0; m < k; ++m) r_torsion = std::max(r_torsion, std::fabs(v[m]));
        }
        // Metric compatibility with random constant fields.
        CoVectorField omega = h.rand_field(k), eta = h.rand_field(k), gamma = h.rand_field(k);
        ScalarExpr lhs = sharp_apply(M, omega, pairing_expr(M, eta, gamma));
        CoVectorField d_eta = contravariant_derivative(M, omega, eta);
        CoVectorField d_gamma = contravariant_derivative(M, omega, gamma);
        double lhs_v = lhs.eval(p, M.params());
        double rhs_v = pairing(M, p, d_eta.at(p, M.params()), gamma.at(p, M.params())) +
                       pairing(M, p, eta.at(p, M.params()), d_gamma.at(p, M.params()));
        r_compat = std::max(r_compat, std::fabs(lhs_v - rhs_v));

        // Product anchor splits into the factor anchors, nu-scaled on the fiber.
        Ctx c(w, p);
        CoVector o1 = random_cov(h.sampler, w.base().dim());
        CoVector o2 = random_cov(h.sampler, w.fiber().dim());
        CoVector mixed = c.lift_h(o1);
        axpy(mixed, 1.0, o2, w.base().dim());
        auto direct = anchor(M, p, mixed);
        auto a1 = anchor(w.base(), c.p1, o1);
        auto a2 = anchor(w.fiber(), c.p2, o2);
        for (int m = 0; m < w.base().dim(); ++m)
            r_anchor = std::max(r_anchor, std::fabs(direct[static_cast<std::size_t>(m)] -
                                                    a1[static_cast<std::size_t>(m)]));
        for (int m = 0; m < w.fiber().dim(); ++m)
            r_anchor = std::max(
                r_anchor, std::fabs(direct[static_cast<std::size_t>(w.base().dim() + m)] -
                                    c.nu * a2[static_cast<std::size_t>(m)]));

        // Product Koszul bracket splits into lifted factor brackets plus the
        // Pi2(.,.) (dnu)^h correction.
        CoVectorField f1 = h.rand_field(w.base().dim());
        CoVectorField f2 = h.rand_field(w.fiber().dim());
        CoVectorField g1f = h.rand_field(w.base().dim());
        CoVectorField g2f = h.rand_field(w.fiber().dim());
        CoVectorField wsum(M.dim()), gsum(M.dim());
        CoVectorField f1h = lift_field(w, f1, LiftPart::Horizontal);
        CoVectorField f2v = lift_field(w, f2, LiftPart::Vertical);
        CoVectorField g1h = lift_field(w, g1f, LiftPart::Horizontal);
        CoVectorField g2vv = lift_field(w, g2f, LiftPart::Vertical);
        for (int m = 0; m < M.dim(); ++m) {
            wsum.c[static_cast<std::size_t>(m)] =
                ex_add(f1h.c[static_cast<std::size_t>(m)], f2v.c[static_cast<std::size_t>(m)]);
            gsum.c[static_cast<std::size_t>(m)] =
                ex_add(g1h.c[static_cast<std::size_t>(m)], g2vv.c[static_cast<std::size_t>(m)]);
        }
        CoVector lhs_br = koszul_bracket(M, wsum, gsum).at(p, M.params());
        CoVector rhs_br = zero_cov(M.dim());
        axpy(rhs_br, 1.0, koszul_bracket(w.base(), f1, g1f).at(c.p1, w.base().params()), 0);
        axpy(rhs_br, c.nu, koszul_bracket(w.fiber(), f2, g2f).at(c.p2, w.fiber().params()),
             w.base().dim());
        double pi2_og = c.pi2(c.fiber_val(f2), c.fiber_val(g2f));
        axpy(rhs_br, pi2_og, c.dnu, 0);
        for (int m = 0; m < M.dim(); ++m)
            r_koszul = std::max(r_koszul, std::fabs(lhs_br[m] - rhs_br[m]));
    }
    h.record("axioms.torsion_vs_koszul", r_torsion, 1e-10);
    h.record("axioms.metric_compatibility", r_compat, 1e-9);
    h.record("axioms.product_anchor", r_anchor, 1e-9);
    h.record("axioms.product_koszul", r_koszul, 1e-9);

    // Index additivity.
    bool sig_ok = true;
    for (const auto& p : h.points) {
        try {
            check_signature_at(M, p);
        } catch (const Error&) {
            sig_ok = false;
        }
    }
    h.record("axioms.index_additivity", sig_ok ? 0.0 : 1.0, 0.5);
}

} // namespace

VerifyReport run_verify(const WarpedSpec& w, const std::string& suite, int npoints,
                        std::uint64_t seed, double tol) {
    if (npoints <= 0) throw Error(ErrorKind::Usage, "--points must be positive");
    VerifyReport report;
    Harness h(w, npoints, seed, report, tol);
    bool all = suite == "all";
    bool known = all;
    if (all || suite == "connection") verify_connection(h), known = true;
    if (all || suite == "curvature") verify_curvature(h), known = true;
    if (all || suite == "sectional") verify_sectional(h), known = true;
    if (all || suite == "laplacian") verify_laplacian(h), known = true;
    if (all || suite == "qualar") verify_qualar(h), known = true;
    if (all || suite == "nullsec") verify_nullsec(h), known = true;
    if (all) verify_axioms(h);
    if (!known) throw Error(ErrorKind::Usage, "unknown suite '" + suite + "'");
    return report;
}

} // namespace pwarp
