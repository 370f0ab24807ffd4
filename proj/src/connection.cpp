#include "pwarp/connection.hpp"

#include "pwarp/curvature.hpp"

namespace pwarp {

ChristoffelTable christoffel(const ManifoldSpec& spec, std::span<const double> p) {
    metric_at(spec, p);  // SingularCometric check up front
    const int k = spec.dim();
    ChristoffelTable t;
    t.dim = k;
    t.g.resize(static_cast<std::size_t>(k) * k * k);
    for (int m = 0; m < k; ++m)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                t.at(m, i, j) = spec.geom().Gamma(m, i, j).eval(p, spec.params());
    return t;
}

CoVectorField contravariant_derivative(const ManifoldSpec& spec, const CoVectorField& omega,
                                       const CoVectorField& eta) {
    const int k = spec.dim();
    const auto& g = spec.geom();
    CoVectorField out(k);
    for (int m = 0; m < k; ++m) {
        ScalarExpr acc = ex_const(0);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j)
                acc = ex_add(acc, ex_mul(omega.c[static_cast<std::size_t>(i)],
                                         ex_mul(eta.c[static_cast<std::size_t>(j)], g.Gamma(m, i, j))));
            for (int l = 0; l < k; ++l)
                acc = ex_add(acc,
                             ex_mul(omega.c[static_cast<std::size_t>(i)],
                                    ex_mul(g.Pi(i, l),
                                           eta.c[static_cast<std::size_t>(m)].differentiate(
                                               spec.coords()[l]))));
        }
        out.c[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

ScalarExpr second_derivative(const ManifoldSpec& spec, const CoVectorField& omega,
                             const CoVectorField& eta, const ScalarExpr& u) {
    ScalarExpr inner = sharp_apply(spec, eta, u);
    ScalarExpr first = sharp_apply(spec, omega, inner);
    CoVectorField d_omega_eta = contravariant_derivative(spec, omega, eta);
    return ex_sub(first, sharp_apply(spec, d_omega_eta, u));
}

CoVectorField second_derivative(const ManifoldSpec& spec, const CoVectorField& omega,
                                const CoVectorField& eta, const CoVectorField& T) {
    CoVectorField inner = contravariant_derivative(spec, eta, T);
    CoVectorField first = contravariant_derivative(spec, omega, inner);
    CoVectorField d_omega_eta = contravariant_derivative(spec, omega, eta);
    CoVectorField second = contravariant_derivative(spec, d_omega_eta, T);
    CoVectorField out(spec.dim());
    for (int m = 0; m < spec.dim(); ++m)
        out.c[static_cast<std::size_t>(m)] =
            ex_sub(first.c[static_cast<std::size_t>(m)], second.c[static_cast<std::size_t>(m)]);
    return out;
}

BilinearForm hessian(const ManifoldSpec& spec, const ScalarExpr& phi, std::span<const double> p) {
    metric_at(spec, p);
    const int k = spec.dim();
    BilinearForm h;
    h.dim = k;
    h.v.resize(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            ScalarExpr e = second_derivative(spec, coordinate_form_field(spec, i),
                                             coordinate_form_field(spec, j), phi);
            h.at(i, j) = e.eval(p, spec.params());
        }
    }
    return h;
}

double laplacian(const ManifoldSpec& spec, const ScalarExpr& u, std::span<const double> p) {
    OrthonormalCoframe frame = orthonormal_coframe(spec, p);
    BilinearForm h = hessian(spec, u, p);
    const int k = spec.dim();
    // D^2 is tensorial in both slots, so contracting the coordinate-form
    // Hessian with the frozen coframe rows gives D^2_{theta,theta} exactly.
    double acc = 0.0;
    for (int a = 0; a < k; ++a)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) acc += frame.rows[static_cast<std::size_t>(a)][i] *
                                               frame.rows[static_cast<std::size_t>(a)][j] * h.at(i, j);
    return -acc;
}

} // namespace pwarp
