#include "pwarp/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace pwarp {

CoVector CoVectorField::at(std::span<const double> p, const ParamTable& params) const {
    CoVector v;
    v.c.reserve(c.size());
    for (const auto& e : c) v.c.push_back(e.eval(p, params));
    return v;
}

// ---------------------------------------------------------------------------
// Symbolic matrix inverse via adjugate / determinant.

namespace {

ScalarExpr minor_det(const std::vector<ScalarExpr>& m, int n, std::vector<int> rows,
                     std::vector<int> cols) {
    if (rows.size() == 1)
        return m[static_cast<std::size_t>(rows[0]) * n + cols[0]];
    ScalarExpr acc = ex_const(0);
    for (std::size_t ci = 0; ci < cols.size(); ++ci) {
        const ScalarExpr& pivot = m[static_cast<std::size_t>(rows[0]) * n + cols[ci]];
        if (pivot.is_zero()) continue;
        std::vector<int> sub_rows(rows.begin() + 1, rows.end());
        std::vector<int> sub_cols;
        for (std::size_t cj = 0; cj < cols.size(); ++cj)
            if (cj != ci) sub_cols.push_back(cols[cj]);
        ScalarExpr term = ex_mul(pivot, minor_det(m, n, sub_rows, sub_cols));
        acc = (ci % 2 == 0) ? ex_add(acc, term) : ex_sub(acc, term);
    }
    return acc;
}

ScalarExpr det_expr(const std::vector<ScalarExpr>& m, int n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return minor_det(m, n, all, all);
}

std::vector<ScalarExpr> inverse_exprs(const std::vector<ScalarExpr>& m, int n) {
    ScalarExpr det = det_expr(m, n);
    std::vector<ScalarExpr> inv(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (n == 1) {
                inv[0] = ex_div(ex_const(1), det);
                continue;
            }
            std::vector<int> rows, cols;
            for (int r = 0; r < n; ++r)
                if (r != j) rows.push_back(r);  // cofactor transpose: drop row j, col i
            for (int c = 0; c < n; ++c)
                if (c != i) cols.push_back(c);
            ScalarExpr cof = minor_det(m, n, rows, cols);
            if ((i + j) % 2 != 0) cof = ex_neg(cof);
            inv[static_cast<std::size_t>(i) * n + j] = ex_div(cof, det);
        }
    }
    return inv;
}

} // namespace

// ---------------------------------------------------------------------------
// Builder

ManifoldSpec::Builder::Builder(std::string name, int dim, int index,
                               std::vector<std::string> coords)
    : name_(std::move(name)), dim_(dim), index_(index), coords_(std::move(coords)),
      cometric_src_(static_cast<std::size_t>(dim) * dim),
      cometric_expr_(static_cast<std::size_t>(dim) * dim),
      cometric_set_(static_cast<std::size_t>(dim) * dim, false),
      bivector_src_(static_cast<std::size_t>(dim) * dim),
      bivector_expr_(static_cast<std::size_t>(dim) * dim),
      bivector_set_(static_cast<std::size_t>(dim) * dim, false) {
    if (dim < 1 || dim > 9)
        throw Error(ErrorKind::Load, "dimension must be between 1 and 9");
    if (index < 0 || index > dim)
        throw Error(ErrorKind::Load, "index must satisfy 0 <= q <= dim");
    if (static_cast<int>(coords_.size()) != dim)
        throw Error(ErrorKind::Load, "coordinate count does not match dimension");
    std::set<std::string> seen(coords_.begin(), coords_.end());
    if (static_cast<int>(seen.size()) != dim)
        throw Error(ErrorKind::Load, "coordinate names must be distinct");
    box_.assign(static_cast<std::size_t>(dim), Interval{-1.0, 1.0});
}

ManifoldSpec::Builder& ManifoldSpec::Builder::box(std::vector<Interval> box) {
    if (static_cast<int>(box.size()) != dim_)
        throw Error(ErrorKind::Load, "box must give one interval per coordinate");
    for (auto& [lo, hi] : box)
        if (!(lo < hi)) throw Error(ErrorKind::Load, "box interval must have lo < hi");
    box_ = std::move(box);
    return *this;
}

ManifoldSpec::Builder& ManifoldSpec::Builder::param(std::string_view name, double value) {
    params_.set(name, value);
    return *this;
}

ManifoldSpec::Builder& ManifoldSpec::Builder::cometric(int i, int j, std::string_view source) {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_ || i > j)
        throw Error(ErrorKind::Load, "cometric entries must be given for i <= j only");
    cometric_src_[static_cast<std::size_t>(i) * dim_ + j] = std::string(source);
    cometric_set_[static_cast<std::size_t>(i) * dim_ + j] = true;
    return *this;
}

ManifoldSpec::Builder& ManifoldSpec::Builder::bivector(int i, int j, std::string_view source) {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_ || i >= j)
        throw Error(ErrorKind::Load, "bivector entries must be given for i < j only");
    bivector_src_[static_cast<std::size_t>(i) * dim_ + j] = std::string(source);
    bivector_set_[static_cast<std::size_t>(i) * dim_ + j] = true;
    return *this;
}

ManifoldSpec::Builder& ManifoldSpec::Builder::cometric(int i, int j, ScalarExpr e) {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_ || i > j)
        throw Error(ErrorKind::Load, "cometric entries must be given for i <= j only");
    cometric_expr_[static_cast<std::size_t>(i) * dim_ + j] = std::move(e);
    cometric_set_[static_cast<std::size_t>(i) * dim_ + j] = true;
    return *this;
}

ManifoldSpec::Builder& ManifoldSpec::Builder::bivector(int i, int j, ScalarExpr e) {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_ || i >= j)
        throw Error(ErrorKind::Load, "bivector entries must be given for i < j only");
    bivector_expr_[static_cast<std::size_t>(i) * dim_ + j] = std::move(e);
    bivector_set_[static_cast<std::size_t>(i) * dim_ + j] = true;
    return *this;
}

namespace {

detail::GeometryTables build_geometry(int dim, const std::vector<ScalarExpr>& g,
                                      const std::vector<ScalarExpr>& pi,
                                      std::span<const std::string> coords) {
    detail::GeometryTables t;
    t.dim = dim;
    t.g = g;
    t.pi = pi;
    t.g_inv = inverse_exprs(g, dim);

    const int k = dim;
    auto G = [&](int i, int j) -> const ScalarExpr& { return g[static_cast<std::size_t>(i) * k + j]; };
    auto P = [&](int i, int j) -> const ScalarExpr& { return pi[static_cast<std::size_t>(i) * k + j]; };

    // dPi and dG, indexed [l][i][j].
    std::vector<ScalarExpr> dpi(static_cast<std::size_t>(k) * k * k);
    std::vector<ScalarExpr> dg(static_cast<std::size_t>(k) * k * k);
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                dpi[(static_cast<std::size_t>(l) * k + i) * k + j] = P(i, j).differentiate(coords[l]);
                dg[(static_cast<std::size_t>(l) * k + i) * k + j] = G(i, j).differentiate(coords[l]);
            }
    auto dP = [&](int l, int i, int j) -> const ScalarExpr& {
        return dpi[(static_cast<std::size_t>(l) * k + i) * k + j];
    };
    auto dG = [&](int l, int i, int j) -> const ScalarExpr& {
        return dg[(static_cast<std::size_t>(l) * k + i) * k + j];
    };

    // Gamma_kidx^{ij}
    //   = 1/2 sum_{l,m} g_{m,kidx} ( Pi^{il} d_l g^{jm} + Pi^{jl} d_l g^{im}
    //       - Pi^{ml} d_l g^{ij} - g^{li} d_l Pi^{jm} - g^{lj} d_l Pi^{im} )
    //   + 1/2 d_kidx Pi^{ij}
    t.gamma.resize(static_cast<std::size_t>(k) * k * k);
    for (int m_out = 0; m_out < k; ++m_out) {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                ScalarExpr sum = ex_const(0);
                for (int m = 0; m < k; ++m) {
                    ScalarExpr bracket = ex_const(0);
                    for (int l = 0; l < k; ++l) {
                        bracket = ex_add(bracket, ex_mul(P(i, l), dG(l, j, m)));
                        bracket = ex_add(bracket, ex_mul(P(j, l), dG(l, i, m)));
                        bracket = ex_sub(bracket, ex_mul(P(m, l), dG(l, i, j)));
                        bracket = ex_sub(bracket, ex_mul(G(l, i), dP(l, j, m)));
                        bracket = ex_sub(bracket, ex_mul(G(l, j), dP(l, i, m)));
                    }
                    if (bracket.is_zero()) continue;
                    sum = ex_add(sum, ex_mul(t.g_inv[static_cast<std::size_t>(m) * k + m_out], bracket));
                }
                ScalarExpr gamma = ex_add(ex_mul(ex_const(0.5), sum),
                                          ex_mul(ex_const(0.5), dP(m_out, i, j)));
                t.gamma[(static_cast<std::size_t>(m_out) * k + i) * k + j] = gamma;
            }
        }
    }

    t.dgamma.resize(static_cast<std::size_t>(k) * k * k * k);
    for (int l = 0; l < k; ++l)
        for (int m = 0; m < k; ++m)
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    t.dgamma[((static_cast<std::size_t>(l) * k + m) * k + i) * k + j] =
                        t.gamma[(static_cast<std::size_t>(m) * k + i) * k + j]
                            .differentiate(coords[l]);

    t.dpi = std::move(dpi);
    return t;
}

} // namespace

ManifoldSpec ManifoldSpec::Builder::build() const {
    auto data = std::make_shared<detail::ManifoldData>();
    data->name = name_;
    data->dim = dim_;
    data->index = index_;
    data->coords = coords_;
    data->box = box_;
    data->params = params_;

    const int k = dim_;
    std::vector<ScalarExpr> g(static_cast<std::size_t>(k) * k, ex_const(0));
    std::vector<ScalarExpr> pi(static_cast<std::size_t>(k) * k, ex_const(0));
    for (int i = 0; i < k; ++i) {
        if (!cometric_set_[static_cast<std::size_t>(i) * k + i])
            throw Error(ErrorKind::Load,
                        "missing diagonal cometric entry g" + std::to_string(i + 1) +
                            std::to_string(i + 1));
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            std::size_t ij = static_cast<std::size_t>(i) * k + j;
            if (!cometric_set_[ij]) continue;
            ScalarExpr e = normalized(cometric_expr_[ij]
                                          ? *cometric_expr_[ij]
                                          : parse_expr(cometric_src_[ij], coords_, params_.names()));
            g[ij] = e;
            g[static_cast<std::size_t>(j) * k + i] = e;
        }
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            std::size_t ij = static_cast<std::size_t>(i) * k + j;
            if (!bivector_set_[ij]) continue;
            ScalarExpr e = normalized(bivector_expr_[ij]
                                          ? *bivector_expr_[ij]
                                          : parse_expr(bivector_src_[ij], coords_, params_.names()));
            pi[ij] = e;
            pi[static_cast<std::size_t>(j) * k + i] = ex_neg(e);
        }
    }

    data->geom = build_geometry(k, g, pi, coords_);
    return ManifoldSpec(std::move(data));
}

ManifoldSpec ManifoldSpec::with_params(ParamTable params) const {
    auto data = std::make_shared<detail::ManifoldData>(*d_);
    for (auto name : d_->params.names())
        if (!params.has(name))
            throw Error(ErrorKind::Load, "missing parameter '" + std::string(name) + "'");
    data->params = std::move(params);
    return ManifoldSpec(std::move(data));
}

// ---------------------------------------------------------------------------
// Pointwise operations

namespace {

void check_point(const ManifoldSpec& spec, std::span<const double> p) {
    if (static_cast<int>(p.size()) != spec.dim())
        throw Error(ErrorKind::Domain, "point dimension does not match chart dimension");
}

} // namespace

SquareMatrix cometric_at(const ManifoldSpec& spec, std::span<const double> p) {
    check_point(spec, p);
    const int k = spec.dim();
    SquareMatrix m(k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
            double v = spec.geom().G(i, j).eval(p, spec.params());
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    return m;
}

SquareMatrix metric_at(const ManifoldSpec& spec, std::span<const double> p) {
    SquareMatrix inv = invert(cometric_at(spec, p));
    // Symmetrize against roundoff so downstream contractions see an exactly
    // symmetric matrix.
    for (int i = 0; i < inv.dim(); ++i)
        for (int j = i + 1; j < inv.dim(); ++j) {
            double v = 0.5 * (inv.at(i, j) + inv.at(j, i));
            inv.at(i, j) = v;
            inv.at(j, i) = v;
        }
    return inv;
}

SquareMatrix bivector_at(const ManifoldSpec& spec, std::span<const double> p) {
    check_point(spec, p);
    const int k = spec.dim();
    SquareMatrix m(k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            double v = spec.geom().Pi(i, j).eval(p, spec.params());
            m.at(i, j) = v;
            m.at(j, i) = -v;
        }
    return m;
}

std::vector<double> anchor(const ManifoldSpec& spec, std::span<const double> p,
                           const CoVector& omega) {
    check_point(spec, p);
    SquareMatrix P = bivector_at(spec, p);
    const int k = spec.dim();
    std::vector<double> X(static_cast<std::size_t>(k), 0.0);
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < k; ++i) X[static_cast<std::size_t>(l)] += omega[i] * P.at(i, l);
    return X;
}

CoVector j_endomorphism(const ManifoldSpec& spec, std::span<const double> p,
                        const CoVector& omega) {
    SquareMatrix P = bivector_at(spec, p);
    SquareMatrix g_low = metric_at(spec, p);
    const int k = spec.dim();
    CoVector out(std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int m = 0; m < k; ++m)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) out[m] += omega[i] * P.at(i, j) * g_low.at(j, m);
    return out;
}

CausalType causal_type(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega,
                       double tol) {
    double v = pairing(spec, p, omega, omega);
    if (std::fabs(v) <= tol) return CausalType::Lightlike;
    return v > 0 ? CausalType::Spacelike : CausalType::Timelike;
}

PoissonReport validate_poisson(const ManifoldSpec& spec,
                               const std::vector<std::vector<double>>& points, double tol) {
    if (points.empty()) throw Error(ErrorKind::Usage, "validate_poisson needs at least one point");
    PoissonReport rep;
    const int k = spec.dim();
    const auto& t = spec.geom();
    for (const auto& p : points) {
        check_point(spec, p);
        SquareMatrix P = bivector_at(spec, p);
        for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
                for (int kk = j + 1; kk < k; ++kk) {
                    double res = 0.0;
                    for (int l = 0; l < k; ++l) {
                        res += P.at(i, l) * t.DPi(l, j, kk).eval(p, spec.params());
                        res += P.at(j, l) * t.DPi(l, kk, i).eval(p, spec.params());
                        res += P.at(kk, l) * t.DPi(l, i, j).eval(p, spec.params());
                    }
                    if (std::fabs(res) > rep.worst_residual) {
                        rep.worst_residual = std::fabs(res);
                        rep.worst_i = i;
                        rep.worst_j = j;
                        rep.worst_k = kk;
                        rep.worst_point = p;
                    }
                }
            }
        }
    }
    rep.pass = rep.worst_residual <= tol;
    return rep;
}

bool is_casimir(const ManifoldSpec& spec, const ScalarExpr& f,
                const std::vector<std::vector<double>>& points, double tol) {
    CoVectorField df = differential(spec, f);
    for (const auto& p : points) {
        CoVector jdf = j_endomorphism(spec, p, df.at(p, spec.params()));
        double norm = 0.0;
        for (int i = 0; i < jdf.dim(); ++i) norm += jdf[i] * jdf[i];
        if (std::sqrt(norm) > tol) return false;
    }
    return true;
}

CoVectorField koszul_bracket(const ManifoldSpec& spec, const CoVectorField& omega,
                             const CoVectorField& eta) {
    const int k = spec.dim();
    const auto& t = spec.geom();
    auto coords = spec.coords();

    // X^l = omega_i Pi^{il},  Y^l = eta_i Pi^{il}
    std::vector<ScalarExpr> X(static_cast<std::size_t>(k), ex_const(0));
    std::vector<ScalarExpr> Y(static_cast<std::size_t>(k), ex_const(0));
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < k; ++i) {
            X[static_cast<std::size_t>(l)] =
                ex_add(X[static_cast<std::size_t>(l)], ex_mul(omega.c[static_cast<std::size_t>(i)], t.Pi(i, l)));
            Y[static_cast<std::size_t>(l)] =
                ex_add(Y[static_cast<std::size_t>(l)], ex_mul(eta.c[static_cast<std::size_t>(i)], t.Pi(i, l)));
        }

    ScalarExpr pi_pair = bivector_pairing_expr(spec, omega, eta);

    // ( [omega,eta]_Pi )_m
    //   = X^l d_l eta_m + eta_l d_m X^l - Y^l d_l omega_m - omega_l d_m Y^l - d_m Pi(omega,eta)
    CoVectorField out(k);
    for (int m = 0; m < k; ++m) {
        ScalarExpr acc = ex_const(0);
        for (int l = 0; l < k; ++l) {
            const auto lz = static_cast<std::size_t>(l);
            acc = ex_add(acc, ex_mul(X[lz], eta.c[static_cast<std::size_t>(m)].differentiate(coords[l])));
            acc = ex_add(acc, ex_mul(eta.c[lz], X[lz].differentiate(coords[m])));
            acc = ex_sub(acc, ex_mul(Y[lz], omega.c[static_cast<std::size_t>(m)].differentiate(coords[l])));
            acc = ex_sub(acc, ex_mul(omega.c[lz], Y[lz].differentiate(coords[m])));
        }
        acc = ex_sub(acc, pi_pair.differentiate(coords[m]));
        out.c[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

void check_signature_at(const ManifoldSpec& spec, std::span<const double> p) {
    SquareMatrix G = cometric_at(spec, p);
    auto eig = symmetric_eigenvalues(G);
    double scale = 0.0;
    for (double e : eig) scale = std::max(scale, std::fabs(e));
    if (scale == 0.0)
        throw Error(ErrorKind::SingularCometric, "cometric vanishes at the sample point");
    int negatives = 0;
    for (double e : eig) {
        if (std::fabs(e) <= 1e-12 * scale)
            throw Error(ErrorKind::SingularCometric, "cometric is degenerate at the sample point");
        if (e < 0) ++negatives;
    }
    if (negatives != spec.index())
        throw Error(ErrorKind::CoframeConstruction,
                    "declared index " + std::to_string(spec.index()) + " but cometric has " +
                        std::to_string(negatives) + " negative eigenvalues");
}

// ---------------------------------------------------------------------------
// Shared helpers

double pairing(const ManifoldSpec& spec, std::span<const double> p, const CoVector& a,
               const CoVector& b) {
    SquareMatrix G = cometric_at(spec, p);
    return bilinear(G, a.c, b.c);
}

double bivector_pairing(const ManifoldSpec& spec, std::span<const double> p, const CoVector& a,
                        const CoVector& b) {
    SquareMatrix P = bivector_at(spec, p);
    return bilinear(P, a.c, b.c);
}

CoVectorField coordinate_form_field(const ManifoldSpec& spec, int i) {
    CoVectorField f(spec.dim());
    f.c[static_cast<std::size_t>(i)] = ex_const(1);
    return f;
}

CoVector coordinate_form(const ManifoldSpec& spec, int i) {
    CoVector v(std::vector<double>(static_cast<std::size_t>(spec.dim()), 0.0));
    v[i] = 1.0;
    return v;
}

CoVectorField constant_field(const CoVector& v) {
    CoVectorField f(v.dim());
    for (int i = 0; i < v.dim(); ++i) f.c[static_cast<std::size_t>(i)] = ex_const(v[i]);
    return f;
}

CoVectorField differential(const ManifoldSpec& spec, const ScalarExpr& f) {
    CoVectorField df(spec.dim());
    for (int i = 0; i < spec.dim(); ++i)
        df.c[static_cast<std::size_t>(i)] = f.differentiate(spec.coords()[i]);
    return df;
}

CoVectorField j_field(const ManifoldSpec& spec, const CoVectorField& w) {
    const int k = spec.dim();
    const auto& t = spec.geom();
    CoVectorField out(k);
    for (int m = 0; m < k; ++m) {
        ScalarExpr acc = ex_const(0);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                acc = ex_add(acc, ex_mul(w.c[static_cast<std::size_t>(i)],
                                         ex_mul(t.Pi(i, j), t.Ginv(j, m))));
        out.c[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

ScalarExpr pairing_expr(const ManifoldSpec& spec, const CoVectorField& a, const CoVectorField& b) {
    const int k = spec.dim();
    ScalarExpr acc = ex_const(0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            acc = ex_add(acc, ex_mul(a.c[static_cast<std::size_t>(i)],
                                     ex_mul(spec.geom().G(i, j), b.c[static_cast<std::size_t>(j)])));
    return acc;
}

ScalarExpr bivector_pairing_expr(const ManifoldSpec& spec, const CoVectorField& a,
                                 const CoVectorField& b) {
    const int k = spec.dim();
    ScalarExpr acc = ex_const(0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            acc = ex_add(acc, ex_mul(a.c[static_cast<std::size_t>(i)],
                                     ex_mul(spec.geom().Pi(i, j), b.c[static_cast<std::size_t>(j)])));
    return acc;
}

ScalarExpr sharp_apply(const ManifoldSpec& spec, const CoVectorField& w, const ScalarExpr& u) {
    const int k = spec.dim();
    ScalarExpr acc = ex_const(0);
    for (int i = 0; i < k; ++i) {
        for (int l = 0; l < k; ++l) {
            ScalarExpr du = u.differentiate(spec.coords()[l]);
            acc = ex_add(acc, ex_mul(w.c[static_cast<std::size_t>(i)],
                                     ex_mul(spec.geom().Pi(i, l), du)));
        }
    }
    return acc;
}

} // namespace pwarp
