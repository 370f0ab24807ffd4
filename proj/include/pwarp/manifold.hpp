#pragma once

#include "pwarp/expr.hpp"
#include "pwarp/linalg.hpp"
#include "pwarp/sampling.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pwarp {

// Pointwise value of a 1-form in the coordinate coframe {dx_i}.
struct CoVector {
    std::vector<double> c;

    CoVector() = default;
    explicit CoVector(std::vector<double> comps) : c(std::move(comps)) {}
    int dim() const { return static_cast<int>(c.size()); }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
};

// 1-form with expression-valued components.
struct CoVectorField {
    std::vector<ScalarExpr> c;

    CoVectorField() = default;
    explicit CoVectorField(std::vector<ScalarExpr> comps) : c(std::move(comps)) {}
    explicit CoVectorField(int dim) : c(static_cast<std::size_t>(dim)) {}
    int dim() const { return static_cast<int>(c.size()); }

    CoVector at(std::span<const double> p, const ParamTable& params) const;
};

enum class CausalType { Spacelike, Timelike, Lightlike };

namespace detail {

// Symbolic tables derived once per spec: full cometric/bivector matrices,
// adjugate-based inverse metric, Christoffel symbols and their derivatives.
struct GeometryTables {
    int dim = 0;
    std::vector<ScalarExpr> g;       // dim*dim, symmetric
    std::vector<ScalarExpr> pi;      // dim*dim, antisymmetric
    std::vector<ScalarExpr> g_inv;   // dim*dim
    std::vector<ScalarExpr> gamma;   // [m][i][j] -> Gamma_m^{ij}
    std::vector<ScalarExpr> dgamma;  // [l][m][i][j] -> d_l Gamma_m^{ij}
    std::vector<ScalarExpr> dpi;     // [l][i][j] -> d_l Pi^{ij}

    const ScalarExpr& G(int i, int j) const { return g[idx2(i, j)]; }
    const ScalarExpr& Pi(int i, int j) const { return pi[idx2(i, j)]; }
    const ScalarExpr& Ginv(int i, int j) const { return g_inv[idx2(i, j)]; }
    const ScalarExpr& Gamma(int m, int i, int j) const { return gamma[idx3(m, i, j)]; }
    const ScalarExpr& DGamma(int l, int m, int i, int j) const {
        return dgamma[((static_cast<std::size_t>(l) * dim + m) * dim + i) * dim + j];
    }
    const ScalarExpr& DPi(int l, int i, int j) const { return dpi[idx3(l, i, j)]; }

    std::size_t idx2(int i, int j) const { return static_cast<std::size_t>(i) * dim + j; }
    std::size_t idx3(int a, int b, int c) const {
        return (static_cast<std::size_t>(a) * dim + b) * dim + c;
    }
};

struct ManifoldData {
    std::string name;
    int dim = 0;
    int index = 0;
    std::vector<std::string> coords;
    std::vector<Interval> box;
    ParamTable params;
    GeometryTables geom;
};

} // namespace detail

// One chart of a pseudo-Riemannian Poisson manifold (M, g~, Pi).  Immutable
// after build; copies share the underlying tables, so passing by value is
// cheap and parallel use is unrestricted.
class ManifoldSpec {
  public:
    class Builder;

    const std::string& name() const { return d_->name; }
    int dim() const { return d_->dim; }
    int index() const { return d_->index; }
    std::span<const std::string> coords() const { return d_->coords; }
    std::span<const Interval> box() const { return d_->box; }
    const ParamTable& params() const { return d_->params; }
    const detail::GeometryTables& geom() const { return d_->geom; }

    // Same chart data, different parameter values.
    ManifoldSpec with_params(ParamTable params) const;

  private:
    explicit ManifoldSpec(std::shared_ptr<const detail::ManifoldData> d) : d_(std::move(d)) {}
    std::shared_ptr<const detail::ManifoldData> d_;
};

class ManifoldSpec::Builder {
  public:
    Builder(std::string name, int dim, int index, std::vector<std::string> coords);

    Builder& box(std::vector<Interval> box);
    Builder& param(std::string_view name, double value);
    // Cometric entries accepted for i <= j only; bivector for i < j only.
    Builder& cometric(int i, int j, std::string_view source);
    Builder& bivector(int i, int j, std::string_view source);
    // Expression forms for programmatic assembly (warped products); the
    // expression must already be bound to this chart's coordinate and
    // parameter slots.
    Builder& cometric(int i, int j, ScalarExpr e);
    Builder& bivector(int i, int j, ScalarExpr e);

    ManifoldSpec build() const;

  private:
    std::string name_;
    int dim_;
    int index_;
    std::vector<std::string> coords_;
    std::vector<Interval> box_;
    ParamTable params_;
    std::vector<std::string> cometric_src_;  // dim*dim, upper triangle used
    std::vector<std::optional<ScalarExpr>> cometric_expr_;
    std::vector<bool> cometric_set_;
    std::vector<std::string> bivector_src_;
    std::vector<std::optional<ScalarExpr>> bivector_expr_;
    std::vector<bool> bivector_set_;
};

struct PoissonReport {
    bool pass = true;
    double worst_residual = 0.0;
    int worst_i = -1, worst_j = -1, worst_k = -1;
    std::vector<double> worst_point;
};

SquareMatrix cometric_at(const ManifoldSpec& spec, std::span<const double> p);
SquareMatrix metric_at(const ManifoldSpec& spec, std::span<const double> p);
SquareMatrix bivector_at(const ManifoldSpec& spec, std::span<const double> p);

// Tangent components of sharp(omega): X^l = sum_i omega_i Pi^{il}.
std::vector<double> anchor(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega);

// Index-lowering of the anchor: (J omega)_m = sum_{i,j} omega_i Pi^{ij} g_{jm}.
CoVector j_endomorphism(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega);

CausalType causal_type(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega,
                       double tol = 1e-10);

// Jacobi identity residual J^{ijk} over all triples at the sample points.
PoissonReport validate_poisson(const ManifoldSpec& spec,
                               const std::vector<std::vector<double>>& points, double tol);

bool is_casimir(const ManifoldSpec& spec, const ScalarExpr& f,
                const std::vector<std::vector<double>>& points, double tol);

// Koszul bracket of 1-form fields, fully symbolic.
CoVectorField koszul_bracket(const ManifoldSpec& spec, const CoVectorField& omega,
                             const CoVectorField& eta);

// Eigenvalue sign count of the cometric; throws on mismatch with the declared index.
void check_signature_at(const ManifoldSpec& spec, std::span<const double> p);

// Helpers shared across modules --------------------------------------------

// g~(a, b) at p.
double pairing(const ManifoldSpec& spec, std::span<const double> p, const CoVector& a,
               const CoVector& b);

// Pi(a, b) at p.
double bivector_pairing(const ManifoldSpec& spec, std::span<const double> p, const CoVector& a,
                        const CoVector& b);

// Coordinate coframe element dx_i as a constant field / covector.
CoVectorField coordinate_form_field(const ManifoldSpec& spec, int i);
CoVector coordinate_form(const ManifoldSpec& spec, int i);

// Constant-coefficient field from a covector.
CoVectorField constant_field(const CoVector& v);

// Exterior derivative of a scalar: components d_i f.
CoVectorField differential(const ManifoldSpec& spec, const ScalarExpr& f);

// Symbolic J applied to a field: (J w)_m = sum_{i,j} w_i Pi^{ij} g_{jm}.
CoVectorField j_field(const ManifoldSpec& spec, const CoVectorField& w);

// Symbolic g~(a, b) and Pi(a, b) as scalar expressions.
ScalarExpr pairing_expr(const ManifoldSpec& spec, const CoVectorField& a, const CoVectorField& b);
ScalarExpr bivector_pairing_expr(const ManifoldSpec& spec, const CoVectorField& a,
                                 const CoVectorField& b);

// Anchor derivation sharp(w)(u) = sum_{i,l} w_i Pi^{il} d_l u, symbolic.
ScalarExpr sharp_apply(const ManifoldSpec& spec, const CoVectorField& w, const ScalarExpr& u);

} // namespace pwarp
