#pragma once

#include "pwarp/curvature.hpp"
#include "pwarp/manifold.hpp"

#include <string>
#include <vector>

namespace pwarp {

enum class LiftPart { Horizontal, Vertical };

// Factor 1-form tagged with the side of the product it lifts from.
struct LiftedForm {
    LiftPart part = LiftPart::Horizontal;
    CoVectorField components;  // over the factor chart
};

// Contravariant warped product data (M1 x_f M2, Pi1 + nu Pi2, g1 (+) g2/f^2).
// f and nu are functions of the base chart only; f must be positive on the
// base sampling box.  The product chart (base coordinates first) is assembled
// eagerly so repeated direct computations share one set of tables.
class WarpedSpec {
  public:
    static WarpedSpec make(ManifoldSpec base, ManifoldSpec fiber, std::string_view f_source,
                           std::string_view nu_source);

    const ManifoldSpec& base() const { return base_; }
    const ManifoldSpec& fiber() const { return fiber_; }
    const ScalarExpr& f() const { return f_; }
    const ScalarExpr& nu() const { return nu_; }
    const ManifoldSpec& assembled() const { return assembled_; }

    std::vector<double> base_point(std::span<const double> p) const;
    std::vector<double> fiber_point(std::span<const double> p) const;

  private:
    WarpedSpec(ManifoldSpec base, ManifoldSpec fiber, ScalarExpr f, ScalarExpr nu,
               ManifoldSpec assembled)
        : base_(std::move(base)), fiber_(std::move(fiber)), f_(std::move(f)), nu_(std::move(nu)),
          assembled_(std::move(assembled)) {}

    ManifoldSpec base_;
    ManifoldSpec fiber_;
    ScalarExpr f_;
    ScalarExpr nu_;
    ManifoldSpec assembled_;
};

const ManifoldSpec& assemble(const WarpedSpec& w);

// Lifts onto the product chart.
ScalarExpr lift_scalar(const WarpedSpec& w, const ScalarExpr& e, LiftPart part);
CoVectorField lift_field(const WarpedSpec& w, const CoVectorField& field, LiftPart part);
CoVectorField lift_field(const WarpedSpec& w, const LiftedForm& form);
CoVector lift_covector(const WarpedSpec& w, const CoVector& v, LiftPart part);

// --- Closed-form connection (factor-level evaluation, never the product
// --- pipeline).  All return the value at the product point p.

// D_{omega1^h} gamma1^h
CoVector connection_cf_hh(const WarpedSpec& w, const CoVectorField& omega1,
                          const CoVectorField& gamma1, std::span<const double> p);
// D_{omega2^v} gamma2^v
CoVector connection_cf_vv(const WarpedSpec& w, const CoVectorField& omega2,
                          const CoVectorField& gamma2, std::span<const double> p);
// D_{omega1^h} gamma2^v = D_{gamma2^v} omega1^h
CoVector connection_cf_hv(const WarpedSpec& w, const CoVectorField& omega1,
                          const CoVectorField& gamma2, std::span<const double> p);

// --- Closed-form curvature, one function per case of the product formula.

// R(omega1^h, eta1^h)(gamma1^h + gamma2^v)
CoVector curvature_cf_hh(const WarpedSpec& w, const CoVectorField& omega1,
                         const CoVectorField& eta1, const CoVectorField& gamma1,
                         const CoVectorField& gamma2, std::span<const double> p);
// R(omega1^h, eta2^v) gamma1^h
CoVector curvature_cf_hv_h(const WarpedSpec& w, const CoVectorField& omega1,
                           const CoVectorField& eta2, const CoVectorField& gamma1,
                           std::span<const double> p);
// R(omega1^h, eta2^v) gamma2^v
CoVector curvature_cf_hv_v(const WarpedSpec& w, const CoVectorField& omega1,
                           const CoVectorField& eta2, const CoVectorField& gamma2,
                           std::span<const double> p);
// R(omega2^v, eta2^v) gamma1^h
CoVector curvature_cf_vv_h(const WarpedSpec& w, const CoVectorField& omega2,
                           const CoVectorField& eta2, const CoVectorField& gamma1,
                           std::span<const double> p);
// R(omega2^v, eta2^v) gamma2^v
CoVector curvature_cf_vv_v(const WarpedSpec& w, const CoVectorField& omega2,
                           const CoVectorField& eta2, const CoVectorField& gamma2,
                           std::span<const double> p);

// --- Closed-form sectional curvature on lifted planes.

enum class PlaneCase { HH, HV, VV };

double sectional_closed_form(const WarpedSpec& w, std::span<const double> p, PlaneCase which,
                             const CoVector& first, const CoVector& second);

// Laplacian split for u = u1^h + u2^v:
// (Lap_{M1} u1)^h + ((k2 - 2 q2)/f) g1(J1 df1, J1 du1)^h + (nu f)^2 (Lap_{M2} u2)^v
double laplacian_split(const WarpedSpec& w, const ScalarExpr& u1, const ScalarExpr& u2,
                       std::span<const double> p);

// Product qualar curvature from factor-level quantities only.
QualarResult qualar_closed_form(const WarpedSpec& w, std::span<const double> p);

// --- Null sectional curvature decompositions on the product.

// Which lightlike combination the degenerate plane is built from.
enum class NullCase {
    HH = 1,  // timelike base + spacelike base
    HV = 2,  // timelike base + spacelike fiber
    VH = 3,  // timelike fiber + spacelike base
    VV = 4,  // timelike fiber + spacelike fiber
};

struct NullRelation {
    NullCase which;
    int i = -1;          // timelike factor-coframe row
    int s = -1;          // spacelike factor-coframe row
    int l = -1;          // direction row within its factor coframe
    bool l_in_fiber = false;
    double lhs = 0.0;    // direct null sectional curvature of span{xi, theta_l}
    double rhs = 0.0;    // -K/2 + K/2 + eps * f^w * g(R..) combination
};

// All admissible (i, s, l) triples for one case; both sides evaluated on the
// assembled chart.
std::vector<NullRelation> null_sectional_relations(const WarpedSpec& w, std::span<const double> p,
                                                   NullCase which);

// --- Empirical sign-theorem sampling.

struct SignStatement {
    std::string name;
    bool regime_met = false;
    bool holds = true;
    std::string note;
};

struct SignReport {
    bool f_casimir = false;
    bool nu_constant = false;
    bool base_riemannian = false;
    bool fiber_riemannian = false;
    bool product_riemannian = false;
    bool base_flat = false;
    double base_min = 0, base_max = 0;
    double fiber_min = 0, fiber_max = 0;
    double product_min = 0, product_max = 0;
    int planes_sampled = 0;
    // Largest mixed-plane obstruction terms seen (the two fiber-independent
    // rows of the mixed sectional formula).
    double max_obstruction_hessian = 0.0;
    double max_obstruction_jdf = 0.0;
    std::vector<SignStatement> statements;
};

SignReport sign_property_check(const WarpedSpec& w, int npoints, int planes_per_point,
                               std::uint64_t seed, double tol = 1e-9);

// --- Cross-check driver shared by the CLI and the acceptance suite.

struct VerifyCase {
    std::string name;
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = true;
    std::string note;
};

struct VerifyReport {
    std::vector<VerifyCase> cases;
    bool pass = true;
};

// suite: connection | curvature | sectional | laplacian | qualar | nullsec | all
VerifyReport run_verify(const WarpedSpec& w, const std::string& suite, int npoints,
                        std::uint64_t seed, double tol = 1e-7);

} // namespace pwarp
