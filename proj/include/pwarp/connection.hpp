#pragma once

#include "pwarp/manifold.hpp"

namespace pwarp {

// Contravariant Christoffel symbols Gamma_m^{ij} at a fixed point.
struct ChristoffelTable {
    int dim = 0;
    std::vector<double> g;  // [m][i][j]

    double at(int m, int i, int j) const {
        return g[(static_cast<std::size_t>(m) * dim + i) * dim + j];
    }
    double& at(int m, int i, int j) {
        return g[(static_cast<std::size_t>(m) * dim + i) * dim + j];
    }
};

struct BilinearForm {
    int dim = 0;
    std::vector<double> v;  // [i][j]

    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * dim + j]; }
    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * dim + j]; }
};

ChristoffelTable christoffel(const ManifoldSpec& spec, std::span<const double> p);

// (D_omega eta)_m = omega_i eta_j Gamma_m^{ij} + omega_i Pi^{il} d_l eta_m, symbolic.
CoVectorField contravariant_derivative(const ManifoldSpec& spec, const CoVectorField& omega,
                                       const CoVectorField& eta);

// D^2_{omega,eta} u = sharp(omega)(sharp(eta)(u)) - sharp(D_omega eta)(u)
ScalarExpr second_derivative(const ManifoldSpec& spec, const CoVectorField& omega,
                             const CoVectorField& eta, const ScalarExpr& u);

// D^2_{omega,eta} T = D_omega(D_eta T) - D_{D_omega eta} T for a 1-form field T.
CoVectorField second_derivative(const ManifoldSpec& spec, const CoVectorField& omega,
                                const CoVectorField& eta, const CoVectorField& T);

// H[i][j] = sharp(dx_i)(sharp(dx_j)(phi)) - sharp(D_{dx_i} dx_j)(phi) at p.
BilinearForm hessian(const ManifoldSpec& spec, const ScalarExpr& phi, std::span<const double> p);

// Laplacian = - sum_a D^2_{theta^a,theta^a} u over the orthonormal coframe
// (plain sum, no signature weights).
double laplacian(const ManifoldSpec& spec, const ScalarExpr& u, std::span<const double> p);

} // namespace pwarp
