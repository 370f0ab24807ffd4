#pragma once

#include "pwarp/manifold.hpp"

namespace pwarp {

// Pseudo-orthonormal coframe at a point, timelike rows first:
// g~(theta^a, theta^b) = signs[a] delta_ab with signs = (-1 x q, +1 x (k-q)).
struct OrthonormalCoframe {
    std::vector<CoVector> rows;
    std::vector<int> signs;

    int dim() const { return static_cast<int>(rows.size()); }
};

// R[i][j][k][m]: m-th component of R(dx_i, dx_j) dx_k at the point.
struct CurvatureAtPoint {
    int dim = 0;
    std::vector<double> r;

    double at(int i, int j, int k, int m) const {
        return r[((static_cast<std::size_t>(i) * dim + j) * dim + k) * dim + m];
    }
    double& at(int i, int j, int k, int m) {
        return r[((static_cast<std::size_t>(i) * dim + j) * dim + k) * dim + m];
    }
};

// Lightlike pair built from coframe rows i (timelike) and s (spacelike):
// xi = (theta^i + theta^s)/sqrt(2), xibar = (-theta^i + theta^s)/sqrt(2).
struct NullForm {
    CoVector xi;
    CoVector xibar;
    int i = -1;  // timelike coframe row
    int s = -1;  // spacelike coframe row
};

struct QualarResult {
    double value = 0.0;
    bool empty_signature_range = false;  // q = 0 or q = k: the defining sum is empty
};

OrthonormalCoframe orthonormal_coframe(const ManifoldSpec& spec, std::span<const double> p);

CurvatureAtPoint curvature_at(const ManifoldSpec& spec, std::span<const double> p);

// g~(R(a,b)c, d) at p, given precomputed tables.
double curvature_pairing(const CurvatureAtPoint& R, const SquareMatrix& cometric, const CoVector& a,
                         const CoVector& b, const CoVector& c, const CoVector& d);

double sectional(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega,
                 const CoVector& eta);

double ricci(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega,
             const CoVector& eta);

double scalar_curvature(const ManifoldSpec& spec, std::span<const double> p);

// Q = 2 sum_{i<=q < s} K(theta^i, theta^s) over the orthonormal coframe.
QualarResult qualar(const ManifoldSpec& spec, std::span<const double> p);

std::vector<NullForm> null_forms(const ManifoldSpec& spec, std::span<const double> p);

// K(xi, theta_l) = g~(R(xi,theta_l)theta_l, xi) / g~(theta_l,theta_l)
// for lightlike xi and non-null theta_l.
double null_sectional(const ManifoldSpec& spec, std::span<const double> p, const CoVector& xi,
                      const CoVector& theta_l);

QualarResult qualar_via_null_forms(const ManifoldSpec& spec, std::span<const double> p);

} // namespace pwarp
