#pragma once

#include "pwarp/error.hpp"

#include <cstddef>
#include <vector>

namespace pwarp {

// Dense square matrix, row-major.  Sized for chart dimensions (k <= ~6).
class SquareMatrix {
  public:
    SquareMatrix() = default;
    explicit SquareMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    int dim() const { return n_; }
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  private:
    int n_ = 0;
    std::vector<double> a_;
};

double determinant(const SquareMatrix& m);

// Gauss-Jordan inverse with partial pivoting.  Rejects matrices whose
// determinant is below 1e-12 times the product of row max-norms.
SquareMatrix invert(const SquareMatrix& m);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const SquareMatrix& m);

// v^T m w
double bilinear(const SquareMatrix& m, const std::vector<double>& v, const std::vector<double>& w);

} // namespace pwarp
