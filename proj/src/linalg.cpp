#include "pwarp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace pwarp {

namespace {

// LU factorization in place; returns determinant, leaves nothing reusable.
double lu_determinant(SquareMatrix m) {
    const int n = m.dim();
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m.at(r, col)) > std::fabs(m.at(pivot, col))) pivot = r;
        if (m.at(pivot, col) == 0) return 0.0;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(m.at(pivot, c), m.at(col, c));
            det = -det;
        }
        det *= m.at(col, col);
        for (int r = col + 1; r < n; ++r) {
            double f = m.at(r, col) / m.at(col, col);
            for (int c = col; c < n; ++c) m.at(r, c) -= f * m.at(col, c);
        }
    }
    return det;
}

} // namespace

double determinant(const SquareMatrix& m) { return lu_determinant(m); }

SquareMatrix invert(const SquareMatrix& m) {
    const int n = m.dim();
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
        double row_max = 0.0;
        for (int j = 0; j < n; ++j) row_max = std::max(row_max, std::fabs(m.at(i, j)));
        scale *= row_max;
    }
    double det = lu_determinant(m);
    if (std::fabs(det) <= 1e-12 * scale)
        throw Error(ErrorKind::SingularCometric, "matrix is singular to working tolerance");

    SquareMatrix a = m;
    SquareMatrix inv(n);
    for (int i = 0; i < n; ++i) inv.at(i, i) = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a.at(pivot, c), a.at(col, c));
                std::swap(inv.at(pivot, c), inv.at(col, c));
            }
        }
        double d = a.at(col, col);
        for (int c = 0; c < n; ++c) {
            a.at(col, c) /= d;
            inv.at(col, c) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a.at(r, col);
            if (f == 0) continue;
            for (int c = 0; c < n; ++c) {
                a.at(r, c) -= f * a.at(col, c);
                inv.at(r, c) -= f * inv.at(col, c);
            }
        }
    }
    return inv;
}

std::vector<double> symmetric_eigenvalues(const SquareMatrix& m) {
    const int n = m.dim();
    SquareMatrix a = m;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (apq == 0) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(t * t + 1);
                double s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    double api = a.at(p, i), aqi = a.at(q, i);
                    a.at(p, i) = c * api - s * aqi;
                    a.at(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a.at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double bilinear(const SquareMatrix& m, const std::vector<double>& v, const std::vector<double>& w) {
    double s = 0.0;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            s += v[static_cast<std::size_t>(i)] * m.at(i, j) * w[static_cast<std::size_t>(j)];
    return s;
}

} // namespace pwarp
