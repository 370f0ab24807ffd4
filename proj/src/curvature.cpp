#include "pwarp/curvature.hpp"

#include "pwarp/connection.hpp"

#include <cmath>

namespace pwarp {

OrthonormalCoframe orthonormal_coframe(const ManifoldSpec& spec, std::span<const double> p) {
    const int k = spec.dim();
    SquareMatrix G = cometric_at(spec, p);

    double gscale = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) gscale = std::max(gscale, std::fabs(G.at(i, j)));
    if (gscale == 0.0)
        throw Error(ErrorKind::SingularCometric, "cometric vanishes at the point");

    auto pair = [&](const std::vector<double>& a, const std::vector<double>& b) {
        return bilinear(G, a, b);
    };

    std::vector<std::vector<double>> built;
    std::vector<int> built_sign;
    std::vector<bool> used(static_cast<std::size_t>(k), false);

    for (int step = 0; step < k; ++step) {
        // Project every unused coordinate form against the rows built so far
        // and pick the one with the largest |g~(v,v)| remaining.
        int best = -1;
        double best_norm = 0.0;
        std::vector<double> best_v;
        for (int c = 0; c < k; ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            std::vector<double> v(static_cast<std::size_t>(k), 0.0);
            v[static_cast<std::size_t>(c)] = 1.0;
            for (std::size_t b = 0; b < built.size(); ++b) {
                double coeff = built_sign[b] * pair(v, built[b]);
                for (int m = 0; m < k; ++m)
                    v[static_cast<std::size_t>(m)] -= coeff * built[b][static_cast<std::size_t>(m)];
            }
            double n = pair(v, v);
            if (std::fabs(n) > std::fabs(best_norm)) {
                best = c;
                best_norm = n;
                best_v = std::move(v);
            }
        }
        if (best < 0 || std::fabs(best_norm) <= 1e-12 * gscale)
            throw Error(ErrorKind::CoframeConstruction,
                        "Gram-Schmidt hit a degenerate direction at the point");
        used[static_cast<std::size_t>(best)] = true;
        double inv = 1.0 / std::sqrt(std::fabs(best_norm));
        for (double& x : best_v) x *= inv;
        built.push_back(std::move(best_v));
        built_sign.push_back(best_norm > 0 ? 1 : -1);
    }

    int negatives = 0;
    for (int s : built_sign)
        if (s < 0) ++negatives;
    if (negatives != spec.index())
        throw Error(ErrorKind::CoframeConstruction,
                    "cometric signature at the point does not match the declared index");

    OrthonormalCoframe frame;
    for (int pass = 0; pass < 2; ++pass) {
        int want = pass == 0 ? -1 : 1;
        for (std::size_t b = 0; b < built.size(); ++b) {
            if (built_sign[b] != want) continue;
            frame.rows.push_back(CoVector(built[b]));
            frame.signs.push_back(built_sign[b]);
        }
    }
    return frame;
}

CurvatureAtPoint curvature_at(const ManifoldSpec& spec, std::span<const double> p) {
    metric_at(spec, p);  // SingularCometric check
    const int k = spec.dim();
    const auto& t = spec.geom();
    const auto& params = spec.params();

    // Numeric tables at p.
    std::vector<double> Pi(static_cast<std::size_t>(k) * k);
    std::vector<double> dPi(static_cast<std::size_t>(k) * k * k);
    std::vector<double> Ga(static_cast<std::size_t>(k) * k * k);
    std::vector<double> dGa(static_cast<std::size_t>(k) * k * k * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            Pi[static_cast<std::size_t>(i) * k + j] = t.Pi(i, j).eval(p, params);
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                dPi[(static_cast<std::size_t>(l) * k + i) * k + j] = t.DPi(l, i, j).eval(p, params);
    for (int m = 0; m < k; ++m)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                Ga[(static_cast<std::size_t>(m) * k + i) * k + j] = t.Gamma(m, i, j).eval(p, params);
    for (int l = 0; l < k; ++l)
        for (int m = 0; m < k; ++m)
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    dGa[((static_cast<std::size_t>(l) * k + m) * k + i) * k + j] =
                        t.DGamma(l, m, i, j).eval(p, params);

    auto pi = [&](int i, int j) { return Pi[static_cast<std::size_t>(i) * k + j]; };
    auto dpi = [&](int l, int i, int j) {
        return dPi[(static_cast<std::size_t>(l) * k + i) * k + j];
    };
    auto ga = [&](int m, int i, int j) {
        return Ga[(static_cast<std::size_t>(m) * k + i) * k + j];
    };
    auto dga = [&](int l, int m, int i, int j) {
        return dGa[((static_cast<std::size_t>(l) * k + m) * k + i) * k + j];
    };

    // R(dx_i,dx_j)dx_c = [ Pi^{il} d_l Gamma_m^{jc} - Pi^{jl} d_l Gamma_m^{ic}
    //   + Gamma_n^{jc} Gamma_m^{in} - Gamma_n^{ic} Gamma_m^{jn}
    //   - (d_l Pi^{ij}) Gamma_m^{lc} ] dx_m
    CurvatureAtPoint R;
    R.dim = k;
    R.r.assign(static_cast<std::size_t>(k) * k * k * k, 0.0);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            for (int c = 0; c < k; ++c) {
                for (int m = 0; m < k; ++m) {
                    double acc = 0.0;
                    for (int l = 0; l < k; ++l) {
                        acc += pi(i, l) * dga(l, m, j, c);
                        acc -= pi(j, l) * dga(l, m, i, c);
                        acc -= dpi(l, i, j) * ga(m, l, c);
                    }
                    for (int n = 0; n < k; ++n) {
                        acc += ga(n, j, c) * ga(m, i, n);
                        acc -= ga(n, i, c) * ga(m, j, n);
                    }
                    R.at(i, j, c, m) = acc;
                }
            }
        }
    }
    return R;
}

double curvature_pairing(const CurvatureAtPoint& R, const SquareMatrix& cometric, const CoVector& a,
                         const CoVector& b, const CoVector& c, const CoVector& d) {
    const int k = R.dim;
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < k; ++j) {
            if (b[j] == 0) continue;
            for (int kk = 0; kk < k; ++kk) {
                if (c[kk] == 0) continue;
                for (int m = 0; m < k; ++m) {
                    double rm = R.at(i, j, kk, m);
                    if (rm == 0) continue;
                    double w = a[i] * b[j] * c[kk] * rm;
                    for (int n = 0; n < k; ++n) acc += w * cometric.at(m, n) * d[n];
                }
            }
        }
    }
    return acc;
}

namespace {

// Scale-invariant nondegeneracy guard for the plane (omega, eta).
double plane_scale(const SquareMatrix& G, const CoVector& omega, const CoVector& eta) {
    const int k = G.dim();
    auto weighted = [&](const CoVector& v) {
        double s = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) s += std::fabs(v[i]) * std::fabs(G.at(i, j)) * std::fabs(v[j]);
        return s;
    };
    return weighted(omega) * weighted(eta);
}

} // namespace

double sectional(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega,
                 const CoVector& eta) {
    SquareMatrix G = cometric_at(spec, p);
    double goo = bilinear(G, omega.c, omega.c);
    double gee = bilinear(G, eta.c, eta.c);
    double goe = bilinear(G, omega.c, eta.c);
    double denom = goo * gee - goe * goe;
    double scale = plane_scale(G, omega, eta);
    if (std::fabs(denom) <= 1e-10 * scale)
        throw Error(ErrorKind::DegeneratePlane,
                    "plane is degenerate or the forms are dependent; use null_sectional for null planes");
    CurvatureAtPoint R = curvature_at(spec, p);
    return curvature_pairing(R, G, omega, eta, eta, omega) / denom;
}

double ricci(const ManifoldSpec& spec, std::span<const double> p, const CoVector& omega,
             const CoVector& eta) {
    OrthonormalCoframe frame = orthonormal_coframe(spec, p);
    SquareMatrix G = cometric_at(spec, p);
    CurvatureAtPoint R = curvature_at(spec, p);
    double acc = 0.0;
    for (int a = 0; a < frame.dim(); ++a)
        acc += curvature_pairing(R, G, omega, frame.rows[static_cast<std::size_t>(a)],
                                 frame.rows[static_cast<std::size_t>(a)], eta);
    return acc;
}

double scalar_curvature(const ManifoldSpec& spec, std::span<const double> p) {
    OrthonormalCoframe frame = orthonormal_coframe(spec, p);
    SquareMatrix G = cometric_at(spec, p);
    CurvatureAtPoint R = curvature_at(spec, p);
    double acc = 0.0;
    for (int a = 0; a < frame.dim(); ++a)
        for (int b = 0; b < frame.dim(); ++b)
            acc += curvature_pairing(R, G, frame.rows[static_cast<std::size_t>(a)],
                                     frame.rows[static_cast<std::size_t>(b)],
                                     frame.rows[static_cast<std::size_t>(b)],
                                     frame.rows[static_cast<std::size_t>(a)]);
    return acc;
}

QualarResult qualar(const ManifoldSpec& spec, std::span<const double> p) {
    const int k = spec.dim();
    const int q = spec.index();
    QualarResult res;
    if (q == 0 || q == k) {
        res.empty_signature_range = true;
        return res;
    }
    OrthonormalCoframe frame = orthonormal_coframe(spec, p);
    double acc = 0.0;
    for (int i = 0; i < q; ++i)
        for (int s = q; s < k; ++s)
            acc += sectional(spec, p, frame.rows[static_cast<std::size_t>(i)],
                             frame.rows[static_cast<std::size_t>(s)]);
    res.value = 2.0 * acc;
    return res;
}

std::vector<NullForm> null_forms(const ManifoldSpec& spec, std::span<const double> p) {
    const int k = spec.dim();
    const int q = spec.index();
    OrthonormalCoframe frame = orthonormal_coframe(spec, p);
    std::vector<NullForm> out;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < q; ++i) {
        for (int s = q; s < k; ++s) {
            NullForm nf;
            nf.i = i;
            nf.s = s;
            nf.xi = CoVector(std::vector<double>(static_cast<std::size_t>(k), 0.0));
            nf.xibar = CoVector(std::vector<double>(static_cast<std::size_t>(k), 0.0));
            for (int m = 0; m < k; ++m) {
                double ti = frame.rows[static_cast<std::size_t>(i)][m];
                double ts = frame.rows[static_cast<std::size_t>(s)][m];
                nf.xi[m] = inv_sqrt2 * (ti + ts);
                nf.xibar[m] = inv_sqrt2 * (-ti + ts);
            }
            out.push_back(std::move(nf));
        }
    }
    return out;
}

double null_sectional(const ManifoldSpec& spec, std::span<const double> p, const CoVector& xi,
                      const CoVector& theta_l) {
    SquareMatrix G = cometric_at(spec, p);
    double gxx = bilinear(G, xi.c, xi.c);
    double scale = plane_scale(G, xi, xi) + 1e-300;
    if (std::fabs(gxx) > 1e-10 * std::sqrt(scale) + 1e-10)
        throw Error(ErrorKind::NotNull, "xi is not lightlike at the point");
    double gll = bilinear(G, theta_l.c, theta_l.c);
    double lscale = plane_scale(G, theta_l, theta_l);
    if (std::fabs(gll) <= 1e-10 * std::sqrt(lscale) + 1e-300)
        throw Error(ErrorKind::DegenerateDirection, "theta_l must be non-null");
    CurvatureAtPoint R = curvature_at(spec, p);
    return curvature_pairing(R, G, xi, theta_l, theta_l, xi) / gll;
}

QualarResult qualar_via_null_forms(const ManifoldSpec& spec, std::span<const double> p) {
    const int k = spec.dim();
    const int q = spec.index();
    QualarResult res;
    if (q == 0 || q == k) {
        res.empty_signature_range = true;
        return res;
    }
    double acc = 0.0;
    for (const NullForm& nf : null_forms(spec, p)) acc += sectional(spec, p, nf.xi, nf.xibar);
    res.value = 2.0 * acc;
    return res;
}

} // namespace pwarp
