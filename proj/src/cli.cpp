#include "pwarp/cli.hpp"

#include "pwarp/connection.hpp"
#include "pwarp/curvature.hpp"
#include "pwarp/specfile.hpp"
#include "pwarp/warped.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

namespace pwarp {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Accumulates `key=value` rows; json mode prints them verbatim (bit-stable,
// no timing), human mode adds a status banner and elapsed time.
struct Report {
    std::vector<std::pair<std::string, std::string>> rows;
    bool json = false;
    bool failed = false;

    void put(const std::string& key, const std::string& value) { rows.emplace_back(key, value); }
    void put(const std::string& key, double value) { rows.emplace_back(key, fmt(value)); }

    void emit(std::ostream& out, double elapsed_ms) const {
        if (json) {
            for (const auto& [k, v] : rows) out << k << "=" << v << "\n";
            out << "status=" << (failed ? "fail" : "ok") << "\n";
        } else {
            for (const auto& [k, v] : rows) out << k << " = " << v << "\n";
            out << "elapsed_ms = " << fmt(elapsed_ms) << "\n";
            out << "status = " << (failed ? "FAIL" : "ok") << "\n";
        }
    }
};

struct Options {
    std::string command;
    std::string file;
    std::vector<double> at;
    std::vector<std::string> plane;
    std::string function_src;
    std::optional<std::pair<int, int>> pair;
    std::optional<int> dir;
    std::string suite = "all";
    int points = 20;
    std::uint64_t seed = 0;
    double tol = -1.0;  // per-command default when negative
    bool json = false;
};

[[noreturn]] void usage_error(const std::string& what) {
    throw Error(ErrorKind::Usage, what);
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) usage_error("malformed number '" + item + "'");
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            usage_error("malformed number '" + item + "'");
        }
    }
    return out;
}

Options parse_args(const std::vector<std::string>& args) {
    if (args.empty()) usage_error("usage: pwarp <command> <file> [options]");
    Options o;
    o.command = args[0];
    std::size_t i = 1;
    if (i < args.size() && args[i].rfind("--", 0) != 0) o.file = args[i++];
    for (; i < args.size(); ++i) {
        const std::string& a = args[i];
        auto need_value = [&]() -> const std::string& {
            if (i + 1 >= args.size()) usage_error("flag " + a + " needs a value");
            return args[++i];
        };
        if (a == "--at") o.at = parse_csv_doubles(need_value());
        else if (a == "--plane") {
            o.plane.push_back(need_value());
            if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0)
                o.plane.push_back(args[++i]);
        } else if (a == "--function") o.function_src = need_value();
        else if (a == "--pair") {
            auto v = parse_csv_doubles(need_value());
            if (v.size() != 2) usage_error("--pair wants 'i,s'");
            o.pair = {static_cast<int>(v[0]), static_cast<int>(v[1])};
        } else if (a == "--dir") o.dir = static_cast<int>(parse_csv_doubles(need_value())[0]);
        else if (a == "--suite") o.suite = need_value();
        else if (a == "--points") o.points = static_cast<int>(parse_csv_doubles(need_value())[0]);
        else if (a == "--seed") o.seed = static_cast<std::uint64_t>(parse_csv_doubles(need_value())[0]);
        else if (a == "--tol") o.tol = parse_csv_doubles(need_value())[0];
        else if (a == "--json") o.json = true;
        else usage_error("unknown flag '" + a + "'");
    }
    if (o.file.empty()) usage_error("missing input file");
    return o;
}

bool is_warp_file(const std::string& path) {
    return path.size() >= 5 && path.substr(path.size() - 5) == ".warp";
}

CoVector parse_covector(const ManifoldSpec& spec, const std::string& token) {
    if (!token.empty() && token[0] == 'd') {
        std::string name = token.substr(1);
        for (int i = 0; i < spec.dim(); ++i)
            if (spec.coords()[i] == name) return coordinate_form(spec, i);
    }
    auto comps = parse_csv_doubles(token);
    if (static_cast<int>(comps.size()) != spec.dim())
        usage_error("covector '" + token + "' does not match the chart dimension");
    return CoVector(comps);
}

void require_point(const Options& o, const ManifoldSpec& spec, Report& rep) {
    if (static_cast<int>(o.at.size()) != spec.dim())
        usage_error("--at needs " + std::to_string(spec.dim()) + " comma-separated values");
    for (int i = 0; i < spec.dim(); ++i) {
        auto [lo, hi] = spec.box()[i];
        if (o.at[static_cast<std::size_t>(i)] < lo || o.at[static_cast<std::size_t>(i)] > hi) {
            rep.put("warning", "point lies outside the declared sampling box");
            break;
        }
    }
}

int cmd_validate(const Options& o, Report& rep) {
    double tol = o.tol > 0 ? o.tol : 1e-8;
    if (is_warp_file(o.file)) {
        WarpedSpec w = load_warped_file(o.file);
        rep.put("warped.base", w.base().name());
        rep.put("warped.fiber", w.fiber().name());
        rep.put("warped.dim", static_cast<double>(w.assembled().dim()));
        rep.put("warped.index", static_cast<double>(w.assembled().index()));
        PointSampler sampler(
            std::vector<Interval>(w.assembled().box().begin(), w.assembled().box().end()), o.seed);
        auto pts = sampler.take(std::max(o.points, 1));
        for (const auto& p : pts) check_signature_at(w.assembled(), p);
        rep.put("signature.checked_points", static_cast<double>(pts.size()));
        std::vector<std::vector<double>> base_pts;
        for (const auto& p : pts) base_pts.push_back(w.base_point(p));
        PoissonReport pr = validate_poisson(w.base(), base_pts, tol);
        rep.put("base.jacobi_residual", pr.worst_residual);
        std::vector<std::vector<double>> fiber_pts;
        for (const auto& p : pts) fiber_pts.push_back(w.fiber_point(p));
        PoissonReport pf = validate_poisson(w.fiber(), fiber_pts, tol);
        rep.put("fiber.jacobi_residual", pf.worst_residual);
        bool pass = pr.pass && pf.pass;
        rep.failed = !pass;
        return pass ? 0 : 1;
    }
    ManifoldSpec spec = load_manifold_file(o.file);
    rep.put("manifold.name", spec.name());
    rep.put("manifold.dim", static_cast<double>(spec.dim()));
    rep.put("manifold.index", static_cast<double>(spec.index()));
    PointSampler sampler(std::vector<Interval>(spec.box().begin(), spec.box().end()), o.seed);
    auto pts = sampler.take(std::max(o.points, 1) > 50 ? o.points : 50);
    for (const auto& p : pts) check_signature_at(spec, p);
    rep.put("signature.checked_points", static_cast<double>(pts.size()));
    PoissonReport pr = validate_poisson(spec, pts, tol);
    rep.put("jacobi.residual", pr.worst_residual);
    rep.put("jacobi.pass", pr.pass ? "true" : "false");
    rep.failed = !pr.pass;
    return pr.pass ? 0 : 1;
}

int cmd_compute(const Options& o, Report& rep) {
    ManifoldSpec spec = is_warp_file(o.file) ? load_warped_file(o.file).assembled()
                                             : load_manifold_file(o.file);
    require_point(o, spec, rep);
    std::span<const double> p(o.at);
    rep.put("spec.name", spec.name());

    if (o.command == "christoffel") {
        ChristoffelTable t = christoffel(spec, p);
        for (int m = 0; m < spec.dim(); ++m)
            for (int i = 0; i < spec.dim(); ++i)
                for (int j = 0; j < spec.dim(); ++j) {
                    const ScalarExpr& e = spec.geom().Gamma(m, i, j);
                    if (e.is_zero() && t.at(m, i, j) == 0) continue;
                    std::string key = "christoffel." + std::to_string(m + 1) + "^" +
                                      std::to_string(i + 1) + std::to_string(j + 1);
                    rep.put(key, t.at(m, i, j));
                    if (!o.json) rep.put(key + ".expr", to_string(e));
                }
        return 0;
    }
    if (o.command == "curvature") {
        CurvatureAtPoint R = curvature_at(spec, p);
        // Symbolic component, assembled from the cached Gamma tables:
        // R(dx_i,dx_j)dx_k|_m = Pi^{il} d_l Gamma_m^{jk} - Pi^{jl} d_l Gamma_m^{ik}
        //   + Gamma_n^{jk} Gamma_m^{in} - Gamma_n^{ik} Gamma_m^{jn}
        //   - (d_l Pi^{ij}) Gamma_m^{lk}
        const auto& t = spec.geom();
        auto component_expr = [&](int i, int j, int kk, int m) {
            ScalarExpr acc = ex_const(0);
            for (int l = 0; l < spec.dim(); ++l) {
                acc = ex_add(acc, ex_mul(t.Pi(i, l), t.DGamma(l, m, j, kk)));
                acc = ex_sub(acc, ex_mul(t.Pi(j, l), t.DGamma(l, m, i, kk)));
                acc = ex_sub(acc, ex_mul(t.DPi(l, i, j), t.Gamma(m, l, kk)));
            }
            for (int n = 0; n < spec.dim(); ++n) {
                acc = ex_add(acc, ex_mul(t.Gamma(n, j, kk), t.Gamma(m, i, n)));
                acc = ex_sub(acc, ex_mul(t.Gamma(n, i, kk), t.Gamma(m, j, n)));
            }
            return acc;
        };
        for (int i = 0; i < spec.dim(); ++i)
            for (int j = 0; j < spec.dim(); ++j)
                for (int kk = 0; kk < spec.dim(); ++kk)
                    for (int m = 0; m < spec.dim(); ++m) {
                        double v = R.at(i, j, kk, m);
                        if (v == 0) continue;
                        std::string key = "curvature.R" + std::to_string(i + 1) +
                                          std::to_string(j + 1) + std::to_string(kk + 1) + "^" +
                                          std::to_string(m + 1);
                        rep.put(key, v);
                        if (!o.json) rep.put(key + ".expr", to_string(component_expr(i, j, kk, m)));
                    }
        return 0;
    }
    if (o.command == "sectional") {
        if (o.plane.size() != 2) usage_error("sectional needs --plane <covector> <covector>");
        double k = sectional(spec, p, parse_covector(spec, o.plane[0]),
                             parse_covector(spec, o.plane[1]));
        rep.put("sectional.value", k);
        return 0;
    }
    if (o.command == "ricci") {
        if (o.plane.size() != 2) usage_error("ricci needs --plane <covector> <covector>");
        double v = ricci(spec, p, parse_covector(spec, o.plane[0]),
                         parse_covector(spec, o.plane[1]));
        rep.put("ricci.value", v);
        return 0;
    }
    if (o.command == "scalar") {
        rep.put("scalar.value", scalar_curvature(spec, p));
        return 0;
    }
    if (o.command == "qualar") {
        QualarResult q = qualar(spec, p);
        rep.put("qualar.value", q.value);
        if (q.empty_signature_range)
            rep.put("qualar.warning", "empty signature range (q = 0 or q = dim)");
        QualarResult qn = qualar_via_null_forms(spec, p);
        rep.put("qualar.via_null_forms", qn.value);
        return 0;
    }
    if (o.command == "nullsec") {
        auto forms = null_forms(spec, p);
        if (forms.empty()) rep.put("nullsec.note", "no timelike-spacelike coframe pairs");
        OrthonormalCoframe frame = orthonormal_coframe(spec, p);
        int printed = 0;
        for (const auto& nf : forms) {
            if (o.pair && (o.pair->first != nf.i + 1 || o.pair->second != nf.s + 1)) continue;
            for (int l = 0; l < frame.dim(); ++l) {
                if (l == nf.i || l == nf.s) continue;
                if (o.dir && *o.dir != l + 1) continue;
                double v = null_sectional(spec, p, nf.xi, frame.rows[static_cast<std::size_t>(l)]);
                rep.put("nullsec.K_" + std::to_string(nf.i + 1) + "_" + std::to_string(nf.s + 1) +
                            ".dir" + std::to_string(l + 1),
                        v);
                ++printed;
            }
        }
        if (!forms.empty() && printed == 0)
            rep.put("nullsec.note", "no admissible direction (need l distinct from i, s)");
        return 0;
    }
    if (o.command == "laplacian") {
        if (o.function_src.empty()) usage_error("laplacian needs --function <expr>");
        ScalarExpr u = parse_expr(o.function_src, spec.coords(), spec.params().names());
        rep.put("laplacian.value", laplacian(spec, u, p));
        return 0;
    }
    usage_error("unknown command '" + o.command + "'");
}

int cmd_verify(const Options& o, Report& rep) {
    if (!is_warp_file(o.file)) usage_error("verify expects a .warp file");
    if (o.points <= 0) usage_error("--points must be positive");
    WarpedSpec w = load_warped_file(o.file);
    double tol = o.tol > 0 ? o.tol : 1e-7;
    VerifyReport vr = run_verify(w, o.suite, o.points, o.seed, tol);
    rep.put("verify.suite", o.suite);
    rep.put("verify.points", static_cast<double>(o.points));
    rep.put("verify.seed", static_cast<double>(o.seed));
    for (const auto& c : vr.cases) {
        rep.put(c.name + ".residual", c.max_residual);
        rep.put(c.name + ".pass", c.pass ? "true" : "false");
        if (!c.note.empty()) rep.put(c.name + ".note", c.note);
    }
    rep.failed = !vr.pass;
    return vr.pass ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out) {
    auto start = std::chrono::steady_clock::now();
    Report rep;
    int code = 0;
    try {
        Options o = parse_args(args);
        rep.json = o.json;
        if (!o.json) {
            std::string echo = "pwarp";
            for (const auto& a : args) echo += " " + a;
            rep.put("command", echo);
        } else {
            rep.put("command", o.command);
            rep.put("file", o.file);
        }
        if (o.command == "validate") code = cmd_validate(o, rep);
        else if (o.command == "verify") code = cmd_verify(o, rep);
        else code = cmd_compute(o, rep);
    } catch (const Error& e) {
        rep.failed = true;
        std::string msg = e.what();
        if (e.offset() != Error::npos) msg += " (offset " + std::to_string(e.offset()) + ")";
        rep.put("error", msg);
        code = e.exit_code();
    }
    auto elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    rep.emit(out, elapsed.count());
    return code;
}

} // namespace pwarp
