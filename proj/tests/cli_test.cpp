#include "doctest.h"
#include "support.hpp"

#include "pwarp/cli.hpp"
#include "pwarp/specfile.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace pwarp;
using namespace testsupport;

namespace {

const std::string kSpecDir = std::string(PWARP_SOURCE_DIR) + "/specs/";

struct CliResult {
    int code;
    std::string out;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out;
    int code = run_cli(args, out);
    return {code, out.str()};
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/pwarp_test_") + name;
    std::ofstream f(path);
    f << content;
    return path;
}

} // namespace

TEST_CASE("validate passes the shipped 2-dimensional specs") {
    for (const char* name : {"h2_1.spec", "e2_2.spec", "s2_0.spec", "m3_1.spec"}) {
        CliResult r = cli({"validate", kSpecDir + name});
        CHECK(r.code == 0);
        CHECK(contains(r.out, "status = ok"));
    }
}

TEST_CASE("validate fails the non-Jacobi spec with residual 1") {
    CliResult r = cli({"validate", kSpecDir + "jacobi_fail_3d.spec"});
    CHECK(r.code == 1);
    CHECK(contains(r.out, "jacobi.residual = 1"));
    CHECK(contains(r.out, "status = FAIL"));
}

TEST_CASE("lower-triangle bivector entries are load errors") {
    std::string path = write_temp("p21.spec",
                                  "[manifold]\nname = bad\ndim = 2\nindex = 0\ncoords = a, b\n"
                                  "[cometric]\ng11 = \"1\"\ng22 = \"1\"\n"
                                  "[bivector]\np21 = \"1\"\n");
    CliResult r = cli({"validate", path});
    CHECK(r.code == 2);
    CHECK(contains(r.out, "p21"));
    std::remove(path.c_str());
}

TEST_CASE("file parse errors carry line numbers") {
    std::string path = write_temp("badline.spec",
                                  "[manifold]\nname = b\ndim = 2\nindex = 0\ncoords = a, b\n"
                                  "oops\n");
    CliResult r = cli({"validate", path});
    CHECK(r.code == 2);
    CHECK(contains(r.out, ":6:"));
    std::remove(path.c_str());
}

TEST_CASE("sectional command reproduces the documented value") {
    CliResult r = cli({"sectional", kSpecDir + "h2_1.spec", "--at", "1.5,0.2", "--plane", "dx1",
                       "dx2"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "sectional.value = -4"));

    // Degenerate plane: distinct exit code.
    CliResult rd = cli({"sectional", kSpecDir + "h2_1.spec", "--at", "1.5,0.2", "--plane", "dx1",
                        "dx1"});
    CHECK(rd.code == 4);

    // Numeric covector syntax.
    CliResult rn =
        cli({"sectional", kSpecDir + "h2_1.spec", "--at", "1.5,0.2", "--plane", "1,0", "0,1"});
    CHECK(rn.code == 0);
    CHECK(contains(rn.out, "sectional.value = -4"));
}

TEST_CASE("qualar command") {
    CliResult r = cli({"qualar", kSpecDir + "h2_1.spec", "--at", "1.5,0.2"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "qualar.value = -8"));

    // Riemannian chart: warning, value 0.
    CliResult rs = cli({"qualar", kSpecDir + "s2_0.spec", "--at", "0.8,0.5"});
    CHECK(rs.code == 0);
    CHECK(contains(rs.out, "qualar.value = 0"));
    CHECK(contains(rs.out, "empty signature range"));
}

TEST_CASE("christoffel command prints expressions and values") {
    CliResult r = cli({"christoffel", kSpecDir + "h2_1.spec", "--at", "1.5,0.2"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "christoffel.1^12 = 2"));
    CHECK(contains(r.out, ".expr"));
}

TEST_CASE("laplacian and nullsec commands") {
    CliResult r = cli({"laplacian", kSpecDir + "h2_1.spec", "--at", "1.5,0.2", "--function", "x1"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "laplacian.value = -12"));  // -2 c^2 x1 with c = 2, x1 = 1.5

    CliResult rn = cli({"nullsec", kSpecDir + "m3_1.spec", "--at", "1.0,0.2,1.1"});
    CHECK(rn.code == 0);
    CHECK(contains(rn.out, "nullsec.K_1_2.dir3"));

    // 2-dimensional chart: no admissible direction.
    CliResult r2 = cli({"nullsec", kSpecDir + "h2_1.spec", "--at", "1.5,0.2"});
    CHECK(r2.code == 0);
    CHECK(contains(r2.out, "no admissible direction"));
}

TEST_CASE("scalar and ricci commands") {
    CliResult r = cli({"scalar", kSpecDir + "h2_1.spec", "--at", "1.5,0.2"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "scalar.value = 8"));  // 2 c^2, c = 2

    CliResult rr = cli({"ricci", kSpecDir + "h2_1.spec", "--at", "1.5,0.2", "--plane", "dx1",
                        "dx1"});
    CHECK(rr.code == 0);
    CHECK(contains(rr.out, "ricci.value = 4"));
}

TEST_CASE("verify command on warped files") {
    CliResult r = cli({"verify", kSpecDir + "h2xs2_generic.warp", "--suite", "qualar", "--points",
                       "8", "--seed", "7"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "qualar.closed_form.pass = true"));

    CliResult rbad = cli({"verify", kSpecDir + "h2xs2_generic.warp", "--points", "0"});
    CHECK(rbad.code == 2);

    CliResult rfile = cli({"verify", kSpecDir + "h2_1.spec"});
    CHECK(rfile.code == 2);
}

TEST_CASE("json output is byte-identical across repeated invocations") {
    std::vector<std::string> args = {"verify", kSpecDir + "h2xe2_const.warp", "--suite",
                                     "sectional", "--points", "6", "--seed", "42", "--json"};
    CliResult a = cli(args);
    CliResult b = cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(contains(a.out, "status=ok"));

    std::vector<std::string> cargs = {"qualar", kSpecDir + "h2_1.spec", "--at", "1.5,0.2",
                                      "--json"};
    CHECK(cli(cargs).out == cli(cargs).out);
}

TEST_CASE("expression syntax errors exit with the parse code") {
    CliResult r = cli({"laplacian", kSpecDir + "h2_1.spec", "--at", "1.5,0.2", "--function",
                       "x1 +* 2"});
    CHECK(r.code == 2);
    CHECK(contains(r.out, "offset 4"));
}

TEST_CASE("points outside the declared box warn but compute") {
    CliResult r = cli({"sectional", kSpecDir + "h2_1.spec", "--at", "5.0,0.0", "--plane", "dx1",
                       "dx2"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "outside the declared sampling box"));
}

TEST_CASE("curvature command prints nonzero tensor components") {
    CliResult r = cli({"curvature", kSpecDir + "h2_1.spec", "--at", "1.5,0.2"});
    CHECK(r.code == 0);
    // R(dx1,dx2)dx2 = -c^2 dx1 with c = 2.
    CHECK(contains(r.out, "curvature.R122^1 = -4"));
}

TEST_CASE("compute commands work on warped files via the assembled chart") {
    CliResult r = cli({"sectional", kSpecDir + "h2xs2_const.warp", "--at", "1.5,0.2,0.8,0.5",
                       "--plane", "dx1", "dx2"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "sectional.value = -4"));

    CliResult q = cli({"qualar", kSpecDir + "h2xe2_const.warp", "--at", "1.5,0.2,0.9,0.1"});
    CHECK(q.code == 0);
    CHECK(contains(q.out, "qualar.value = -8"));
}

TEST_CASE("lifted-form wrapper round-trips through the lift") {
    WarpedSpec w = load_warped_file(kSpecDir + "h2xs2_const.warp");
    LiftedForm form;
    form.part = LiftPart::Vertical;
    form.components = coordinate_form_field(w.fiber(), 1);
    CoVectorField lifted = lift_field(w, form);
    std::vector<double> p = {1.0, 0.2, 0.8, 0.5};
    CoVector v = lifted.at(p, w.assembled().params());
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
    CHECK(v[2] == 0.0);
    CHECK(v[3] == 1.0);
}

TEST_CASE("warp loading resolves relative factor paths") {
    WarpedSpec w = load_warped_file(kSpecDir + "h2xs2_const.warp");
    CHECK(w.base().name() == "H2_1");
    CHECK(w.fiber().name() == "S2_0");
    CHECK(w.assembled().dim() == 4);
    CHECK(w.assembled().index() == 1);
}
