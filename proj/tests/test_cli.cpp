#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

using namespace psatz;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

RunResult run_cli(const std::string& args) {
    const std::string out_path = "/tmp/psatz_test_stdout.txt";
    const std::string cmd = std::string(PSATZ_CLI_BIN) + " " + args + " > " + out_path + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    return r;
}

const char* kWorkedProblem = "vars 1;\ntarget matrix [[2, x1],[x1, 1 + x1^2]];\n";

}  // namespace

TEST_CASE("cli certify, verify, and mutate") {
    spit("/tmp/psatz_worked.prob", kWorkedProblem);

    RunResult c = run_cli("certify /tmp/psatz_worked.prob --out /tmp/psatz_worked.cert --seed 1");
    REQUIRE(c.exit_code == 0);

    CertificateFile cf = parse_certificate(slurp("/tmp/psatz_worked.cert"));
    const Poly x = Poly::variable(1, 0);
    const Poly expect = Poly::constant(1, Rat(47)) + Rat(40) * x * x + Rat(8) * x.pow(4);
    REQUIRE(cf.find_witness("t"));
    CHECK(cf.find_witness("t")->expand().at(0, 0) == expect);

    RunResult v = run_cli("verify /tmp/psatz_worked.prob --cert /tmp/psatz_worked.cert");
    CHECK(v.exit_code == 0);
    CHECK(v.out == "VERIFIED\n");

    RunResult vs = run_cli(
        "verify /tmp/psatz_worked.prob --cert /tmp/psatz_worked.cert --sample-points 50 "
        "--box -2 2 --seed 3 --tol 1e-6");
    CHECK(vs.exit_code == 0);

    SUBCASE("a mutated certificate file fails verification") {
        std::mt19937_64 rng(71);
        CertificateFile broken = cf;
        PreorderWitness v2 = *broken.find_witness("V");
        REQUIRE(psatz::testing::mutate_witness(v2, rng));
        broken.witnesses[1] = {"V", v2};
        spit("/tmp/psatz_broken.cert", serialize_certificate(broken));
        RunResult bad = run_cli("verify /tmp/psatz_worked.prob --cert /tmp/psatz_broken.cert");
        CHECK(bad.exit_code == 1);
        CHECK(bad.out == "INVALID\n");
    }
    SUBCASE("verifying against the wrong problem fails") {
        spit("/tmp/psatz_other.prob", "vars 1;\ntarget matrix [[3, x1],[x1, 1 + x1^2]];\n");
        RunResult bad = run_cli("verify /tmp/psatz_other.prob --cert /tmp/psatz_worked.cert");
        CHECK(bad.exit_code == 1);
    }
}

TEST_CASE("cli epsilon certification") {
    spit("/tmp/psatz_twoi.prob", "vars 1;\ntarget matrix [[2, 0],[0, 2]];\n");
    RunResult c = run_cli("eps-certify /tmp/psatz_twoi.prob --out /tmp/psatz_twoi.cert --seed 1");
    REQUIRE(c.exit_code == 0);
    CertificateFile cf = parse_certificate(slurp("/tmp/psatz_twoi.cert"));
    REQUIRE(cf.eps.has_value());
    CHECK(*cf.eps == 1);
    CHECK(cf.kind == CertificateKind::EpsPreorder);
    RunResult v = run_cli("verify /tmp/psatz_twoi.prob --cert /tmp/psatz_twoi.cert");
    CHECK(v.exit_code == 0);
}

TEST_CASE("cli scalar path and strategies") {
    spit("/tmp/psatz_scalar.prob", "vars 1;\ntarget poly x1^2 - x1 + 1;\n");
    RunResult c =
        run_cli("scalar-certify /tmp/psatz_scalar.prob --out /tmp/psatz_scalar.cert --seed 1");
    REQUIRE(c.exit_code == 0);
    RunResult v = run_cli("verify /tmp/psatz_scalar.prob --cert /tmp/psatz_scalar.cert");
    CHECK(v.exit_code == 0);

    SUBCASE("file strategy reuses a stored certificate") {
        spit("/tmp/psatz_scalar2.prob", "vars 1;\ntarget poly x1^2 - x1 + 1;\n");
        RunResult c2 = run_cli(
            "scalar-certify /tmp/psatz_scalar2.prob --strategy file "
            "--cert /tmp/psatz_scalar.cert --out /tmp/psatz_scalar2.cert");
        CHECK(c2.exit_code == 0);
    }
    SUBCASE("scalar-certify rejects matrix targets") {
        spit("/tmp/psatz_mat.prob", kWorkedProblem);
        RunResult bad = run_cli("scalar-certify /tmp/psatz_mat.prob");
        CHECK(bad.exit_code == 3);
    }
}

TEST_CASE("cli exit codes") {
    SUBCASE("syntax errors exit 3") {
        spit("/tmp/psatz_bad.prob", "vars 1; target poly 1 + y;");
        RunResult r = run_cli("certify /tmp/psatz_bad.prob");
        CHECK(r.exit_code == 3);
    }
    SUBCASE("missing file exits 3") {
        RunResult r = run_cli("certify /tmp/psatz_does_not_exist.prob");
        CHECK(r.exit_code == 3);
    }
    SUBCASE("inconclusive searches exit 2") {
        spit("/tmp/psatz_neg.prob", "vars 1;\ntarget matrix [[x1, 0],[0, 1]];\n");
        RunResult r = run_cli("certify /tmp/psatz_neg.prob --max-iters 200");
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("cli lemma-bound and eval") {
    SUBCASE("lemma bound prints k, l, and a witness") {
        spit("/tmp/psatz_lb.prob", "vars 1;\ntarget matrix [[x1]];\n");
        RunResult r = run_cli("lemma-bound /tmp/psatz_lb.prob");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("k 1/1") != std::string::npos);
        CHECK(r.out.find("l 1") != std::string::npos);
        CHECK(r.out.find("witness sigma") != std::string::npos);
    }
    SUBCASE("lemma bound accepts asymmetric targets") {
        spit("/tmp/psatz_lb2.prob", "vars 1;\ntarget matrix [[x1, 1],[0, x1]];\n");
        RunResult r = run_cli("lemma-bound /tmp/psatz_lb2.prob");
        CHECK(r.exit_code == 0);
    }
    SUBCASE("eval prints exact values") {
        spit("/tmp/psatz_eval.prob", "vars 2;\ntarget poly x1*x2 - 2;\n");
        RunResult r = run_cli("eval /tmp/psatz_eval.prob --point 1/2,4");
        CHECK(r.exit_code == 0);
        CHECK(r.out == "value 0\n");
    }
    SUBCASE("eval on a matrix target") {
        spit("/tmp/psatz_evalm.prob", kWorkedProblem);
        RunResult r = run_cli("eval /tmp/psatz_evalm.prob --point 1");
        CHECK(r.exit_code == 0);
        CHECK(r.out == "2 1\n1 2\n");
    }
}

TEST_CASE("cli output is deterministic under a fixed seed") {
    spit("/tmp/psatz_det.prob", kWorkedProblem);
    RunResult a = run_cli("certify /tmp/psatz_det.prob --out /tmp/psatz_det_a.cert --seed 9");
    RunResult b = run_cli("certify /tmp/psatz_det.prob --out /tmp/psatz_det_b.cert --seed 9");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(slurp("/tmp/psatz_det_a.cert") == slurp("/tmp/psatz_det_b.cert"));
    CHECK(a.out == b.out);
}
