#include "doctest.h"
#include "test_util.hpp"

using namespace psatz;

namespace {

const char* kWorkedProblem = "vars 1;\ntarget matrix [[2, x1],[x1, 1 + x1^2]];\n";

}  // namespace

TEST_CASE("problem parsing") {
    SUBCASE("poly target") {
        ProblemFile pf = parse_problem("vars 1; target poly 1 + x1^2;");
        CHECK(pf.nvars == 1);
        CHECK_FALSE(pf.has_matrix_target());
        const Poly x = Poly::variable(1, 0);
        CHECK(*pf.poly_target == Poly::constant(1, Rat(1)) + x * x);
    }
    SUBCASE("handelman problem") {
        ProblemFile pf = parse_problem(
            "vars 1; constraint x1; constraint 1 - x1; target poly 2 + x1 - x1^2;");
        CHECK(pf.constraints.size() == 2);
        const Poly x = Poly::variable(1, 0);
        CHECK(pf.constraints[0] == x);
        CHECK(pf.constraints[1] == Poly::constant(1, Rat(1)) - x);
        CHECK(*pf.poly_target == Poly::constant(1, Rat(2)) + x - x * x);
    }
    SUBCASE("matrix target") {
        ProblemFile pf = parse_problem(kWorkedProblem);
        REQUIRE(pf.has_matrix_target());
        CHECK(pf.matrix_target->rows() == 2);
        CHECK(pf.matrix_target->is_symmetric());
    }
    SUBCASE("asymmetric matrix target is an error with a position") {
        try {
            parse_problem("vars 1;\ntarget matrix [[x1, 1],[2, x1]];");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
            CHECK(std::string(e.what()).find("symmetric") != std::string::npos);
        }
    }
    SUBCASE("unknown variable carries its location") {
        try {
            parse_problem("vars 1; target poly 1 + y;");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line == 1);
            CHECK(e.col > 10);
        }
    }
    SUBCASE("missing statements are rejected") {
        CHECK_THROWS_AS(parse_problem("vars 1;"), ParseError);
        CHECK_THROWS_AS(parse_problem("target poly 1;"), ParseError);
        CHECK_THROWS_AS(parse_problem("vars 1; target poly 1; target poly 2;"), ParseError);
    }
    SUBCASE("rational and power syntax") {
        ProblemFile pf = parse_problem("vars 2; target poly 3/4*x1^3*x2 - (1/2 + x2)^2;");
        const Poly x1 = Poly::variable(2, 0), x2 = Poly::variable(2, 1);
        Poly expect = make_rat(3, 4) * x1.pow(3) * x2 -
                      (Poly::constant(2, make_rat(1, 2)) + x2) * (Poly::constant(2, make_rat(1, 2)) + x2);
        CHECK(*pf.poly_target == expect);
    }
}

TEST_CASE("certificate serialization round-trips") {
    ConstraintSet s(1, {});
    MatPoly f(2, 2, 1);
    const Poly x = Poly::variable(1, 0);
    f.at(0, 0) = Poly::constant(1, Rat(2));
    f.at(0, 1) = x;
    f.at(1, 0) = x;
    f.at(1, 1) = Poly::constant(1, Rat(1)) + x * x;
    MatrixCertifyResult r = certify_matrix(f, s);
    REQUIRE(r.ok());

    CertificateFile cf;
    cf.kind = CertificateKind::MatrixKrivine;
    cf.nvars = 1;
    cf.size = 2;
    cf.meta.emplace_back("version", kVersion);
    cf.witnesses.emplace_back("t", r.cert->multiplier);
    cf.witnesses.emplace_back("V", r.cert->residue);

    const std::string text = serialize_certificate(cf);
    SUBCASE("parse returns identical expansions") {
        CertificateFile back = parse_certificate(text);
        CHECK(back.kind == CertificateKind::MatrixKrivine);
        CHECK(back.nvars == 1);
        CHECK(back.size == 2);
        REQUIRE(back.find_witness("t"));
        REQUIRE(back.find_witness("V"));
        CHECK(back.find_witness("t")->expand() == r.cert->multiplier.expand());
        CHECK(back.find_witness("V")->expand() == r.cert->residue.expand());
        CHECK(verify_matrix_cert(f, MatrixCertificate{*back.find_witness("t"),
                                                      *back.find_witness("V"), {}}, s));
    }
    SUBCASE("serialization is deterministic") {
        CHECK(serialize_certificate(cf) == text);
        CertificateFile back = parse_certificate(text);
        CHECK(serialize_certificate(back) == text);
    }
    SUBCASE("truncated input is rejected") {
        CHECK_THROWS_AS(parse_certificate(text.substr(0, text.size() / 2)), ParseError);
        CHECK_THROWS_AS(parse_certificate("not a certificate"), ParseError);
    }
}

TEST_CASE("epsilon certificates serialize with their epsilon") {
    ConstraintSet s(1, {});
    MatPoly f = MatPoly::identity(2, 1).scale(Rat(2));
    EpsSearchResult r = matrix_sos_search(f, s, GramMode::Preorder);
    REQUIRE(r.ok());
    CertificateFile cf;
    cf.kind = CertificateKind::EpsPreorder;
    cf.nvars = 1;
    cf.size = 2;
    cf.eps = r.cert->eps;
    cf.witnesses.emplace_back("V", r.cert->witness);
    CertificateFile back = parse_certificate(serialize_certificate(cf));
    REQUIRE(back.eps.has_value());
    CHECK(*back.eps == 1);
    CHECK(back.find_witness("V")->expand() == r.cert->witness.expand());
}

TEST_CASE("witnesses with generators round-trip blockwise") {
    const Poly x = Poly::variable(1, 0);
    ConstraintSet s(1, {x, Poly::constant(1, Rat(1)) - x});
    const Poly f = Poly::constant(1, Rat(2)) + x - x * x;
    ScalarCertifyResult r = certify_scalar(f, s);
    REQUIRE(r.ok());
    CertificateFile cf;
    cf.kind = CertificateKind::ScalarKrivine;
    cf.nvars = 1;
    cf.size = 1;
    cf.generators = s.generators();
    cf.witnesses.emplace_back("t", r.cert->t);
    cf.witnesses.emplace_back("u", r.cert->u);
    CertificateFile back = parse_certificate(serialize_certificate(cf));
    CHECK(back.constraint_set() == s);
    REQUIRE(back.find_witness("u"));
    CHECK(back.find_witness("u")->blocks().size() == r.cert->u.blocks().size());
    CHECK(verify_scalar_cert(f, ScalarCertificate{*back.find_witness("t"),
                                                  *back.find_witness("u")}));
}
