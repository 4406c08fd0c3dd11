#include "doctest.h"
#include "test_util.hpp"

using namespace psatz;
using psatz::testing::RandomPolys;

namespace {

const Poly x = Poly::variable(1, 0);
const Poly one = Poly::constant(1, Rat(1));

GramSystem sos_system_1px2() {
    return build_gram_system(MatPoly::scalar(one + x * x), ConstraintSet(1, {}),
                             GramMode::Preorder, 2);
}

GramSystem handelman_system() {
    ConstraintSet s(1, {x, one - x});
    return build_gram_system(MatPoly::scalar(Poly::constant(1, Rat(2)) + x - x * x), s,
                             GramMode::Preorder, 2);
}

}  // namespace

TEST_CASE("gram system construction") {
    SUBCASE("plain SOS block for 1+x^2") {
        GramSystem sys = sos_system_1px2();
        REQUIRE(sys.blocks.size() == 1);
        CHECK(sys.blocks[0].basis.size() == 2);  // {1, x}
        CHECK(sys.blocks[0].stacked == 2);
    }
    SUBCASE("halfline target x at bound zero") {
        ConstraintSet s(1, {x});
        GramSystem sys = build_gram_system(MatPoly::scalar(x), s, GramMode::QuadraticModule, 0);
        // blocks for the empty pattern and for the generator, both with basis {1};
        // the empty-pattern diagonal is forced to zero and pruned away
        bool has_gen_block = false;
        for (const GramBlock& b : sys.blocks) {
            if (b.exponent.hamming() == 1) {
                has_gen_block = true;
                CHECK(b.basis.size() == 1);
            }
        }
        CHECK(has_gen_block);
        FloatSolution sol = solve_feasibility(sys);
        CHECK(sol.converged);
        RationalizeResult rat = rationalize(sol, sys);
        REQUIRE(rat.ok());
        PreorderWitness w = witness_from_blocks(sys, *rat.blocks, 0);
        CHECK(verify_membership(MatPoly::scalar(x), w));
    }
    SUBCASE("handelman target is feasible with the product block") {
        GramSystem sys = handelman_system();
        FloatSolution sol = solve_feasibility(sys);
        CHECK(sol.converged);
        RationalizeResult rat = rationalize(sol, sys);
        REQUIRE(rat.ok());
        PreorderWitness w = witness_from_blocks(sys, *rat.blocks, 0);
        CHECK(verify_membership(MatPoly::scalar(Poly::constant(1, Rat(2)) + x - x * x), w));
    }
    SUBCASE("degree bound too small") {
        CHECK_THROWS_AS(build_gram_system(MatPoly::scalar(x.pow(4)), ConstraintSet(1, {}),
                                          GramMode::Preorder, 2),
                        GramBuildError);
    }
    SUBCASE("asymmetric target rejected") {
        MatPoly f(2, 2, 1);
        f.at(0, 1) = x;
        CHECK_THROWS_AS(build_gram_system(f, ConstraintSet(1, {}), GramMode::Preorder, 2),
                        std::invalid_argument);
    }
}

TEST_CASE("feasibility solver") {
    SUBCASE("known feasible point is found") {
        GramSystem sys = sos_system_1px2();
        FloatSolution sol = solve_feasibility(sys);
        CHECK(sol.converged);
        CHECK(sol.residual < 1e-9);
    }
    SUBCASE("negative constant never converges") {
        GramSystem sys = build_gram_system(MatPoly::scalar(-one), ConstraintSet(1, {}),
                                           GramMode::Preorder, 2);
        SolveConfig cfg;
        cfg.max_iters = 200;
        FloatSolution sol = solve_feasibility(sys, cfg);
        CHECK_FALSE(sol.converged);
        CHECK_FALSE(sol.nan_failure);
        CHECK(sol.residual > 1e-3);
    }
    SUBCASE("numeric breakdown is reported distinctly") {
        // coefficients beyond double range turn into NaN during projection
        Poly huge = Poly::constant(1, pow2(40000)) + x * x;
        GramSystem sys = build_gram_system(MatPoly::scalar(huge), ConstraintSet(1, {}),
                                           GramMode::Preorder, 2);
        SolveConfig cfg;
        cfg.max_iters = 50;
        FloatSolution sol = solve_feasibility(sys, cfg);
        CHECK(sol.nan_failure);
    }
}

TEST_CASE("rationalization") {
    SUBCASE("near-identity rounds to the exact identity") {
        GramSystem sys = sos_system_1px2();
        FloatSolution sol = solve_feasibility(sys);
        RationalizeResult rat = rationalize(sol, sys);
        REQUIRE(rat.ok());
        // G = I is the unique Gram matrix here
        REQUIRE(rat.blocks->size() == 1);
        CHECK((*rat.blocks)[0] == RatMat::identity(2));
    }
    SUBCASE("handelman blocks reproduce the target exactly") {
        GramSystem sys = handelman_system();
        FloatSolution sol = solve_feasibility(sys);
        RationalizeResult rat = rationalize(sol, sys);
        REQUIRE(rat.ok());
        PreorderWitness w = witness_from_blocks(sys, *rat.blocks, 0);
        CHECK(w.expand().at(0, 0) == Poly::constant(1, Rat(2)) + x - x * x);
    }
    SUBCASE("infeasible system exhausts the ladder loudly") {
        GramSystem sys = build_gram_system(MatPoly::scalar(-one), ConstraintSet(1, {}),
                                           GramMode::Preorder, 0);
        FloatSolution sol = solve_feasibility(sys, SolveConfig{1e-9, 50, 1e-4});
        sol.blocks[0](0, 0) = -1.0;  // force the hopeless rounding point
        RationalizeResult rat = rationalize(sol, sys);
        CHECK_FALSE(rat.ok());
        CHECK(rat.diagnostics.find("ladder exhausted") != std::string::npos);
        CHECK(rat.smallest_pivot < 0);
    }
    SUBCASE("perturbed solutions either repair exactly or fail") {
        RandomPolys gen(41);
        GramSystem sys = handelman_system();
        FloatSolution sol = solve_feasibility(sys);
        std::uniform_real_distribution<double> noise(-0.5, 0.5);
        for (int trial = 0; trial < 20; ++trial) {
            FloatSolution fuzzed = sol;
            for (auto& blk : fuzzed.blocks)
                for (int i = 0; i < blk.rows(); ++i)
                    for (int j = i; j < blk.cols(); ++j) {
                        blk(i, j) += noise(gen.rng) * (trial / 4 + 1);
                        blk(j, i) = blk(i, j);
                    }
            RationalizeResult rat = rationalize(fuzzed, sys);
            if (rat.ok()) {
                PreorderWitness w = witness_from_blocks(sys, *rat.blocks, 0);
                CHECK(w.expand().at(0, 0) == Poly::constant(1, Rat(2)) + x - x * x);
            }
        }
    }
}

TEST_CASE("gram to squares") {
    std::vector<Monomial> basis = monomials_up_to_degree(1, 1);  // {1, x}
    SUBCASE("identity gram") {
        SosMatrixWitness w = gram_to_sos(RatMat::identity(2), basis, 1, 1);
        CHECK(w.term_count() == 2);
        CHECK(w.expand().at(0, 0) == one + x * x);
    }
    SUBCASE("worked pivoted example") {
        RatMat g(2, 2);
        g.at(0, 0) = 2;
        g.at(0, 1) = -1;
        g.at(1, 0) = -1;
        g.at(1, 1) = 1;
        SosMatrixWitness w = gram_to_sos(g, basis, 1, 1);
        // 2(1 - x/2)^2 + (1/2) x^2
        REQUIRE(w.term_count() == 2);
        CHECK(w.terms()[0].weight == 2);
        CHECK(w.terms()[0].mat.at(0, 0) == one - x * make_rat(1, 2));
        CHECK(w.terms()[1].weight == make_rat(1, 2));
        CHECK(w.terms()[1].mat.at(0, 0) == x);
        CHECK(w.expand().at(0, 0) == Rat(2) * one - Rat(2) * x + x * x);
    }
    SUBCASE("rank-deficient gram has fewer squares") {
        RatMat v(2, 1);
        v.at(0, 0) = 1;
        v.at(1, 0) = 2;
        RatMat g = v * v.transpose();
        SosMatrixWitness w = gram_to_sos(g, basis, 1, 1);
        CHECK(w.term_count() == 1);
        CHECK(w.expand().at(0, 0) == (one + Rat(2) * x) * (one + Rat(2) * x));
    }
    SUBCASE("round-trip on random PSD grams") {
        RandomPolys gen(42);
        for (int trial = 0; trial < 15; ++trial) {
            RatMat g = gen.psd_matrix(2);
            SosMatrixWitness w = gram_to_sos(g, basis, 1, 1);
            Poly expect(1);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    expect += Poly::monomial(basis[static_cast<size_t>(i)] * basis[static_cast<size_t>(j)],
                                             g.at(i, j));
            CHECK(w.expand().at(0, 0) == expect);
        }
    }
    SUBCASE("indefinite input throws") {
        RatMat g(2, 2);
        g.at(0, 1) = 1;
        g.at(1, 0) = 1;
        CHECK_THROWS_AS(gram_to_sos(g, basis, 1, 1), std::invalid_argument);
    }
}

TEST_CASE("epsilon search") {
    SUBCASE("twice the identity certifies at one") {
        MatPoly f = MatPoly::identity(2, 1).scale(Rat(2));
        EpsSearchResult r = matrix_sos_search(f, ConstraintSet(1, {}), GramMode::Preorder);
        REQUIRE(r.ok());
        CHECK(r.cert->eps == 1);
        CHECK(r.cert->witness.expand() == MatPoly::identity(2, 1));
    }
    SUBCASE("compact interval instance reaches a dyadic epsilon") {
        MatPoly f(2, 2, 1);
        f.at(0, 0) = one + x * x;
        f.at(0, 1) = x;
        f.at(1, 0) = x;
        f.at(1, 1) = Poly::constant(1, Rat(2));
        ConstraintSet s(1, {one - x * x});
        EpsSearchResult r = matrix_sos_search(f, s, GramMode::Preorder);
        REQUIRE(r.ok());
        CHECK(r.cert->eps >= make_rat(1, 64));
        CHECK(verify_membership(f - MatPoly::identity(2, 1).scale(r.cert->eps), r.cert->witness));
    }
    SUBCASE("not positive definite reports failure") {
        MatPoly f(2, 2, 1);
        f.at(0, 0) = x;
        f.at(1, 1) = one;
        SearchConfig cfg;
        cfg.solve.max_iters = 200;
        EpsSearchResult r = matrix_sos_search(f, ConstraintSet(1, {}), GramMode::Preorder, cfg);
        CHECK_FALSE(r.ok());
        CHECK(r.diagnostics.find("no certificate found") != std::string::npos);
    }
    SUBCASE("quadratic module mode restricts the blocks") {
        ConstraintSet s(1, {x, one - x});
        MatPoly f = MatPoly::identity(2, 1).scale(Rat(2));
        EpsSearchResult r = matrix_sos_search(f, s, GramMode::QuadraticModule);
        REQUIRE(r.ok());
        CHECK(r.cert->witness.is_quadratic_module());
    }
}

TEST_CASE("witness slimming preserves expansions") {
    RandomPolys gen(43);
    ConstraintSet s(1, {x});
    for (int trial = 0; trial < 10; ++trial) {
        PreorderWitness w(s, 2);
        SosMatrixWitness blk(2, 1);
        for (int t = 0; t < 4; ++t) blk.add_term(abs(gen.coeff()) + 1, gen.matrix(1, 2, 1, 2, 3));
        w.add_block(ExponentVector(1), blk);
        SosMatrixWitness gblk(2, 1);
        gblk.add_term(Rat(1), gen.matrix(1, 2, 1, 1, 2));
        w.add_block(ExponentVector::single(1, 0), gblk);
        const MatPoly expect = w.expand();
        CHECK(slim_witness(w).expand() == expect);
    }
}
