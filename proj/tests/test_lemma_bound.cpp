#include "doctest.h"
#include "test_util.hpp"

using namespace psatz;
using psatz::testing::RandomPolys;

namespace {

bool bound_identity_holds(const BoundWitness& w) {
    const int cols = w.mat.cols();
    return w.sos.expand() + gram_square(w.mat) ==
           MatPoly::identity(cols, w.mat.nvars()).scale(w.bound_poly());
}

MatPoly scalar_mat(const Poly& p) { return MatPoly::scalar(p); }

}  // namespace

TEST_CASE("decompose presents a matrix as monomial terms") {
    const Poly x1 = Poly::variable(2, 0), x2 = Poly::variable(2, 1);
    SUBCASE("constant matrix") {
        MatPoly b(1, 1, 2);
        b.at(0, 0) = Poly::constant(2, Rat(2));
        auto t = decompose(b);
        CHECK(t->kind == ExprTree::Kind::ConstMat);
        CHECK(t->flatten() == b);
    }
    SUBCASE("single variable") {
        MatPoly b(1, 1, 1);
        b.at(0, 0) = Poly::variable(1, 0);
        auto t = decompose(b);
        REQUIRE(t->kind == ExprTree::Kind::Product);
        CHECK(t->left->kind == ExprTree::Kind::VarScalar);
        CHECK(t->left->var == 0);
        CHECK(t->right->kind == ExprTree::Kind::ConstMat);
        CHECK(t->flatten() == b);
    }
    SUBCASE("mixed monomial plus constant") {
        MatPoly b(1, 1, 2);
        b.at(0, 0) = x1 * x2 + Poly::constant(2, Rat(3));
        auto t = decompose(b);
        REQUIRE(t->kind == ExprTree::Kind::Sum);
        CHECK(t->flatten() == b);
    }
    SUBCASE("flatten is the identity on random matrices") {
        RandomPolys gen(31);
        for (int trial = 0; trial < 25; ++trial) {
            MatPoly b = gen.matrix(1 + trial % 3, 1 + (trial / 2) % 3, 1 + trial % 3, 3, 4);
            CHECK(decompose(b)->flatten() == b);
        }
    }
}

TEST_CASE("bound for constant matrices") {
    SUBCASE("scalar two") {
        RatMat c(1, 1);
        c.at(0, 0) = 2;
        BoundWitness w = bound_constant(c, 1);
        CHECK(w.k == 5);
        CHECK(w.l == 0);
        CHECK(w.sos.expand() == scalar_mat(Poly::constant(1, Rat(1))));
        CHECK(bound_identity_holds(w));
    }
    SUBCASE("zero matrix") {
        BoundWitness w = bound_constant(RatMat(2, 2), 1);
        CHECK(w.k == 1);
        CHECK(w.sos.expand() == MatPoly::identity(2, 1));
    }
    SUBCASE("upper triangular example") {
        RatMat c(2, 2);
        c.at(0, 0) = 1;
        c.at(0, 1) = 1;
        c.at(1, 1) = 1;
        BoundWitness w = bound_constant(c, 1);
        CHECK(w.k == 4);
        // 4I - C^T C = [[3,-1],[-1,2]], exact pivots 3 and 5/3
        RatMat m = RatMat::identity(2) * w.k - c.transpose() * c;
        LdltResult f = psd_ldlt(m);
        CHECK(f.diag[0] == 3);
        CHECK(f.diag[1] == make_rat(5, 3));
        CHECK(bound_identity_holds(w));
    }
}

TEST_CASE("bound for single variables") {
    SUBCASE("one variable") {
        BoundWitness w = bound_variable(1, 0);
        CHECK(w.k == 1);
        CHECK(w.l == 1);
        CHECK(w.sos.expand() == scalar_mat(Poly::constant(1, Rat(1))));
        CHECK(bound_identity_holds(w));
    }
    SUBCASE("two variables") {
        BoundWitness w = bound_variable(2, 0);
        const Poly x2 = Poly::variable(2, 1);
        CHECK(w.sos.expand() == scalar_mat(Poly::constant(2, Rat(1)) + x2 * x2));
        CHECK(w.sos.term_count() == 2);
    }
    SUBCASE("middle of three variables") {
        BoundWitness w = bound_variable(3, 1);
        const Poly x1 = Poly::variable(3, 0), x3 = Poly::variable(3, 2);
        CHECK(w.sos.expand() == scalar_mat(Poly::constant(3, Rat(1)) + x1 * x1 + x3 * x3));
        CHECK(bound_identity_holds(w));
    }
    SUBCASE("index out of range throws") {
        CHECK_THROWS_AS(bound_variable(2, 2), std::invalid_argument);
    }
}

TEST_CASE("bound composition under sums") {
    const Poly x = Poly::variable(1, 0);
    SUBCASE("doubling a variable") {
        BoundWitness v = bound_variable(1, 0);
        BoundWitness w = bound_sum(v, v);
        CHECK(w.k == 4);
        CHECK(w.l == 1);
        CHECK(w.mat == scalar_mat(x * Rat(2)));
        // 4p - 4x^2 = 4
        CHECK(w.sos.expand() == scalar_mat(Poly::constant(1, Rat(4))));
        CHECK(bound_identity_holds(w));
    }
    SUBCASE("degenerate zero summand") {
        BoundWitness v = bound_variable(1, 0);
        BoundWitness z = bound_constant(RatMat(1, 1), 1);
        CHECK(bound_identity_holds(bound_sum(v, z)));
    }
    SUBCASE("random sums") {
        RandomPolys gen(32);
        for (int trial = 0; trial < 15; ++trial) {
            const int n = 1 + trial % 2, d = 1 + trial % 2;
            BoundWitness w1 = lemma_bound(gen.matrix(n, n, d, 2, 3));
            BoundWitness w2 = lemma_bound(gen.matrix(n, n, d, 2, 3));
            BoundWitness sum = bound_sum(w1, w2);
            CHECK(sum.k == (w1.k + w2.k) * 2);
            CHECK(sum.l == std::max(w1.l, w2.l));
            CHECK(bound_identity_holds(sum));
        }
    }
}

TEST_CASE("bound composition under products") {
    const Poly x = Poly::variable(1, 0);
    SUBCASE("variable squared") {
        BoundWitness v = bound_variable(1, 0);
        BoundWitness w = bound_product(v, v);
        CHECK(w.k == 1);
        CHECK(w.l == 2);
        const Poly p = one_plus_sum_of_squares(1);
        CHECK(w.sos.expand() == scalar_mat(p * p - x.pow(4)));
        CHECK(bound_identity_holds(w));
    }
    SUBCASE("identity factor via the constant bound") {
        BoundWitness v = bound_variable(1, 0);
        BoundWitness id = bound_constant(RatMat::identity(1), 1);
        BoundWitness w = bound_product(v, id);
        CHECK(w.l == v.l);
        CHECK(w.k == v.k * 2);  // k of I_1 is 1 + n = 2
        CHECK(bound_identity_holds(w));
    }
    SUBCASE("zero left factor") {
        BoundWitness z = bound_constant(RatMat(1, 1), 1);
        BoundWitness v = bound_variable(1, 0);
        BoundWitness w = bound_product(z, v);
        CHECK(w.sos.expand() ==
              scalar_mat(w.bound_poly()));  // B^T B vanishes
        CHECK(bound_identity_holds(w));
    }
}

TEST_CASE("full lemma bound") {
    SUBCASE("single variable matrix") {
        MatPoly b(1, 1, 1);
        b.at(0, 0) = Poly::variable(1, 0);
        BoundWitness w = lemma_bound(b);
        CHECK(w.k == 1);
        CHECK(w.l == 1);
        CHECK(bound_identity_holds(w));
    }
    SUBCASE("worked border instance") {
        // the 2x2 worked certificate needs c = p and sigma = [[1]]
        MatPoly b(1, 1, 1);
        b.at(0, 0) = Poly::variable(1, 0);
        BoundWitness w = lemma_bound(b);
        CHECK(w.bound_poly() == one_plus_sum_of_squares(1));
        CHECK(w.sos.expand() == scalar_mat(Poly::constant(1, Rat(1))));
    }
    SUBCASE("random matrices") {
        RandomPolys gen(33);
        for (int trial = 0; trial < 40; ++trial) {
            const int n = 1 + trial % 3, d = 1 + trial % 3;
            MatPoly b = gen.matrix(n, n, d, 3, 4);
            BoundWitness w = lemma_bound(b);
            CHECK(w.k > 0);
            CHECK(bound_identity_holds(w));
        }
    }
    SUBCASE("rectangular matrices") {
        RandomPolys gen(34);
        for (int trial = 0; trial < 10; ++trial) {
            MatPoly b = gen.matrix(1 + trial % 2, 2 + trial % 2, 2, 2, 3);
            CHECK(bound_identity_holds(lemma_bound(b)));
        }
    }
}

TEST_CASE("p-power helpers expand exactly") {
    for (int d = 1; d <= 3; ++d) {
        const Poly p = one_plus_sum_of_squares(d);
        for (long l = 0; l <= 4; ++l)
            CHECK(p_power_sos(d, l).expand() == MatPoly::scalar(p.pow(l)));
        for (long delta = 0; delta <= 6; ++delta)
            CHECK(p_power_minus_one_sos(d, delta).expand() ==
                  MatPoly::scalar(p.pow(delta) - Poly::constant(d, Rat(1))));
    }
}
