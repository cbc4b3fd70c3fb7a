#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mec/construct.hpp"
#include "mec/ratlp.hpp"
#include "test_util.hpp"

using namespace mec;

namespace {

const char* kSec5Tree = "(2 (3 p1 p2 p4) (2 p3 p4 p5) (1 p6 p7 p8))";
const char* kExample2Tree = "(2 a b (1 c d e))";
const char* kExample3Tree = "(2 (3 p1 p2 p3) (2 p4 p5 p6) (1 p7 p8 p9))";

// The printed block matrix [[R1,R2,R3],[0,R2,2*R3]] with R_i = M_i kron I.
FieldMatrix expected_sec5_matrix() {
    const FieldSpec q(3);
    const FieldMatrix m1 = vandermonde(3, 3, q);
    const FieldMatrix m2 = vandermonde(2, 3, q);
    const FieldMatrix m3 = vandermonde(1, 3, q);
    const FieldMatrix r1 = kronecker(m1, FieldMatrix::identity(2, q));
    const FieldMatrix r2 = kronecker(m2, FieldMatrix::identity(3, q));
    const FieldMatrix r3 = kronecker(m3, FieldMatrix::identity(6, q));

    FieldMatrix out(12, 33, q);
    auto paste = [&](const FieldMatrix& block, std::size_t ro, std::size_t co, std::uint64_t scale) {
        for (std::size_t r = 0; r < block.rows(); ++r)
            for (std::size_t c = 0; c < block.cols(); ++c)
                out.set(ro + r, co + c, mul_mod(scale, block.at(r, c), q.q));
    };
    paste(r1, 0, 0, 1);
    paste(r2, 0, 6, 1);
    paste(r3, 0, 15, 1);
    paste(r2, 6, 6, 1);
    paste(r3, 6, 15, 2);
    return out;
}

std::vector<std::uint64_t> h_of(const FaResult& fa, const Universe& u,
                                std::initializer_list<const char*> names) {
    std::vector<std::uint64_t> out;
    for (const char* n : names) out.push_back(fa.h[static_cast<std::size_t>(u.require(n))]);
    return out;
}

}  // namespace

TEST_CASE("kronecker field size") {
    CHECK(kronecker_field_size(parse_tree(kSec5Tree)).q == 3);
    CHECK(kronecker_field_size(parse_tree("p1")).q == 2);
    // fan-outs under threshold-1 vertices do not count
    CHECK(kronecker_field_size(parse_tree("(2 (1 a b c d e) (2 f g))")).q == 2);
}

TEST_CASE("build_kronecker reproduces the worked example") {
    const AccessTree tree = parse_tree(kSec5Tree);
    const KroneckerResult kr = build_kronecker(tree);
    CHECK(kr.q.q == 3);
    CHECK(kr.k == 12);
    CHECK(kr.nu == 33);
    CHECK(kr.matrix == expected_sec5_matrix());

    // labels: p1 p1 p2 p2 p4 p4 | p3x3 p4x3 p5x3 | p6x6 p7x6 p8x6
    const Universe& u = kr.universe;
    std::vector<int> expected_labels;
    auto rep = [&](const char* n, int count) {
        for (int i = 0; i < count; ++i) expected_labels.push_back(u.require(n));
    };
    rep("p1", 2); rep("p2", 2); rep("p4", 2);
    rep("p3", 3); rep("p4", 3); rep("p5", 3);
    rep("p6", 6); rep("p7", 6); rep("p8", 6);
    CHECK(kr.labels == expected_labels);

    // completeness: every minimal access set reaches full rank
    const LinearCode code = kronecker_to_code(kr);
    const AccessStructure minimal = enumerate_minimal(tree);
    CHECK(minimal.sets.size() == 14);
    for (NodeMask s : minimal.sets) {
        CHECK(rank(code.generator().select_columns(code.columns_of_set(s))) == 12);
    }
}

TEST_CASE("build_kronecker simple shapes") {
    const KroneckerResult leaf = build_kronecker(parse_tree("p1"));
    CHECK(leaf.k == 1);
    CHECK(leaf.nu == 1);
    CHECK(leaf.matrix.at(0, 0) == 1);

    const KroneckerResult flat = build_kronecker(parse_tree("(2 p1 p2 p3)"));
    CHECK(flat.k == 2);
    CHECK(flat.nu == 3);
    CHECK(flat.matrix == vandermonde(2, 3, flat.q));
    CHECK(kronecker_to_code(flat).symbols_of(0) == 1);

    CHECK_THROWS_AS(build_kronecker(parse_tree(kSec5Tree), 16), std::length_error);
}

TEST_CASE("kronecker_to_code merges shared nodes") {
    const KroneckerResult kr = build_kronecker(parse_tree(kSec5Tree));
    const LinearCode code = kronecker_to_code(kr);
    CHECK(code.symbols_of(code.universe().require("p4")) == 5);  // columns in R1 and R2
    CHECK(code.symbols_of(code.universe().require("p6")) == 6);
}

TEST_CASE("predict_kronecker_size") {
    const SizePrediction sec5 = predict_kronecker_size(parse_tree(kSec5Tree));
    CHECK(sec5.psi == std::vector<Rational>{Rational(1, 2), Rational(3, 4), Rational(3, 2)});
    CHECK(sec5.beta == Rational(7, 4));
    CHECK(sec5.k_pred == 12);
    CHECK(sec5.cols_pred == 33);

    const SizePrediction and2 = predict_kronecker_size(parse_tree("(2 p1 p2)"));
    CHECK(and2.psi == std::vector<Rational>{Rational(1)});
    CHECK(and2.beta == Rational(0));

    const SizePrediction or2 = predict_kronecker_size(parse_tree("(1 p1 p2)"));
    CHECK(or2.psi == std::vector<Rational>{Rational(2)});
    CHECK(or2.beta == Rational(1));
}

TEST_CASE("kronecker size agreement on random trees") {
    testutil::Rng rng(505);
    for (int iter = 0; iter < 80; ++iter) {
        const AccessTree tree = parse_tree(testutil::random_general_tree_text(rng, 9, 3));
        KroneckerResult kr;
        try {
            kr = build_kronecker(tree, 200);
        } catch (const std::length_error&) {
            continue;  // over the dimension cap for this test
        }
        const SizePrediction pred = predict_kronecker_size(tree);
        CHECK(BigInt(kr.k) == pred.k_pred);
        CHECK(BigInt(kr.nu) == pred.cols_pred);
        CHECK(Rational(BigInt(kr.nu) - BigInt(kr.k), BigInt(kr.k)) == pred.beta);
    }
}

TEST_CASE("kronecker completeness on random trees") {
    testutil::Rng rng(606);
    int checked = 0;
    for (int iter = 0; iter < 60; ++iter) {
        const AccessTree tree = parse_tree(testutil::random_general_tree_text(rng, 9, 3));
        KroneckerResult kr;
        try {
            kr = build_kronecker(tree, 200);
        } catch (const std::length_error&) {
            continue;
        }
        const LinearCode code = kronecker_to_code(kr);
        for (NodeMask s : enumerate_minimal(tree).sets) {
            CHECK(rank(code.generator().select_columns(code.columns_of_set(s))) == kr.k);
        }
        ++checked;
    }
    CHECK(checked >= 30);
}

TEST_CASE("build_lp_code") {
    const AccessTree tree = parse_tree("(1 (2 (1 a b) (3 c d e)) (2 (2 a b) (1 c d e)))");
    const LinearCode code = build_lp_code(enumerate_minimal(tree));
    CHECK(code.dimension() == 5);
    CHECK(code.length() == 7);
    CHECK(code.field().q == 7);
    CHECK(overhead(code) == Rational(2, 5));
    CHECK(code.symbols_of(code.universe().require("a")) == 2);
    CHECK(code.symbols_of(code.universe().require("c")) == 1);
    CHECK(is_complete(code, enumerate_minimal(tree)));

    Universe u3;
    for (const char* n : {"x", "y", "z"}) u3.add(n);
    const LinearCode whole = build_lp_code(AccessStructure{u3, {u3.full_mask()}});
    CHECK(overhead(whole) == Rational(0));

    Universe u4;
    for (const char* n : {"a", "b", "c", "d"}) u4.add(n);
    std::vector<NodeMask> sets3;
    for (NodeMask s = 0; s <= u4.full_mask(); ++s) {
        if (popcount(s) == 3) sets3.push_back(s);
    }
    const LinearCode c34 = build_lp_code(AccessStructure{u4, sets3});
    CHECK(c34.dimension() == 3);
    CHECK(c34.length() == 4);
    CHECK(overhead(c34) == Rational(1, 3));
}

TEST_CASE("overhead_bounds") {
    const OverheadBounds b1 = overhead_bounds(5, 3, 5);
    CHECK(b1.m_low == 5);
    CHECK(b1.m_high == 10);
    CHECK(b1.beta_bound == Rational(5, 3));

    const OverheadBounds b2 = overhead_bounds(6, 6, 4);
    CHECK(b2.beta_bound == Rational(6, 4));  // structural term vanishes at tau = n

    const OverheadBounds b3 = overhead_bounds(4, 1, 1);
    CHECK(b3.m_low == 1);
    CHECK(b3.m_high == 4);
    CHECK(b3.beta_bound == Rational(7));
}

TEST_CASE("uniform_assignment") {
    const AccessTree ex2 = parse_tree(kExample2Tree);
    const FaResult fa = uniform_assignment(ex2);
    CHECK(fa.k == 2);
    CHECK(fa.nu == 5);
    CHECK(h_of(fa, ex2.universe, {"a", "b", "c", "d", "e"}) ==
          std::vector<std::uint64_t>{1, 1, 1, 1, 1});
    CHECK(fa.beta() == Rational(3, 2));

    // two-level shape: a leaf under labels (t, z) receives k/(t*z)
    const AccessTree two = parse_tree("(2 (2 x1 x2 x3) (3 y1 y2 y3))");
    const FaResult fa2 = uniform_assignment(two);
    CHECK(fa2.k == 12);  // lcm(2*2, 2*3)
    CHECK(fa2.h[static_cast<std::size_t>(two.universe.require("x1"))] == 3);
    CHECK(fa2.h[static_cast<std::size_t>(two.universe.require("y1"))] == 2);

    const FaResult leaf = uniform_assignment(parse_tree("p1"));
    CHECK(leaf.nu == 1);
    CHECK(leaf.k == 1);
    CHECK(leaf.h[0] == 1);

    CHECK_THROWS_AS(uniform_assignment(parse_tree(kSec5Tree)), std::invalid_argument);
}

TEST_CASE("fa_optimal on the worked examples") {
    const AccessTree ex3 = parse_tree(kExample3Tree);
    const FaResult fa3 = fa_optimal(ex3);
    CHECK(fa3.nu == 5);
    CHECK(fa3.k == 2);
    CHECK(h_of(fa3, ex3.universe, {"p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "p9"}) ==
          std::vector<std::uint64_t>{2, 0, 0, 1, 1, 1, 0, 0, 0});

    const AccessTree ex2 = parse_tree(kExample2Tree);
    const FaResult fa2 = fa_optimal(ex2);
    CHECK(fa2.nu == 2);
    CHECK(fa2.k == 1);
    CHECK(h_of(fa2, ex2.universe, {"a", "b", "c", "d", "e"}) ==
          std::vector<std::uint64_t>{1, 1, 0, 0, 0});
    CHECK(fa2.beta() == Rational(1));

    const FaResult leaf = fa_optimal(parse_tree("p1"));
    CHECK(leaf.nu == 1);
    CHECK(leaf.k == 1);

    CHECK_THROWS_AS(fa_optimal(parse_tree(kSec5Tree)), std::invalid_argument);
}

TEST_CASE("fa_optimal matches the LP on random partitioned trees") {
    testutil::Rng rng(808);
    for (int iter = 0; iter < 60; ++iter) {
        const AccessTree tree =
            parse_tree(testutil::random_partitioned_tree_text(rng, 3, 10));
        const FaResult fa = fa_optimal(tree);
        const LpSolution sol = solve_lpp(gamma_from_structure(enumerate_minimal(tree)));
        CHECK(Rational(BigInt(fa.nu), BigInt(fa.k)) == sol.objective);
    }
}

TEST_CASE("uniform never beats optimal") {
    testutil::Rng rng(909);
    for (int iter = 0; iter < 60; ++iter) {
        const AccessTree tree =
            parse_tree(testutil::random_partitioned_tree_text(rng, 3, 10));
        CHECK(uniform_assignment(tree).beta() >= fa_optimal(tree).beta());
    }
    // strict on the Example-2 tree
    CHECK(uniform_assignment(parse_tree(kExample2Tree)).beta() >
          fa_optimal(parse_tree(kExample2Tree)).beta());
}

TEST_CASE("build_partitioned_code") {
    const AccessTree ex3 = parse_tree(kExample3Tree);
    const LinearCode optimal = build_partitioned_code(ex3, PartitionedMethod::Optimal);
    CHECK(optimal.dimension() == 2);
    CHECK(optimal.length() == 5);
    CHECK(optimal.symbols_of(optimal.universe().require("p1")) == 2);
    CHECK(is_complete(optimal, enumerate_minimal(ex3)));

    const AccessTree ex2 = parse_tree(kExample2Tree);
    const LinearCode uniform = build_partitioned_code(ex2, PartitionedMethod::Uniform);
    CHECK(uniform.dimension() == 2);
    CHECK(uniform.length() == 5);
    const LinearCode opt2 = build_partitioned_code(ex2, PartitionedMethod::Optimal);
    CHECK(opt2.dimension() == 1);
    CHECK(opt2.length() == 2);
    CHECK(is_complete(uniform, enumerate_minimal(ex2)));
    CHECK(is_complete(opt2, enumerate_minimal(ex2)));

    const LinearCode leaf = build_partitioned_code(parse_tree("p1"), PartitionedMethod::Optimal);
    CHECK(leaf.dimension() == 1);
    CHECK(leaf.length() == 1);
}

TEST_CASE("fa codes are complete on random partitioned trees") {
    testutil::Rng rng(111);
    for (int iter = 0; iter < 40; ++iter) {
        const AccessTree tree =
            parse_tree(testutil::random_partitioned_tree_text(rng, 3, 12));
        const LinearCode code = build_partitioned_code(tree, PartitionedMethod::Optimal);
        const AccessStructure minimal = enumerate_minimal(tree);
        CHECK(is_complete(code, minimal));
    }
}

TEST_CASE("parameters_report") {
    const ParametersReport lp = parameters_report(
        parse_tree("(1 (2 (1 a b) (3 c d e)) (2 (2 a b) (1 c d e)))"), "lp");
    CHECK(lp.k == 5);
    CHECK(lp.m == 7);
    CHECK(rational_to_string(lp.beta) == "2/5");
    CHECK(lp.q == 7);

    const ParametersReport opt = parameters_report(parse_tree(kExample3Tree), "optimal");
    CHECK(opt.k == 2);
    CHECK(opt.m == 5);
    CHECK(rational_to_string(opt.beta) == "3/2");

    const ParametersReport uni = parameters_report(parse_tree(kExample2Tree), "uniform");
    const ParametersReport opt2 = parameters_report(parse_tree(kExample2Tree), "optimal");
    CHECK(rational_to_string(uni.beta) == "3/2");
    CHECK(rational_to_string(opt2.beta) == "1");

    CHECK_THROWS_AS(parameters_report(parse_tree("p1"), "bogus"), std::invalid_argument);
}
