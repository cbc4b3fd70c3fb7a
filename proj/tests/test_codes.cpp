#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mec/codes.hpp"
#include "mec/construct.hpp"
#include "test_util.hpp"

using namespace mec;

namespace {

// The section-6 example code: [7,5] MDS over F_7, per-node columns (2,2,1,1,1).
LinearCode example_code() {
    Universe u;
    for (const char* n : {"a", "b", "c", "d", "e"}) u.add(n);
    std::vector<int> labeling = {0, 0, 1, 1, 2, 3, 4};
    return mds_code(5, 7, FieldSpec(7), labeling, u);
}

NodeMask mask_of(const Universe& u, std::initializer_list<const char*> names) {
    NodeMask m = 0;
    for (const char* n : names) m |= NodeMask{1} << u.require(n);
    return m;
}

BitFile bits(std::initializer_list<int> values) {
    BitFile f;
    for (int v : values) f.bits.push_back(static_cast<std::uint8_t>(v));
    return f;
}

}  // namespace

TEST_CASE("encode splits symbols by labeling") {
    // identity code, one column per node
    Universe u;
    u.add("x");
    u.add("y");
    const LinearCode id(FieldMatrix::identity(2, FieldSpec(7)), {0, 1}, u);
    const FragmentVector g = encode(id, {4, 6});
    CHECK(*g.entries[0] == std::vector<std::uint64_t>{4});
    CHECK(*g.entries[1] == std::vector<std::uint64_t>{6});

    // [3,2] MDS over F_7 with one column per node
    Universe u3;
    for (const char* n : {"a", "b", "c"}) u3.add(n);
    const LinearCode mds = mds_code(2, 3, FieldSpec(7), {0, 1, 2}, u3);
    const FragmentVector frags = encode(mds, {1, 1});
    CHECK(*frags.entries[0] == std::vector<std::uint64_t>{1});
    CHECK(*frags.entries[1] == std::vector<std::uint64_t>{2});
    CHECK(*frags.entries[2] == std::vector<std::uint64_t>{3});

    // section-6 example: node a holds 2 symbols, node c holds 1
    const LinearCode code = example_code();
    const FragmentVector g6 = encode(code, {1, 2, 3, 4, 5});
    CHECK(g6.entries[0]->size() == 2);
    CHECK(g6.entries[2]->size() == 1);
    CHECK_THROWS_AS(encode(code, {1, 2}), std::invalid_argument);
}

TEST_CASE("zero-column nodes carry the absent fragment") {
    Universe u;
    u.add("a");
    u.add("b");
    u.add("c");
    const LinearCode code(FieldMatrix::identity(2, FieldSpec(5)), {0, 1}, u);
    const FragmentVector g = encode(code, {3, 4});
    CHECK(!g.entries[2].has_value());
    CHECK(*decode(code, g) == std::vector<std::uint64_t>{3, 4});
}

TEST_CASE("decode") {
    Universe u3;
    for (const char* n : {"a", "b", "c"}) u3.add(n);
    const LinearCode mds = mds_code(2, 3, FieldSpec(7), {0, 1, 2}, u3);

    const FragmentVector all = encode(mds, {5, 2});
    CHECK(*decode(mds, all) == std::vector<std::uint64_t>{5, 2});

    FragmentVector partial = encode(mds, {1, 1});
    partial.entries[1] = std::nullopt;  // ((1), absent, (3))
    CHECK(*decode(mds, partial) == std::vector<std::uint64_t>{1, 1});

    FragmentVector one;
    one.entries.resize(3);
    one.entries[0] = std::vector<std::uint64_t>{1};
    CHECK(!decode(mds, one).has_value());

    FragmentVector malformed = all;
    malformed.entries[0] = std::vector<std::uint64_t>{1, 2};
    CHECK_THROWS_AS(decode(mds, malformed), std::invalid_argument);
}

TEST_CASE("is_sufficient") {
    const LinearCode code = example_code();
    const Universe& u = code.universe();
    CHECK(is_sufficient(code, u.full_mask()));
    CHECK(!is_sufficient(code, 0));
    CHECK(is_sufficient(code, mask_of(u, {"a", "b", "c"})));  // 2+2+1 = 5 MDS columns
    CHECK(!is_sufficient(code, mask_of(u, {"a", "b"})));      // only 4 columns

    // monotone: supersets of sufficient sets stay sufficient
    for (NodeMask s = 0; s <= u.full_mask(); ++s) {
        if (!is_sufficient(code, s)) continue;
        for (NodeMask t = s; t <= u.full_mask(); ++t) {
            if ((t & s) == s) CHECK(is_sufficient(code, t));
        }
    }
}

TEST_CASE("is_complete") {
    const LinearCode code = example_code();
    const AccessTree tree = parse_tree("(1 (2 (1 a b) (3 c d e)) (2 (2 a b) (1 c d e)))");
    const AccessStructure a = enumerate_minimal(tree);
    CHECK(is_complete(code, a));

    AccessStructure everything{code.universe(), {code.universe().full_mask()}};
    CHECK(is_complete(code, everything));

    // zeroing node a's columns breaks the {a,b,c} access set
    FieldMatrix crippled = code.generator();
    for (std::size_t r = 0; r < crippled.rows(); ++r) {
        crippled.set(r, 5, crippled.at(r, 0));
        crippled.set(r, 6, crippled.at(r, 1));
        crippled.set(r, 0, 0);
        crippled.set(r, 1, 0);
    }
    const LinearCode broken(crippled, code.labeling(), code.universe());
    CHECK(!is_complete(broken, a));
}

TEST_CASE("overhead") {
    Universe u;
    u.add("a");
    const LinearCode trivial(FieldMatrix::identity(3, FieldSpec(5)), {0, 0, 0}, u);
    CHECK(overhead(trivial) == Rational(0));
    CHECK(overhead(example_code()) == Rational(2, 5));
    CHECK(rational_to_string(Rational(33 - 12, 12)) == "7/4");
}

TEST_CASE("mds codes") {
    const LinearCode m23 = mds_code(2, 3, FieldSpec(3));
    CHECK(m23.generator() == vandermonde(2, 3, FieldSpec(3)));
    CHECK(m23.universe().name(0) == "V1");

    const LinearCode base6 = mds_code(5, 7, FieldSpec(7));
    CHECK(base6.generator() == vandermonde(5, 7, FieldSpec(7)));

    const LinearCode square = mds_code(4, 4, FieldSpec(5));
    CHECK(overhead(square) == Rational(0));
    CHECK_THROWS_AS(mds_code(2, 8, FieldSpec(7)), std::domain_error);
}

TEST_CASE("check_mds") {
    CHECK(check_mds(mds_code(3, 6, FieldSpec(7))));
    CHECK(check_mds(example_code()));

    Universe u;
    u.add("a");
    u.add("b");
    FieldMatrix repeated(2, 2, FieldSpec(5));
    repeated.set(0, 0, 1);
    repeated.set(0, 1, 1);
    repeated.set(1, 0, 2);
    repeated.set(1, 1, 2);
    // rank-deficient generators are rejected outright
    CHECK_THROWS_AS(LinearCode(repeated, {0, 1}, u), std::invalid_argument);

    FieldMatrix dup(2, 3, FieldSpec(5));
    dup.set(0, 0, 1);
    dup.set(0, 1, 1);
    dup.set(0, 2, 0);
    dup.set(1, 0, 2);
    dup.set(1, 1, 2);
    dup.set(1, 2, 1);
    Universe u3;
    for (const char* n : {"a", "b", "c"}) u3.add(n);
    CHECK(!check_mds(LinearCode(dup, {0, 1, 2}, u3)));

    const LinearCode ones(FieldMatrix::from_rows({{1, 1, 1, 1}}, FieldSpec(5)), {0, 0, 0, 0}, u);
    CHECK(check_mds(ones));
}

TEST_CASE("basic_encode reproduces the worked chunk table") {
    const AccessTree tree = parse_tree("(1 (2 (1 a b) (3 c d e)) (2 (2 a b) (1 c d e)))");
    const BitFile f = bits({0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1});
    const ChunkAssignment chunks = basic_encode(tree, f);
    const Universe& u = tree.universe;

    const BitChunk f1 = {0, 1, 1, 1, 0, 0};
    const BitChunk f2 = {1, 0, 1, 1, 0, 1};
    const BitChunk fp1 = {1, 0}, fp2 = {1, 1}, fp3 = {0, 1};
    const BitChunk fs1 = {0, 1, 1}, fs2 = {1, 0, 0};

    CHECK(chunks.per_node[u.require("a")] == std::vector<BitChunk>{f1, fs1});
    CHECK(chunks.per_node[u.require("b")] == std::vector<BitChunk>{f1, fs2});
    CHECK(chunks.per_node[u.require("c")] == std::vector<BitChunk>{fp1, f2});
    CHECK(chunks.per_node[u.require("d")] == std::vector<BitChunk>{fp2, f2});
    CHECK(chunks.per_node[u.require("e")] == std::vector<BitChunk>{fp3, f2});
}

TEST_CASE("basic_encode simple shapes") {
    const AccessTree leaf = parse_tree("p1");
    const BitFile f = bits({1, 0, 1});
    CHECK(basic_encode(leaf, f).per_node[0] == std::vector<BitChunk>{{1, 0, 1}});

    const AccessTree orTree = parse_tree("(1 p1 p2)");
    const ChunkAssignment both = basic_encode(orTree, f);
    CHECK(both.per_node[0] == std::vector<BitChunk>{{1, 0, 1}});
    CHECK(both.per_node[1] == std::vector<BitChunk>{{1, 0, 1}});

    CHECK_THROWS_AS(basic_encode(parse_tree("(2 p1 p2)"), bits({1, 0, 1})), std::invalid_argument);
}

TEST_CASE("basic_decode") {
    const AccessTree tree = parse_tree("(1 (2 (1 a b) (3 c d e)) (2 (2 a b) (1 c d e)))");
    const BitFile f = bits({0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1});
    const ChunkAssignment chunks = basic_encode(tree, f);
    const Universe& u = tree.universe;

    CHECK(basic_decode(tree, chunks, mask_of(u, {"a", "b", "c"}))->bits == f.bits);
    CHECK(!basic_decode(tree, chunks, mask_of(u, {"c", "d"})).has_value());
    CHECK(basic_decode(tree, chunks, u.full_mask())->bits == f.bits);
}

TEST_CASE("threshold expansion keeps the evaluation") {
    testutil::Rng rng(17);
    for (int iter = 0; iter < 60; ++iter) {
        const AccessTree tree = parse_tree(testutil::random_general_tree_text(rng, 6, 3));
        const AccessTree expanded = expand_thresholds(tree);
        for (NodeMask s = 0; s <= tree.universe.full_mask(); ++s) {
            CHECK(evaluate(tree, s) == evaluate(expanded, s));
        }
    }
}

TEST_CASE("basic construction round-trips every access set") {
    testutil::Rng rng(23);
    for (int iter = 0; iter < 40; ++iter) {
        const AccessTree tree = parse_tree(testutil::random_general_tree_text(rng, 5, 3));
        const std::size_t align = basic_chunk_alignment(tree);
        BitFile f;
        const std::size_t kappa = align * (1 + rng.below(3));
        for (std::size_t i = 0; i < kappa; ++i) f.bits.push_back(rng.below(2) != 0);

        const ChunkAssignment chunks = basic_encode(tree, f);
        for (NodeMask s = 0; s <= tree.universe.full_mask(); ++s) {
            const auto recovered = basic_decode(tree, chunks, s);
            if (evaluate(tree, s)) {
                REQUIRE(recovered.has_value());
                CHECK(recovered->bits == f.bits);
            } else {
                CHECK(!recovered.has_value());
            }
        }
    }
}

TEST_CASE("completeness equals access-set rank") {
    testutil::Rng rng(41);
    for (int iter = 0; iter < 25; ++iter) {
        const AccessTree tree = parse_tree(testutil::random_general_tree_text(rng, 5, 3));
        const AccessStructure a = enumerate_minimal(tree);
        const LinearCode code = build_lp_code(a);
        bool all_rank = true;
        for (NodeMask s : a.sets) {
            const auto cols = code.columns_of_set(s);
            if (rank(code.generator().select_columns(cols)) != code.dimension()) all_rank = false;
        }
        CHECK(is_complete(code, a) == all_rank);
        CHECK(is_complete(code, a));
    }
}
