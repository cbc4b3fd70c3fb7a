#include "mec/construct.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mec {

namespace {

void max_fanout(const TreeNode& v, std::uint64_t& bound) {
    if (v.is_leaf()) return;
    if (v.threshold != 1) bound = std::max(bound, static_cast<std::uint64_t>(v.children.size()));
    for (const auto& c : v.children) max_fanout(c, bound);
}

struct KroneckerPiece {
    FieldMatrix m;
    std::size_t nu;
    std::size_t k;
    std::vector<int> labels;
};

KroneckerPiece build_piece(const TreeNode& v, FieldSpec q, std::size_t cap) {
    if (v.is_leaf()) {
        FieldMatrix one(1, 1, q);
        one.set(0, 0, 1);
        return {std::move(one), 1, 1, {v.leaf}};
    }
    std::vector<KroneckerPiece> subs;
    subs.reserve(v.children.size());
    for (const auto& c : v.children) subs.push_back(build_piece(c, q, cap));

    std::uint64_t lambda = 1;
    for (const auto& s : subs) lambda = std::lcm(lambda, static_cast<std::uint64_t>(s.k));

    const std::size_t r = subs.size();
    const std::size_t t = static_cast<std::size_t>(v.threshold);
    const std::uint64_t k_out = lambda * t;
    std::uint64_t nu_out = 0;
    for (const auto& s : subs) nu_out += (lambda / s.k) * s.nu;
    if (k_out > cap || nu_out > cap) {
        throw std::length_error("kronecker construction exceeds the dimension cap of " +
                                std::to_string(cap));
    }

    std::vector<FieldMatrix> lifted;
    std::vector<int> labels;
    lifted.reserve(r);
    labels.reserve(nu_out);
    for (const auto& s : subs) {
        const std::size_t alpha = static_cast<std::size_t>(lambda / s.k);
        lifted.push_back(kronecker(s.m, FieldMatrix::identity(alpha, q)));
        for (int l : s.labels) {
            labels.insert(labels.end(), alpha, l);
        }
    }

    // t = 1 needs only the all-ones row; it never requires distinct points,
    // so it is exempt from the r <= q field-size bound.
    FieldMatrix a = t == 1 ? FieldMatrix::from_rows({std::vector<std::uint64_t>(r, 1)}, q)
                           : vandermonde(t, r, q);
    FieldMatrix m = mat_mul(kronecker(a, FieldMatrix::identity(static_cast<std::size_t>(lambda), q)),
                            diag_blocks(lifted, q));
    return {std::move(m), static_cast<std::size_t>(nu_out), static_cast<std::size_t>(k_out),
            std::move(labels)};
}

// Collects (children count, product of labels on the root-to-vertex path)
// for every vertex of the balanced tree whose children are all leaves.
void collect_leaf_parents(const TreeNode& v, const BigInt& prod,
                          std::vector<std::pair<std::size_t, BigInt>>& out) {
    if (v.is_leaf()) return;
    const BigInt here = prod * v.threshold;
    const bool all_leaves = std::all_of(v.children.begin(), v.children.end(),
                                        [](const TreeNode& c) { return c.is_leaf(); });
    if (all_leaves) {
        out.emplace_back(v.children.size(), here);
        return;
    }
    for (const auto& c : v.children) collect_leaf_parents(c, here, out);
}

void require_partitioned(const AccessTree& tree) {
    if (auto dup = duplicated_leaf(tree)) {
        throw std::invalid_argument("tree is not partitioned: node '" + *dup +
                                    "' labels more than one leaf");
    }
}

struct FaNode {
    std::uint64_t nu;
    std::uint64_t k;
    std::vector<std::uint64_t> h;
};

FaNode fa_recurse(const TreeNode& v, std::size_t n) {
    if (v.is_leaf()) {
        FaNode out{1, 1, std::vector<std::uint64_t>(n, 0)};
        out.h[static_cast<std::size_t>(v.leaf)] = 1;
        return out;
    }
    const std::size_t r = v.children.size();
    const std::size_t t = static_cast<std::size_t>(v.threshold);
    std::vector<FaNode> subs;
    subs.reserve(r);
    for (const auto& c : v.children) subs.push_back(fa_recurse(c, n));

    // Sort children by fragment rate rho = nu/k, ascending; stable so ties
    // keep child order.
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return Rational(subs[a].nu, subs[a].k) < Rational(subs[b].nu, subs[b].k);
    });
    std::vector<Rational> rho(r);
    for (std::size_t i = 0; i < r; ++i) rho[i] = Rational(subs[order[i]].nu, subs[order[i]].k);

    // Smallest s in {r-t+1, ..., r-1} whose next rate is at least the scaled
    // prefix sum; r when none qualifies.
    std::size_t s_star = r;
    Rational prefix = 0;
    for (std::size_t s = 1; s < r; ++s) {
        prefix += rho[s - 1];
        if (s < r - t + 1) continue;
        if (rho[s] >= prefix / Rational(s - (r - t))) {
            s_star = s;
            break;
        }
    }

    std::uint64_t lambda = 1;
    for (std::size_t i = 0; i < s_star; ++i) lambda = std::lcm(lambda, subs[order[i]].k);
    if (lambda > (std::uint64_t{1} << 40)) throw std::length_error("fa threshold exceeds scale cap");

    FaNode out{0, (s_star - (r - t)) * lambda, std::vector<std::uint64_t>(n, 0)};
    for (std::size_t i = 0; i < s_star; ++i) {
        const FaNode& s = subs[order[i]];
        const std::uint64_t alpha = lambda / s.k;
        out.nu += alpha * s.nu;
        for (std::size_t z = 0; z < n; ++z) {
            if (s.h[z] == 0) continue;
            if (out.h[z] != 0) throw std::logic_error("node assigned by two subtrees");
            out.h[z] = alpha * s.h[z];
        }
    }
    return out;
}

}  // namespace

FieldSpec kronecker_field_size(const AccessTree& tree) {
    std::uint64_t bound = 2;
    max_fanout(tree.root, bound);
    return smallest_prime_at_least(bound);
}

KroneckerResult build_kronecker(const AccessTree& tree, std::size_t column_cap) {
    const FieldSpec q = kronecker_field_size(tree);
    KroneckerPiece piece = build_piece(tree.root, q, column_cap);
    return {std::move(piece.m), piece.nu, piece.k, std::move(piece.labels), q, tree.universe};
}

LinearCode kronecker_to_code(const KroneckerResult& result) {
    return LinearCode(result.matrix, result.labels, result.universe);
}

SizePrediction predict_kronecker_size(const AccessTree& tree) {
    SizePrediction out;
    if (tree.root.is_leaf()) {
        out.psi = {Rational(1)};
        out.k_pred = 1;
        out.cols_pred = 1;
        out.beta = 0;
        return out;
    }
    const AccessTree balanced = balance(tree);
    std::vector<std::pair<std::size_t, BigInt>> parents;
    collect_leaf_parents(balanced.root, 1, parents);

    Rational psi_sum = 0;
    out.k_pred = 1;
    for (const auto& [children, prod] : parents) {
        out.psi.emplace_back(BigInt(children), prod);
        psi_sum += out.psi.back();
        out.k_pred = boost::multiprecision::lcm(out.k_pred, prod);
    }
    const Rational cols = psi_sum * Rational(out.k_pred);
    out.cols_pred = num(cols);
    out.beta = psi_sum - 1;
    return out;
}

LinearCode build_lp_code(const AccessStructure& a, const BigInt& k_multiplier) {
    const LpSolution sol = solve_lpp(gamma_from_structure(a));
    const DerivedParameters params = derive_parameters(sol.y, k_multiplier);
    if (params.m > kDefaultColumnCap) {
        throw std::length_error("LP construction exceeds the column cap");
    }
    const std::size_t k = static_cast<std::size_t>(params.k);
    const std::size_t m = static_cast<std::size_t>(params.m);
    const FieldSpec q = smallest_prime_at_least(m);

    std::vector<int> labeling;
    labeling.reserve(m);
    for (std::size_t i = 0; i < params.per_node.size(); ++i) {
        const std::size_t mi = static_cast<std::size_t>(params.per_node[i]);
        labeling.insert(labeling.end(), mi, static_cast<int>(i));
    }
    return mds_code(k, m, q, std::move(labeling), a.universe);
}

OverheadBounds overhead_bounds(std::size_t n, std::size_t tau, const BigInt& k) {
    if (tau < 1 || tau > n) throw std::invalid_argument("need 1 <= tau <= n");
    if (k < 1) throw std::invalid_argument("k must be positive");
    OverheadBounds out;
    out.m_low = k;
    out.m_high = ((k + BigInt(tau) - 1) / BigInt(tau)) * BigInt(n);
    out.beta_bound = Rational(BigInt(n), k) + Rational(BigInt(n) - BigInt(tau), BigInt(tau));
    return out;
}

FaResult uniform_assignment(const AccessTree& tree) {
    require_partitioned(tree);
    if (tree.root.is_leaf()) {
        FaResult out{1, 1, std::vector<std::uint64_t>(tree.universe.size(), 0)};
        out.h[static_cast<std::size_t>(tree.root.leaf)] = 1;
        return out;
    }
    const AccessTree balanced = balance(tree);
    std::vector<std::pair<std::size_t, BigInt>> parents;
    collect_leaf_parents(balanced.root, 1, parents);

    BigInt k = 1;
    for (const auto& [children, prod] : parents) k = boost::multiprecision::lcm(k, prod);
    if (k > (BigInt(1) << 40)) throw std::length_error("uniform assignment exceeds scale cap");

    // Walk again to credit each leaf with k / path-product.
    FaResult out{0, static_cast<std::uint64_t>(k), std::vector<std::uint64_t>(tree.universe.size(), 0)};
    struct Walker {
        const BigInt& k;
        FaResult& out;
        void walk(const TreeNode& v, BigInt prod) {
            if (v.is_leaf()) return;
            prod *= v.threshold;
            for (const auto& c : v.children) {
                if (c.is_leaf()) {
                    const std::uint64_t count = static_cast<std::uint64_t>(k / prod);
                    out.h[static_cast<std::size_t>(c.leaf)] = count;
                    out.nu += count;
                } else {
                    walk(c, prod);
                }
            }
        }
    } walker{k, out};
    walker.walk(balanced.root, 1);
    return out;
}

FaResult fa_optimal(const AccessTree& tree) {
    require_partitioned(tree);
    FaNode node = fa_recurse(tree.root, tree.universe.size());
    return {node.nu, node.k, std::move(node.h)};
}

LinearCode build_partitioned_code(const AccessTree& tree, PartitionedMethod method) {
    const FaResult fa =
        method == PartitionedMethod::Uniform ? uniform_assignment(tree) : fa_optimal(tree);
    if (fa.nu > kDefaultColumnCap) throw std::length_error("partitioned code exceeds the column cap");
    const FieldSpec q = smallest_prime_at_least(fa.nu);
    std::vector<int> labeling;
    labeling.reserve(static_cast<std::size_t>(fa.nu));
    for (std::size_t i = 0; i < fa.h.size(); ++i) {
        labeling.insert(labeling.end(), static_cast<std::size_t>(fa.h[i]), static_cast<int>(i));
    }
    return mds_code(static_cast<std::size_t>(fa.k), static_cast<std::size_t>(fa.nu), q,
                    std::move(labeling), tree.universe);
}

ParametersReport parameters_report(const AccessTree& tree, const std::string& method) {
    ParametersReport report;
    report.method = method;

    auto fill_from_code = [&](const LinearCode& code) {
        report.k = BigInt(code.dimension());
        report.m = BigInt(code.length());
        report.beta = overhead(code);
        report.q = code.field().q;
        for (std::size_t i = 0; i < code.node_count(); ++i) {
            report.per_node.emplace_back(code.universe().name(static_cast<int>(i)),
                                         BigInt(code.symbols_of(static_cast<int>(i))));
        }
    };

    if (method == "lp") {
        fill_from_code(build_lp_code(enumerate_minimal(tree)));
    } else if (method == "uniform") {
        fill_from_code(build_partitioned_code(tree, PartitionedMethod::Uniform));
    } else if (method == "optimal") {
        fill_from_code(build_partitioned_code(tree, PartitionedMethod::Optimal));
    } else if (method == "kronecker") {
        const KroneckerResult kr = build_kronecker(tree);
        fill_from_code(kronecker_to_code(kr));
    } else {
        throw std::invalid_argument("unknown method '" + method + "'");
    }
    return report;
}

}  // namespace mec
