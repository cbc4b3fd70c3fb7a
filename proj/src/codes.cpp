#include "mec/codes.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mec {

LinearCode::LinearCode(FieldMatrix generator, std::vector<int> labeling, Universe universe)
    : g_(std::move(generator)), labeling_(std::move(labeling)), universe_(std::move(universe)) {
    if (labeling_.size() != g_.cols()) {
        throw std::invalid_argument("labeling must assign every generator column");
    }
    columns_.resize(universe_.size());
    for (std::size_t j = 0; j < labeling_.size(); ++j) {
        const int node = labeling_[j];
        if (node < 0 || static_cast<std::size_t>(node) >= universe_.size()) {
            throw std::invalid_argument("labeling references unknown node");
        }
        columns_[static_cast<std::size_t>(node)].push_back(j);
    }
    if (rank(g_) != g_.rows()) throw std::invalid_argument("generator matrix is rank deficient");
}

const std::vector<std::size_t>& LinearCode::columns_of(int node) const {
    return columns_.at(static_cast<std::size_t>(node));
}

std::vector<std::size_t> LinearCode::columns_of_set(NodeMask s) const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < labeling_.size(); ++j) {
        if (s >> labeling_[j] & 1) idx.push_back(j);
    }
    return idx;
}

FragmentVector encode(const LinearCode& code, const std::vector<std::uint64_t>& f) {
    if (f.size() != code.dimension()) throw std::invalid_argument("file length must equal k");
    const auto symbols = row_times_matrix(f, code.generator());
    FragmentVector out;
    out.entries.resize(code.node_count());
    for (std::size_t i = 0; i < code.node_count(); ++i) {
        const auto& cols = code.columns_of(static_cast<int>(i));
        if (cols.empty()) continue;  // fragment stays absent
        std::vector<std::uint64_t> g;
        g.reserve(cols.size());
        for (std::size_t j : cols) g.push_back(symbols[j]);
        out.entries[i] = std::move(g);
    }
    return out;
}

std::optional<std::vector<std::uint64_t>> decode(const LinearCode& code, const FragmentVector& u) {
    if (u.entries.size() != code.node_count()) {
        throw std::invalid_argument("fragment vector has wrong node count");
    }
    std::vector<std::size_t> cols;
    std::vector<std::uint64_t> symbols;
    for (std::size_t i = 0; i < u.entries.size(); ++i) {
        const auto& frag = u.entries[i];
        if (!frag.has_value()) continue;
        const auto& own = code.columns_of(static_cast<int>(i));
        if (frag->size() != own.size()) {
            throw std::invalid_argument("fragment of node " + code.universe().name(static_cast<int>(i)) +
                                        " has wrong length");
        }
        for (std::size_t j = 0; j < own.size(); ++j) {
            cols.push_back(own[j]);
            symbols.push_back((*frag)[j]);
        }
    }
    if (cols.empty()) return std::nullopt;
    return solve_left(code.generator().select_columns(cols), symbols);
}

FragmentVector restrict_to(const FragmentVector& u, NodeMask s) {
    FragmentVector out;
    out.entries.resize(u.entries.size());
    for (std::size_t i = 0; i < u.entries.size(); ++i) {
        if (s >> i & 1) out.entries[i] = u.entries[i];
    }
    return out;
}

bool is_sufficient(const LinearCode& code, NodeMask s) {
    const auto cols = code.columns_of_set(s);
    if (cols.size() < code.dimension()) return false;
    return rank(code.generator().select_columns(cols)) == code.dimension();
}

bool is_complete(const LinearCode& code, const AccessStructure& a) {
    return std::all_of(a.sets.begin(), a.sets.end(),
                       [&](NodeMask s) { return is_sufficient(code, s); });
}

Rational overhead(const LinearCode& code) {
    return Rational(BigInt(code.length()) - BigInt(code.dimension()), BigInt(code.dimension()));
}

LinearCode mds_code(std::size_t k, std::size_t m, FieldSpec q) {
    Universe u;
    std::vector<int> labeling(m);
    for (std::size_t i = 0; i < m; ++i) labeling[i] = u.add("V" + std::to_string(i + 1));
    return mds_code(k, m, q, std::move(labeling), std::move(u));
}

LinearCode mds_code(std::size_t k, std::size_t m, FieldSpec q, std::vector<int> labeling,
                    Universe universe) {
    if (k < 1 || k > m) throw std::invalid_argument("mds code needs 1 <= k <= m");
    if (m > q.q) throw std::domain_error("mds code needs m <= q");
    return LinearCode(vandermonde(k, m, q), std::move(labeling), std::move(universe));
}

bool check_mds(const LinearCode& code) {
    const std::size_t m = code.length();
    const std::size_t k = code.dimension();
    if (m > 16) throw std::length_error("check_mds enumerates column subsets only up to m = 16");
    std::vector<std::size_t> pick(k);
    // enumerate k-subsets of columns in lexicographic order
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        if (rank(code.generator().select_columns(pick)) != k) return false;
        // next combination
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (pick[i] != i + m - k) break;
            if (i == 0) return true;
        }
        if (pick[i] == i + m - k) return true;
        ++pick[i];
        for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

// --- basic bit-chunking construction -------------------------------------

namespace {

constexpr std::size_t kExpansionFanoutCap = 8;

TreeNode expand_vertex(const TreeNode& v) {
    if (v.is_leaf()) return v;
    std::vector<TreeNode> children;
    children.reserve(v.children.size());
    for (const auto& c : v.children) children.push_back(expand_vertex(c));

    const std::size_t r = children.size();
    const std::size_t t = static_cast<std::size_t>(v.threshold);
    if (t == 1 || t == r) {
        TreeNode out;
        out.threshold = v.threshold;
        out.children = std::move(children);
        return out;
    }
    if (r > kExpansionFanoutCap) {
        throw std::length_error("threshold expansion capped at fan-out " +
                                std::to_string(kExpansionFanoutCap));
    }
    // OR over all t-subsets of children, each an AND group, lexicographic.
    TreeNode out;
    out.threshold = 1;
    std::vector<std::size_t> pick(t);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        TreeNode group;
        group.threshold = static_cast<int>(t);
        for (std::size_t idx : pick) group.children.push_back(children[idx]);
        out.children.push_back(std::move(group));
        std::size_t i = t;
        bool done = false;
        while (i > 0) {
            --i;
            if (pick[i] != i + r - t) break;
            if (i == 0) done = true;
        }
        if (done || pick[i] == i + r - t) break;
        ++pick[i];
        for (std::size_t j = i + 1; j < t; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
}

struct LeafRef {
    int node = -1;
    std::size_t occurrence = 0;  // index into the node's chunk list
};

void number_leaves(const TreeNode& v, std::vector<std::size_t>& next_occurrence,
                   std::vector<LeafRef>& order) {
    if (v.is_leaf()) {
        order.push_back({v.leaf, next_occurrence[static_cast<std::size_t>(v.leaf)]++});
        return;
    }
    for (const auto& c : v.children) number_leaves(c, next_occurrence, order);
}

std::size_t and_alignment(const TreeNode& v) {
    if (v.is_leaf()) return 1;
    const bool is_and = v.threshold == static_cast<int>(v.children.size()) && v.children.size() > 1;
    const std::size_t fan = is_and ? v.children.size() : 1;
    std::size_t l = 1;
    for (const auto& c : v.children) l = std::lcm(l, and_alignment(c));
    return fan * l;
}

void assign_chunks(const TreeNode& v, const BitChunk& chunk, const Universe& u,
                   ChunkAssignment& out, const std::string& path) {
    if (v.is_leaf()) {
        out.per_node[static_cast<std::size_t>(v.leaf)].push_back(chunk);
        return;
    }
    const std::size_t r = v.children.size();
    const bool is_and = v.threshold == static_cast<int>(r) && r > 1;
    if (is_and) {
        if (chunk.size() % r != 0) {
            throw std::invalid_argument("chunk of length " + std::to_string(chunk.size()) +
                                        " not divisible by " + std::to_string(r) +
                                        " at vertex " + path);
        }
        const std::size_t piece = chunk.size() / r;
        for (std::size_t i = 0; i < r; ++i) {
            BitChunk sub(chunk.begin() + static_cast<long>(i * piece),
                         chunk.begin() + static_cast<long>((i + 1) * piece));
            assign_chunks(v.children[i], sub, u, out, path + "." + std::to_string(i + 1));
        }
    } else {
        for (std::size_t i = 0; i < r; ++i) {
            assign_chunks(v.children[i], chunk, u, out, path + "." + std::to_string(i + 1));
        }
    }
}

// Reconstructs the chunk at vertex v of the given length, consuming leaf
// references from `order` at position `cursor` in depth-first order.
std::optional<BitChunk> reconstruct(const TreeNode& v, std::size_t len, NodeMask a,
                                    const ChunkAssignment& chunks,
                                    const std::vector<LeafRef>& order, std::size_t& cursor) {
    if (v.is_leaf()) {
        const LeafRef ref = order[cursor++];
        if (!(a >> ref.node & 1)) return std::nullopt;
        const auto& list = chunks.per_node[static_cast<std::size_t>(ref.node)];
        if (ref.occurrence >= list.size()) {
            throw std::invalid_argument("missing chunk for a leaf of the tree");
        }
        const BitChunk& c = list[ref.occurrence];
        if (c.size() != len) throw std::invalid_argument("malformed chunk length");
        return c;
    }
    const std::size_t r = v.children.size();
    const bool is_and = v.threshold == static_cast<int>(r) && r > 1;
    if (is_and) {
        if (len % r != 0) throw std::invalid_argument("malformed chunk length at AND vertex");
        BitChunk out;
        out.reserve(len);
        bool ok = true;
        for (const auto& c : v.children) {
            auto sub = reconstruct(c, len / r, a, chunks, order, cursor);
            if (!sub) {
                ok = false;  // keep walking so the cursor stays aligned
            } else if (ok) {
                out.insert(out.end(), sub->begin(), sub->end());
            }
        }
        if (!ok) return std::nullopt;
        return out;
    }
    // OR: take the first child that reconstructs fully.
    std::optional<BitChunk> found;
    for (const auto& c : v.children) {
        auto sub = reconstruct(c, len, a, chunks, order, cursor);
        if (sub && !found) found = std::move(sub);
    }
    return found;
}

}  // namespace

AccessTree expand_thresholds(const AccessTree& tree) {
    AccessTree out;
    out.universe = tree.universe;
    out.root = expand_vertex(tree.root);
    return out;
}

std::size_t basic_chunk_alignment(const AccessTree& tree) {
    return and_alignment(expand_thresholds(tree).root);
}

ChunkAssignment basic_encode(const AccessTree& tree, const BitFile& f) {
    if (f.bits.empty()) throw std::invalid_argument("file must have at least one bit");
    const AccessTree expanded = expand_thresholds(tree);
    ChunkAssignment out;
    out.per_node.resize(tree.universe.size());
    assign_chunks(expanded.root, f.bits, tree.universe, out, "root");
    return out;
}

std::optional<BitFile> basic_decode(const AccessTree& tree, const ChunkAssignment& chunks,
                                    NodeMask a) {
    if (chunks.per_node.size() != tree.universe.size()) {
        throw std::invalid_argument("chunk assignment has wrong node count");
    }
    const AccessTree expanded = expand_thresholds(tree);
    if (!evaluate(expanded, a)) return std::nullopt;

    std::vector<std::size_t> occ(tree.universe.size(), 0);
    std::vector<LeafRef> order;
    number_leaves(expanded.root, occ, order);

    // Infer kappa from the first available chunk: OR preserves length and an
    // AND with r children divides it by r along the path.
    std::size_t kappa = 0;
    {
        std::size_t cursor = 0;
        struct Walker {
            NodeMask a;
            const ChunkAssignment& chunks;
            const std::vector<LeafRef>& order;
            std::size_t& cursor;
            std::optional<std::size_t> walk(const TreeNode& v, std::size_t divisor) {
                if (v.is_leaf()) {
                    const LeafRef ref = order[cursor++];
                    if (!(a >> ref.node & 1)) return std::nullopt;
                    const auto& list = chunks.per_node[static_cast<std::size_t>(ref.node)];
                    if (ref.occurrence >= list.size()) return std::nullopt;
                    return list[ref.occurrence].size() * divisor;
                }
                const std::size_t r = v.children.size();
                const bool is_and = v.threshold == static_cast<int>(r) && r > 1;
                std::optional<std::size_t> found;
                for (const auto& c : v.children) {
                    auto k = walk(c, divisor * (is_and ? r : 1));
                    if (k && !found) found = k;
                }
                return found;
            }
        } walker{a, chunks, order, cursor};
        auto k = walker.walk(expanded.root, 1);
        if (!k) return std::nullopt;
        kappa = *k;
    }

    std::size_t cursor = 0;
    auto bits = reconstruct(expanded.root, kappa, a, chunks, order, cursor);
    if (!bits) return std::nullopt;
    return BitFile{std::move(*bits)};
}

}  // namespace mec
