#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mec/access.hpp"
#include "mec/field.hpp"
#include "mec/rational.hpp"

namespace mec {

/// One node's fragment: a sequence of field symbols, or absent (the paper's
/// bottom marker for nodes that hold no columns).
using Fragment = std::optional<std::vector<std::uint64_t>>;

/// Per-node fragments, indexed by node.
struct FragmentVector {
    std::vector<Fragment> entries;
};

/// Linear monotone erasure code: full-rank generator over a prime field plus
/// a column-to-node labeling.
class LinearCode {
public:
    LinearCode(FieldMatrix generator, std::vector<int> labeling, Universe universe);

    FieldSpec field() const { return g_.field(); }
    std::size_t dimension() const { return g_.rows(); }  // k
    std::size_t length() const { return g_.cols(); }     // m
    const FieldMatrix& generator() const { return g_; }
    const std::vector<int>& labeling() const { return labeling_; }
    const Universe& universe() const { return universe_; }
    std::size_t node_count() const { return universe_.size(); }

    /// Global column indices labeled with `node`, ascending.
    const std::vector<std::size_t>& columns_of(int node) const;
    std::size_t symbols_of(int node) const { return columns_of(node).size(); }

    /// Columns of the generator owned by the nodes in `s`, ascending.
    std::vector<std::size_t> columns_of_set(NodeMask s) const;

private:
    FieldMatrix g_;
    std::vector<int> labeling_;
    Universe universe_;
    std::vector<std::vector<std::size_t>> columns_;  // per node
};

FragmentVector encode(const LinearCode& code, const std::vector<std::uint64_t>& f);

/// Assembles the submatrix of the present fragments and solves for f.
/// Returns nullopt on insufficient rank or an inconsistent system.
std::optional<std::vector<std::uint64_t>> decode(const LinearCode& code, const FragmentVector& u);

/// Restriction of a fragment vector to a node set (others become absent).
FragmentVector restrict_to(const FragmentVector& u, NodeMask s);

bool is_sufficient(const LinearCode& code, NodeMask s);
bool is_complete(const LinearCode& code, const AccessStructure& a);

/// Exact overhead (m - k) / k.
Rational overhead(const LinearCode& code);

/// [m,k] MDS code from the canonical Vandermonde generator.  When no
/// labeling is given, column i goes to virtual node V_{i+1}.
LinearCode mds_code(std::size_t k, std::size_t m, FieldSpec q);
LinearCode mds_code(std::size_t k, std::size_t m, FieldSpec q, std::vector<int> labeling,
                    Universe universe);

/// True iff every k-subset of generator columns has rank k.  m <= 16.
bool check_mds(const LinearCode& code);

// --- basic bit-chunking construction -------------------------------------

/// File as a bit string.
struct BitFile {
    std::vector<std::uint8_t> bits;  // each 0 or 1
};

using BitChunk = std::vector<std::uint8_t>;

/// Per-node ordered chunk lists, indexed by node.
struct ChunkAssignment {
    std::vector<std::vector<BitChunk>> per_node;
};

/// Rewrites every threshold vertex with 1 < t < r as an OR over all
/// t-subsets of its children, each grouped under an AND.  Fan-out capped at 8.
AccessTree expand_thresholds(const AccessTree& tree);

/// Least kappa multiple that satisfies every AND split of the expanded tree.
std::size_t basic_chunk_alignment(const AccessTree& tree);

/// Splits f down the (expanded) tree: AND vertices divide their chunk evenly
/// among children, OR vertices copy it.  A node's fragment is the list of
/// chunks of its leaves in depth-first order.
ChunkAssignment basic_encode(const AccessTree& tree, const BitFile& f);

/// Reassembles f using only leaves owned by nodes in `a`; nullopt when the
/// set does not satisfy the tree.
std::optional<BitFile> basic_decode(const AccessTree& tree, const ChunkAssignment& chunks,
                                    NodeMask a);

}  // namespace mec
