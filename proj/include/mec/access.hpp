#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mec {

/// Node subsets are bitmasks over the universe (bit i = node with index i).
using NodeMask = std::uint64_t;

constexpr std::size_t kMaxUniverse = 20;

int popcount(NodeMask m);

/// Dense node registry.  Indices follow first appearance in the input; the
/// wire formats report 1-based indices alongside names.
class Universe {
public:
    int add(const std::string& name);
    int index_of(const std::string& name) const;  // -1 when absent
    int require(const std::string& name) const;   // throws when absent
    const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    NodeMask full_mask() const;
    std::string set_to_string(NodeMask m) const;

    bool operator==(const Universe&) const = default;

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
};

struct TreeNode {
    int threshold = 0;               // label t of an internal vertex
    int leaf = -1;                   // node index for leaves
    std::vector<TreeNode> children;  // empty exactly for leaves

    bool is_leaf() const { return children.empty(); }
    bool operator==(const TreeNode&) const = default;
};

struct AccessTree {
    TreeNode root;
    Universe universe;
};

/// Parses the canonical s-expression grammar: a tree is either a bare
/// identifier or "(t child...)" with 1 <= t <= number of children.
AccessTree parse_tree(const std::string& text);

/// Canonical text form of a tree (inverse of parse_tree up to whitespace).
std::string tree_to_text(const AccessTree& tree);

bool evaluate(const TreeNode& v, NodeMask s);
bool evaluate(const AccessTree& tree, NodeMask s);

/// Antichain of node subsets in a fixed enumeration order.
struct AccessStructure {
    Universe universe;
    std::vector<NodeMask> sets;
};

/// All inclusion-minimal satisfying sets, ascending by bitmask value.
/// Requires |universe| <= 20.
AccessStructure enumerate_minimal(const AccessTree& tree);

/// True iff no node labels two distinct leaves.
bool is_partitioned(const AccessTree& tree);

/// Name of some node labelling two leaves, when one exists.
std::optional<std::string> duplicated_leaf(const AccessTree& tree);

/// Pads every root-to-leaf path to equal length by inserting threshold-1
/// single-child vertices above shallow leaves; evaluation is unchanged.
AccessTree balance(const AccessTree& tree);

int tree_depth(const TreeNode& v);

/// Size of the smallest access set (the paper's tau).
std::size_t min_access_set_size(const AccessStructure& a);

bool is_antichain(const std::vector<NodeMask>& sets);

}  // namespace mec
