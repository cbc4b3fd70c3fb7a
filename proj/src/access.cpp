#include "mec/access.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <set>
#include <stdexcept>

namespace mec {

int popcount(NodeMask m) { return std::popcount(m); }

int Universe::add(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const int idx = static_cast<int>(names_.size());
    names_.push_back(name);
    index_.emplace(name, idx);
    return idx;
}

int Universe::index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

int Universe::require(const std::string& name) const {
    const int i = index_of(name);
    if (i < 0) throw std::invalid_argument("unknown node name: " + name);
    return i;
}

NodeMask Universe::full_mask() const {
    if (names_.empty()) return 0;
    return (NodeMask{1} << names_.size()) - 1;
}

std::string Universe::set_to_string(NodeMask m) const {
    std::string out = "{";
    bool first = true;
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (m >> i & 1) {
            if (!first) out += ",";
            out += names_[i];
            first = false;
        }
    }
    return out + "}";
}

namespace {

struct Tokenizer {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        if (pos >= text.size()) throw std::runtime_error("unexpected end of access-tree text");
        return text[pos];
    }
    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')') {
            ++pos;
        }
        if (pos == start) throw std::runtime_error("expected token at offset " + std::to_string(pos));
        return text.substr(start, pos - start);
    }
};

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

TreeNode parse_vertex(Tokenizer& tk, Universe& universe) {
    if (tk.peek() == '(') {
        ++tk.pos;
        const std::string tword = tk.word();
        int threshold = 0;
        try {
            std::size_t used = 0;
            threshold = std::stoi(tword, &used);
            if (used != tword.size()) throw std::invalid_argument(tword);
        } catch (const std::exception&) {
            throw std::runtime_error("expected integer threshold, got '" + tword + "'");
        }
        TreeNode v;
        v.threshold = threshold;
        while (tk.peek() != ')') v.children.push_back(parse_vertex(tk, universe));
        ++tk.pos;  // consume ')'
        if (v.children.empty()) throw std::runtime_error("internal vertex needs at least one child");
        if (threshold < 1 || threshold > static_cast<int>(v.children.size())) {
            throw std::runtime_error("threshold " + std::to_string(threshold) + " out of range [1," +
                                     std::to_string(v.children.size()) + "]");
        }
        return v;
    }
    const std::string name = tk.word();
    if (!valid_identifier(name)) throw std::runtime_error("invalid node name '" + name + "'");
    TreeNode v;
    v.leaf = universe.add(name);
    return v;
}

void collect_text(const TreeNode& v, const Universe& u, std::string& out) {
    if (v.is_leaf()) {
        out += u.name(v.leaf);
        return;
    }
    out += "(" + std::to_string(v.threshold);
    for (const auto& c : v.children) {
        out += " ";
        collect_text(c, u, out);
    }
    out += ")";
}

void collect_leaves(const TreeNode& v, std::vector<int>& leaves) {
    if (v.is_leaf()) {
        leaves.push_back(v.leaf);
        return;
    }
    for (const auto& c : v.children) collect_leaves(c, leaves);
}

TreeNode pad_to_depth(const TreeNode& v, int depth) {
    if (v.is_leaf()) {
        TreeNode out = v;
        for (int i = 0; i < depth; ++i) {
            TreeNode wrap;
            wrap.threshold = 1;
            wrap.children.push_back(std::move(out));
            out = std::move(wrap);
        }
        return out;
    }
    TreeNode out;
    out.threshold = v.threshold;
    for (const auto& c : v.children) out.children.push_back(pad_to_depth(c, depth - 1));
    return out;
}

}  // namespace

AccessTree parse_tree(const std::string& text) {
    Tokenizer tk{text};
    AccessTree tree;
    tree.root = parse_vertex(tk, tree.universe);
    if (!tk.done()) throw std::runtime_error("trailing input after access tree");
    if (tree.universe.size() > kMaxUniverse) {
        throw std::length_error("universe larger than " + std::to_string(kMaxUniverse) + " nodes");
    }
    return tree;
}

std::string tree_to_text(const AccessTree& tree) {
    std::string out;
    collect_text(tree.root, tree.universe, out);
    return out;
}

bool evaluate(const TreeNode& v, NodeMask s) {
    if (v.is_leaf()) return (s >> v.leaf) & 1;
    int satisfied = 0;
    for (const auto& c : v.children) {
        if (evaluate(c, s)) {
            ++satisfied;
            if (satisfied >= v.threshold) return true;
        }
    }
    return false;
}

bool evaluate(const AccessTree& tree, NodeMask s) { return evaluate(tree.root, s); }

AccessStructure enumerate_minimal(const AccessTree& tree) {
    const std::size_t n = tree.universe.size();
    if (n > kMaxUniverse) throw std::length_error("universe too large for enumeration");
    const NodeMask full = tree.universe.full_mask();

    std::vector<char> truth(static_cast<std::size_t>(full) + 1);
    for (NodeMask s = 0; s <= full; ++s) truth[s] = evaluate(tree, s) ? 1 : 0;

    AccessStructure out;
    out.universe = tree.universe;
    for (NodeMask s = 1; s <= full; ++s) {
        if (!truth[s]) continue;
        bool minimal = true;
        for (std::size_t i = 0; i < n && minimal; ++i) {
            if ((s >> i & 1) && truth[s & ~(NodeMask{1} << i)]) minimal = false;
        }
        if (minimal) out.sets.push_back(s);
        if (s == full) break;
    }
    return out;
}

std::optional<std::string> duplicated_leaf(const AccessTree& tree) {
    std::vector<int> leaves;
    collect_leaves(tree.root, leaves);
    std::set<int> seen;
    for (int l : leaves) {
        if (!seen.insert(l).second) return tree.universe.name(l);
    }
    return std::nullopt;
}

bool is_partitioned(const AccessTree& tree) { return !duplicated_leaf(tree).has_value(); }

int tree_depth(const TreeNode& v) {
    if (v.is_leaf()) return 0;
    int d = 0;
    for (const auto& c : v.children) d = std::max(d, tree_depth(c));
    return d + 1;
}

AccessTree balance(const AccessTree& tree) {
    AccessTree out;
    out.universe = tree.universe;
    out.root = pad_to_depth(tree.root, tree_depth(tree.root));
    return out;
}

std::size_t min_access_set_size(const AccessStructure& a) {
    if (a.sets.empty()) throw std::invalid_argument("empty access structure");
    std::size_t tau = kMaxUniverse + 1;
    for (NodeMask s : a.sets) tau = std::min(tau, static_cast<std::size_t>(popcount(s)));
    return tau;
}

bool is_antichain(const std::vector<NodeMask>& sets) {
    for (std::size_t i = 0; i < sets.size(); ++i)
        for (std::size_t j = 0; j < sets.size(); ++j)
            if (i != j && (sets[i] & sets[j]) == sets[i]) return false;
    return true;
}

}  // namespace mec
