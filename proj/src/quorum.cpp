#include "mec/quorum.hpp"

#include <algorithm>
#include <stdexcept>

namespace mec {

namespace {

// closure[s] = 1 iff s contains some member of `sets`; subset DP, O(2^n * n).
std::vector<char> superset_closure(const std::vector<NodeMask>& sets, std::size_t n) {
    std::vector<char> closure(std::size_t{1} << n, 0);
    for (NodeMask s : sets) closure[s] = 1;
    for (NodeMask s = 0; s < (NodeMask{1} << n); ++s) {
        if (closure[s]) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if ((s >> i & 1) && closure[s & ~(NodeMask{1} << i)]) {
                closure[s] = 1;
                break;
            }
        }
    }
    return closure;
}

std::vector<NodeMask> sorted(std::vector<NodeMask> v) {
    std::sort(v.begin(), v.end());
    return v;
}

void require_capacity(const Universe& u) {
    if (u.size() > kMaxUniverse) {
        throw std::length_error("quorum universe larger than " + std::to_string(kMaxUniverse));
    }
}

}  // namespace

bool contains_member(const std::vector<NodeMask>& sets, NodeMask s) {
    return std::any_of(sets.begin(), sets.end(), [s](NodeMask m) { return (m & s) == m; });
}

std::vector<NodeMask> canonical_fail_prone(const std::vector<NodeMask>& quorums,
                                           const Universe& universe) {
    if (quorums.empty()) throw std::invalid_argument("empty quorum system");
    const NodeMask full = universe.full_mask();
    std::vector<NodeMask> comps;
    comps.reserve(quorums.size());
    for (NodeMask q : quorums) comps.push_back(full & ~q);
    // keep the maximal sets
    std::vector<NodeMask> out;
    for (NodeMask c : comps) {
        bool maximal = std::none_of(comps.begin(), comps.end(),
                                    [c](NodeMask o) { return o != c && (c & o) == c; });
        if (maximal && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return sorted(out);
}

QuorumCheck check_quorum_system(const QuorumContext& ctx) {
    QuorumCheck result;
    for (NodeMask f : ctx.fail_prone) {
        for (std::size_t i = 0; i < ctx.quorums.size(); ++i) {
            for (std::size_t j = i; j < ctx.quorums.size(); ++j) {
                const NodeMask inter = ctx.quorums[i] & ctx.quorums[j];
                if ((inter & ~f) == 0) {
                    result.ok = false;
                    result.violations.push_back(
                        "consistency: " + ctx.universe.set_to_string(ctx.quorums[i]) + " and " +
                        ctx.universe.set_to_string(ctx.quorums[j]) + " intersect inside " +
                        ctx.universe.set_to_string(f));
                }
            }
        }
        const bool available = std::any_of(ctx.quorums.begin(), ctx.quorums.end(),
                                           [f](NodeMask q) { return (q & f) == 0; });
        if (!available) {
            result.ok = false;
            result.violations.push_back("availability: no quorum disjoint from " +
                                        ctx.universe.set_to_string(f));
        }
    }
    return result;
}

std::vector<NodeMask> kernels(const std::vector<NodeMask>& quorums, const Universe& universe) {
    require_capacity(universe);
    if (quorums.empty()) throw std::invalid_argument("empty quorum system");
    const std::size_t n = universe.size();
    const NodeMask full = universe.full_mask();
    const auto has_quorum = superset_closure(quorums, n);

    // K is a transversal iff its complement contains no quorum.
    auto transversal = [&](NodeMask k) { return !has_quorum[full & ~k]; };

    std::vector<NodeMask> out;
    for (NodeMask k = 1; k <= full; ++k) {
        if (!transversal(k)) continue;
        bool minimal = true;
        for (std::size_t i = 0; i < n && minimal; ++i) {
            if ((k >> i & 1) && transversal(k & ~(NodeMask{1} << i))) minimal = false;
        }
        if (minimal) out.push_back(k);
    }
    return out;
}

std::vector<NodeMask> reliable_sets(const Universe& universe,
                                    const std::vector<NodeMask>& fail_prone,
                                    const std::vector<NodeMask>& kernel_sets) {
    require_capacity(universe);
    const std::size_t n = universe.size();
    const NodeMask full = universe.full_mask();
    const auto has_kernel = superset_closure(kernel_sets, n);

    auto reliable = [&](NodeMask r) {
        return std::all_of(fail_prone.begin(), fail_prone.end(),
                           [&](NodeMask f) { return has_kernel[r & ~f]; });
    };

    std::vector<NodeMask> out;
    for (NodeMask r = 1; r <= full; ++r) {
        if (!reliable(r)) continue;
        bool minimal = true;
        for (std::size_t i = 0; i < n && minimal; ++i) {
            if ((r >> i & 1) && reliable(r & ~(NodeMask{1} << i))) minimal = false;
        }
        if (minimal) out.push_back(r);
    }
    return out;
}

QuorumContext make_quorum_context(Universe universe, std::vector<NodeMask> quorums) {
    require_capacity(universe);
    if (!is_antichain(quorums)) throw std::invalid_argument("quorums are not an antichain");
    QuorumContext ctx;
    ctx.universe = std::move(universe);
    ctx.quorums = sorted(std::move(quorums));
    ctx.fail_prone = canonical_fail_prone(ctx.quorums, ctx.universe);
    ctx.kernels = kernels(ctx.quorums, ctx.universe);
    ctx.reliable = reliable_sets(ctx.universe, ctx.fail_prone, ctx.kernels);
    return ctx;
}

QuorumContext threshold_quorum_context(int n, int f) {
    if (n < 1 || f < 0 || n < 3 * f + 1) {
        throw std::invalid_argument("threshold system needs n >= 3f+1");
    }
    if (static_cast<std::size_t>(n) > kMaxUniverse) throw std::length_error("n too large");
    Universe u;
    for (int i = 1; i <= n; ++i) u.add("p" + std::to_string(i));

    const int qsize = (n + f + 1 + 1) / 2;  // ceil((n+f+1)/2)
    std::vector<NodeMask> quorums;
    std::vector<NodeMask> faults;
    const NodeMask full = u.full_mask();
    for (NodeMask s = 0; s <= full; ++s) {
        if (popcount(s) == qsize) quorums.push_back(s);
        if (popcount(s) == f) faults.push_back(s);
    }
    QuorumContext ctx;
    ctx.universe = std::move(u);
    ctx.quorums = std::move(quorums);
    ctx.fail_prone = std::move(faults);
    ctx.kernels = kernels(ctx.quorums, ctx.universe);
    ctx.reliable = reliable_sets(ctx.universe, ctx.fail_prone, ctx.kernels);
    return ctx;
}

}  // namespace mec
