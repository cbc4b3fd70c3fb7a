#pragma once

#include <string>
#include <vector>

#include "mec/access.hpp"

namespace mec {

/// Byzantine quorum system together with its derived fail-prone, kernel and
/// reliable systems.  Kernels and reliable sets are always recomputed from
/// the quorums, never taken from input.
struct QuorumContext {
    Universe universe;
    std::vector<NodeMask> quorums;
    std::vector<NodeMask> fail_prone;
    std::vector<NodeMask> kernels;
    std::vector<NodeMask> reliable;
};

struct QuorumCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Antichain of the maximal sets among the complements of the quorums.
std::vector<NodeMask> canonical_fail_prone(const std::vector<NodeMask>& quorums,
                                           const Universe& universe);

/// Verifies consistency (no two quorums intersect inside a fail-prone set)
/// and availability (every fail-prone set has a disjoint quorum).
QuorumCheck check_quorum_system(const QuorumContext& ctx);

/// All minimal transversals of the quorums.  Brute force, |universe| <= 20.
std::vector<NodeMask> kernels(const std::vector<NodeMask>& quorums, const Universe& universe);

/// All minimal R with: for every F there is a kernel inside R \ F.
std::vector<NodeMask> reliable_sets(const Universe& universe,
                                    const std::vector<NodeMask>& fail_prone,
                                    const std::vector<NodeMask>& kernel_sets);

/// Builds the full context from explicit quorums (canonical fail-prone).
QuorumContext make_quorum_context(Universe universe, std::vector<NodeMask> quorums);

/// Threshold system: quorums are all ceil((n+f+1)/2)-subsets, fail-prone all
/// f-subsets.  Requires n >= 3f+1.
QuorumContext threshold_quorum_context(int n, int f);

/// True iff some member of `sets` is a subset of `s`.
bool contains_member(const std::vector<NodeMask>& sets, NodeMask s);

}  // namespace mec
