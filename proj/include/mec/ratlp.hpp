#pragma once

#include <cstdint>
#include <vector>

#include "mec/access.hpp"
#include "mec/rational.hpp"

namespace mec {

/// The covering LP: minimize sum(y) subject to Gamma * y >= 1, y >= 0,
/// with Gamma a binary incidence matrix of access sets over nodes.
struct LpProblem {
    std::vector<std::vector<int>> gamma;  // omega x n, entries 0/1
    std::size_t vars = 0;                 // n
};

struct LpSolution {
    std::vector<Rational> y;  // a basic optimal (vertex) solution
    Rational objective;       // sum of y, equals beta + 1
};

/// Incidence matrix in the enumeration order of the access structure and
/// node-index order.
LpProblem gamma_from_structure(const AccessStructure& a);

/// Exact two-phase simplex with Bland's anti-cycling rule.  Deterministic;
/// the all-ones vector is always feasible, so this never fails on a valid
/// problem.
LpSolution solve_lpp(const LpProblem& problem);

struct DerivedParameters {
    BigInt k;                      // lcm of the reduced denominators of y
    std::vector<BigInt> per_node;  // m_i = y_i * k
    BigInt m;                      // sum of m_i
    Rational beta;                 // (m - k) / k = sum(y) - 1
};

/// Scales a feasible y into integer fragment counts.  The multiplier exposes
/// the freedom to pick any multiple of the minimal k.
DerivedParameters derive_parameters(const std::vector<Rational>& y, const BigInt& multiplier = 1);

}  // namespace mec
