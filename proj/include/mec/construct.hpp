#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mec/access.hpp"
#include "mec/codes.hpp"
#include "mec/field.hpp"
#include "mec/ratlp.hpp"
#include "mec/rational.hpp"

namespace mec {

constexpr std::size_t kDefaultColumnCap = 4096;

/// Output of the recursive Kronecker construction.
struct KroneckerResult {
    FieldMatrix matrix;       // k_T x nu_T
    std::size_t nu = 0;       // column count
    std::size_t k = 0;        // row count
    std::vector<int> labels;  // column -> node
    FieldSpec q;
    Universe universe;
};

/// Smallest prime at least max(2, max fan-out over vertices with t != 1).
FieldSpec kronecker_field_size(const AccessTree& tree);

/// Recursive matrix construction: leaves yield the 1x1 identity; an internal
/// vertex lifts its children to lcm row count via Kronecker products with
/// identities and combines them through a Vandermonde matrix.
KroneckerResult build_kronecker(const AccessTree& tree, std::size_t column_cap = kDefaultColumnCap);

LinearCode kronecker_to_code(const KroneckerResult& result);

/// Closed-form size and overhead of the Kronecker construction.
struct SizePrediction {
    std::vector<Rational> psi;  // one per leaf-parent vertex of the balanced tree
    BigInt k_pred;              // lcm of the unreduced root-to-leaf-parent label products
    BigInt cols_pred;           // sum(psi) * k_pred
    Rational beta;              // sum(psi) - 1
};

SizePrediction predict_kronecker_size(const AccessTree& tree);

/// LP-backed construction: optimal (k, m_i) from the covering LP, an [m,k]
/// MDS base code over the smallest prime >= m, consecutive column blocks
/// per node in index order.
LinearCode build_lp_code(const AccessStructure& a, const BigInt& k_multiplier = 1);

struct OverheadBounds {
    BigInt m_low;         // k
    BigInt m_high;        // ceil(k/tau) * n
    Rational beta_bound;  // n/k + (n - tau)/tau
};

OverheadBounds overhead_bounds(std::size_t n, std::size_t tau, const BigInt& k);

/// Base-code parameters for a partitioned access structure.
struct FaResult {
    std::uint64_t nu = 0;
    std::uint64_t k = 0;
    std::vector<std::uint64_t> h;  // fragments per node, indexed by node

    Rational beta() const { return Rational(BigInt(nu) - BigInt(k), BigInt(k)); }
};

/// Every leaf under vertex v gets k / prod(labels on the root-to-v path)
/// fragments, with k the lcm of those products.  Complete but not optimal.
FaResult uniform_assignment(const AccessTree& tree);

/// The recursive optimal assignment: children sorted by fragment rate
/// nu/k, the cheapest prefix kept, the rest zeroed.
FaResult fa_optimal(const AccessTree& tree);

enum class PartitionedMethod { Uniform, Optimal };

LinearCode build_partitioned_code(const AccessTree& tree, PartitionedMethod method);

/// Human/CI-facing summary of a construction run.
struct ParametersReport {
    std::string method;
    BigInt k;
    BigInt m;
    std::vector<std::pair<std::string, BigInt>> per_node;  // name -> fragment count
    Rational beta;
    std::uint64_t q = 0;
};

ParametersReport parameters_report(const AccessTree& tree, const std::string& method);

}  // namespace mec
