#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace mec {

/// Prime field order. Elements are stored as integers in [0, q) with q
/// below 2^61 so that products fit into 128-bit intermediates.
struct FieldSpec {
    std::uint64_t q = 2;

    explicit FieldSpec(std::uint64_t order);
    FieldSpec() = default;

    bool operator==(const FieldSpec&) const = default;
};

/// Returns the least prime p with p >= max(bound, 2).
FieldSpec smallest_prime_at_least(std::uint64_t bound);

bool is_prime(std::uint64_t n);

std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q);
std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q);
std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q);
std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t q);
std::uint64_t inv_mod(std::uint64_t a, std::uint64_t q);

/// Dense row-major matrix over a prime field.
class FieldMatrix {
public:
    FieldMatrix() = default;
    FieldMatrix(std::size_t rows, std::size_t cols, FieldSpec q);

    static FieldMatrix identity(std::size_t n, FieldSpec q);
    static FieldMatrix from_rows(const std::vector<std::vector<std::uint64_t>>& rows,
                                 FieldSpec q);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    FieldSpec field() const { return q_; }

    std::uint64_t at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
    void set(std::size_t r, std::size_t c, std::uint64_t v);

    std::vector<std::uint64_t> row(std::size_t r) const;
    std::vector<std::uint64_t> column(std::size_t c) const;

    /// Matrix with the listed columns of *this, in the given order.
    FieldMatrix select_columns(const std::vector<std::size_t>& idx) const;

    bool operator==(const FieldMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    FieldSpec q_;
    std::vector<std::uint64_t> a_;
};

FieldMatrix mat_mul(const FieldMatrix& a, const FieldMatrix& b);

/// Standard Kronecker product; both matrices must live over the same field.
FieldMatrix kronecker(const FieldMatrix& a, const FieldMatrix& b);

/// Block-diagonal assembly of the given matrices.
FieldMatrix diag_blocks(const std::vector<FieldMatrix>& blocks, FieldSpec q);

/// t x r matrix with entry (i, j) = j^i over the canonical point sequence
/// 0, 1, ..., r-1 (0^0 = 1, so row zero is all ones).  Requires r <= q.
FieldMatrix vandermonde(std::size_t t, std::size_t r, FieldSpec q);

/// Rank over F_q, Gaussian elimination with first-nonzero pivoting.
std::size_t rank(const FieldMatrix& m);

/// Solves f * G = g for the row vector f of length G.rows().  Returns
/// nullopt when rank(G) < rows (underdetermined) or the system is
/// inconsistent.
std::optional<std::vector<std::uint64_t>> solve_left(const FieldMatrix& g_matrix,
                                                     const std::vector<std::uint64_t>& g_vec);

/// f * G as a row vector.
std::vector<std::uint64_t> row_times_matrix(const std::vector<std::uint64_t>& f,
                                            const FieldMatrix& g);

}  // namespace mec
