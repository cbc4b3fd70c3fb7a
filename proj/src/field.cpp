#include "mec/field.hpp"

#include <stdexcept>
#include <string>

namespace mec {

namespace {

constexpr std::uint64_t kMaxFieldOrder = std::uint64_t{1} << 61;

std::uint64_t reduce(std::uint64_t v, std::uint64_t q) { return v % q; }

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    // Deterministic Miller-Rabin for 64-bit integers with the standard base set.
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = pow_mod(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

FieldSpec::FieldSpec(std::uint64_t order) : q(order) {
    if (order < 2 || !is_prime(order)) {
        throw std::invalid_argument("field order must be prime, got " + std::to_string(order));
    }
    if (order >= kMaxFieldOrder) {
        throw std::invalid_argument("field order must fit in 61 bits");
    }
}

FieldSpec smallest_prime_at_least(std::uint64_t bound) {
    if (bound < 1) throw std::invalid_argument("bound must be positive");
    std::uint64_t c = bound < 2 ? 2 : bound;
    while (!is_prime(c)) ++c;
    return FieldSpec(c);
}

std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
    return (a + b) % q;
}

std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
    return (a + q - b % q) % q;
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(a) * b) % q);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t q) {
    std::uint64_t r = 1 % q;
    a %= q;
    while (e > 0) {
        if (e & 1) r = mul_mod(r, a, q);
        a = mul_mod(a, a, q);
        e >>= 1;
    }
    return r;
}

std::uint64_t inv_mod(std::uint64_t a, std::uint64_t q) {
    if (a % q == 0) throw std::domain_error("inverse of zero");
    return pow_mod(a, q - 2, q);
}

FieldMatrix::FieldMatrix(std::size_t rows, std::size_t cols, FieldSpec q)
    : rows_(rows), cols_(cols), q_(q), a_(rows * cols, 0) {}

FieldMatrix FieldMatrix::identity(std::size_t n, FieldSpec q) {
    FieldMatrix m(n, n, q);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
}

FieldMatrix FieldMatrix::from_rows(const std::vector<std::vector<std::uint64_t>>& rows,
                                   FieldSpec q) {
    if (rows.empty()) throw std::invalid_argument("matrix needs at least one row");
    FieldMatrix m(rows.size(), rows.front().size(), q);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols_) throw std::invalid_argument("ragged rows");
        for (std::size_t c = 0; c < m.cols_; ++c) m.set(r, c, rows[r][c]);
    }
    return m;
}

void FieldMatrix::set(std::size_t r, std::size_t c, std::uint64_t v) {
    a_[r * cols_ + c] = reduce(v, q_.q);
}

std::vector<std::uint64_t> FieldMatrix::row(std::size_t r) const {
    return {a_.begin() + static_cast<long>(r * cols_), a_.begin() + static_cast<long>((r + 1) * cols_)};
}

std::vector<std::uint64_t> FieldMatrix::column(std::size_t c) const {
    std::vector<std::uint64_t> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
    return out;
}

FieldMatrix FieldMatrix::select_columns(const std::vector<std::size_t>& idx) const {
    FieldMatrix out(rows_, idx.size(), q_);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= cols_) throw std::out_of_range("column index");
        for (std::size_t r = 0; r < rows_; ++r) out.set(r, j, at(r, idx[j]));
    }
    return out;
}

FieldMatrix mat_mul(const FieldMatrix& a, const FieldMatrix& b) {
    if (a.field() != b.field()) throw std::invalid_argument("field mismatch");
    if (a.cols() != b.rows()) throw std::invalid_argument("dimension mismatch in product");
    const std::uint64_t q = a.field().q;
    FieldMatrix out(a.rows(), b.cols(), a.field());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const std::uint64_t av = a.at(i, k);
            if (av == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out.set(i, j, add_mod(out.at(i, j), mul_mod(av, b.at(k, j), q), q));
            }
        }
    }
    return out;
}

FieldMatrix kronecker(const FieldMatrix& a, const FieldMatrix& b) {
    if (a.field() != b.field()) throw std::invalid_argument("field mismatch");
    const std::uint64_t q = a.field().q;
    FieldMatrix out(a.rows() * b.rows(), a.cols() * b.cols(), a.field());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const std::uint64_t av = a.at(i, j);
            if (av == 0) continue;
            for (std::size_t r = 0; r < b.rows(); ++r)
                for (std::size_t c = 0; c < b.cols(); ++c)
                    out.set(i * b.rows() + r, j * b.cols() + c, mul_mod(av, b.at(r, c), q));
        }
    return out;
}

FieldMatrix diag_blocks(const std::vector<FieldMatrix>& blocks, FieldSpec q) {
    std::size_t rows = 0, cols = 0;
    for (const auto& b : blocks) {
        if (b.field() != q) throw std::invalid_argument("field mismatch");
        rows += b.rows();
        cols += b.cols();
    }
    FieldMatrix out(rows, cols, q);
    std::size_t ro = 0, co = 0;
    for (const auto& b : blocks) {
        for (std::size_t r = 0; r < b.rows(); ++r)
            for (std::size_t c = 0; c < b.cols(); ++c) out.set(ro + r, co + c, b.at(r, c));
        ro += b.rows();
        co += b.cols();
    }
    return out;
}

FieldMatrix vandermonde(std::size_t t, std::size_t r, FieldSpec q) {
    if (t < 1) throw std::invalid_argument("vandermonde needs at least one row");
    if (r > q.q) {
        throw std::domain_error("vandermonde: " + std::to_string(r) +
                                " evaluation points exhaust field of order " + std::to_string(q.q));
    }
    FieldMatrix m(t, r, q);
    for (std::size_t j = 0; j < r; ++j) {
        std::uint64_t v = 1;  // j^0 = 1, including j = 0
        for (std::size_t i = 0; i < t; ++i) {
            m.set(i, j, v);
            v = mul_mod(v, j % q.q, q.q);
        }
    }
    return m;
}

std::size_t rank(const FieldMatrix& m) {
    const std::uint64_t q = m.field().q;
    std::vector<std::vector<std::uint64_t>> a(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) a[r] = m.row(r);

    std::size_t rk = 0;
    for (std::size_t c = 0; c < m.cols() && rk < m.rows(); ++c) {
        std::size_t pivot = rk;
        while (pivot < m.rows() && a[pivot][c] == 0) ++pivot;
        if (pivot == m.rows()) continue;
        std::swap(a[rk], a[pivot]);
        const std::uint64_t inv = inv_mod(a[rk][c], q);
        for (std::size_t j = c; j < m.cols(); ++j) a[rk][j] = mul_mod(a[rk][j], inv, q);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == rk || a[i][c] == 0) continue;
            const std::uint64_t f = a[i][c];
            for (std::size_t j = c; j < m.cols(); ++j) {
                a[i][j] = sub_mod(a[i][j], mul_mod(f, a[rk][j], q), q);
            }
        }
        ++rk;
    }
    return rk;
}

std::optional<std::vector<std::uint64_t>> solve_left(const FieldMatrix& g_matrix,
                                                     const std::vector<std::uint64_t>& g_vec) {
    if (g_vec.size() != g_matrix.cols()) {
        throw std::invalid_argument("solve_left: vector length does not match column count");
    }
    const std::size_t k = g_matrix.rows();
    const std::size_t l = g_matrix.cols();
    const std::uint64_t q = g_matrix.field().q;

    // Row-reduce the transposed system G^T f^T = g^T with an augmented column.
    std::vector<std::vector<std::uint64_t>> a(l, std::vector<std::uint64_t>(k + 1, 0));
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < k; ++j) a[i][j] = g_matrix.at(j, i);
        a[i][k] = g_vec[i] % q;
    }

    std::vector<std::size_t> pivot_col;
    std::size_t rk = 0;
    for (std::size_t c = 0; c < k && rk < l; ++c) {
        std::size_t pivot = rk;
        while (pivot < l && a[pivot][c] == 0) ++pivot;
        if (pivot == l) continue;
        std::swap(a[rk], a[pivot]);
        const std::uint64_t inv = inv_mod(a[rk][c], q);
        for (std::size_t j = c; j <= k; ++j) a[rk][j] = mul_mod(a[rk][j], inv, q);
        for (std::size_t i = 0; i < l; ++i) {
            if (i == rk || a[i][c] == 0) continue;
            const std::uint64_t f = a[i][c];
            for (std::size_t j = c; j <= k; ++j) a[i][j] = sub_mod(a[i][j], mul_mod(f, a[rk][j], q), q);
        }
        pivot_col.push_back(c);
        ++rk;
    }
    if (rk < k) return std::nullopt;  // rank deficient, f not unique
    for (std::size_t i = rk; i < l; ++i) {
        if (a[i][k] != 0) return std::nullopt;  // inconsistent system
    }
    std::vector<std::uint64_t> f(k, 0);
    for (std::size_t i = 0; i < rk; ++i) f[pivot_col[i]] = a[i][k];
    return f;
}

std::vector<std::uint64_t> row_times_matrix(const std::vector<std::uint64_t>& f,
                                            const FieldMatrix& g) {
    if (f.size() != g.rows()) throw std::invalid_argument("row vector length mismatch");
    const std::uint64_t q = g.field().q;
    std::vector<std::uint64_t> out(g.cols(), 0);
    for (std::size_t i = 0; i < g.rows(); ++i) {
        const std::uint64_t fv = f[i] % q;
        if (fv == 0) continue;
        for (std::size_t j = 0; j < g.cols(); ++j) {
            out[j] = add_mod(out[j], mul_mod(fv, g.at(i, j), q), q);
        }
    }
    return out;
}

}  // namespace mec
