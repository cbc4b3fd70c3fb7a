#include "mec/ratlp.hpp"

#include <algorithm>
#include <stdexcept>

namespace mec {

LpProblem gamma_from_structure(const AccessStructure& a) {
    if (a.sets.empty()) throw std::invalid_argument("empty access structure");
    LpProblem p;
    p.vars = a.universe.size();
    p.gamma.reserve(a.sets.size());
    for (NodeMask s : a.sets) {
        if (s == 0) throw std::invalid_argument("access set must be nonempty");
        std::vector<int> row(p.vars, 0);
        for (std::size_t j = 0; j < p.vars; ++j) row[j] = (s >> j & 1) ? 1 : 0;
        p.gamma.push_back(std::move(row));
    }
    return p;
}

namespace {

// Dense exact-simplex tableau.  Columns: y (n), slacks (omega), then the
// phase-1 artificials (omega); rows carry Gamma*y - s + a = 1.
class Tableau {
public:
    Tableau(const LpProblem& p)
        : n_(p.vars), omega_(p.gamma.size()), cols_(p.vars + 2 * p.gamma.size()) {
        rows_.resize(omega_, std::vector<Rational>(cols_ + 1, Rational(0)));
        basis_.resize(omega_);
        for (std::size_t i = 0; i < omega_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) rows_[i][j] = p.gamma[i][j];
            rows_[i][n_ + i] = -1;            // surplus
            rows_[i][n_ + omega_ + i] = 1;    // artificial
            rows_[i][cols_] = 1;              // rhs
            basis_[i] = n_ + omega_ + i;
        }
    }

    // Runs simplex iterations for the given cost vector over the first
    // `active_cols` columns, using Bland's rule.
    void optimize(const std::vector<Rational>& cost, std::size_t active_cols) {
        while (true) {
            const std::size_t entering = find_entering(cost, active_cols);
            if (entering == cols_ + 1) return;  // optimal
            const std::size_t leaving = find_leaving(entering);
            if (leaving == omega_ + 1) {
                throw std::logic_error("LP unbounded; covering problems are always bounded");
            }
            pivot(leaving, entering);
        }
    }

    Rational objective(const std::vector<Rational>& cost) const {
        Rational obj = 0;
        for (std::size_t i = 0; i < rows_.size(); ++i) obj += cost[basis_[i]] * rhs(i);
        return obj;
    }

    // Pivots artificial variables out of the basis; drops redundant rows.
    void eliminate_artificials() {
        for (std::size_t i = 0; i < rows_.size();) {
            if (basis_[i] < n_ + omega_) {
                ++i;
                continue;
            }
            std::size_t col = cols_ + 1;
            for (std::size_t j = 0; j < n_ + omega_; ++j) {
                if (rows_[i][j] != 0) {
                    col = j;
                    break;
                }
            }
            if (col == cols_ + 1) {
                rows_.erase(rows_.begin() + static_cast<long>(i));
                basis_.erase(basis_.begin() + static_cast<long>(i));
            } else {
                pivot(i, col);
                ++i;
            }
        }
    }

    std::vector<Rational> primal(std::size_t nvars) const {
        std::vector<Rational> y(nvars, Rational(0));
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (basis_[i] < nvars) y[basis_[i]] = rhs(i);
        }
        return y;
    }

    std::size_t n() const { return n_; }
    std::size_t omega() const { return omega_; }
    std::size_t cols() const { return cols_; }

private:
    Rational rhs(std::size_t i) const { return rows_[i][cols_]; }

    // Smallest-index column with negative reduced cost, or cols_+1 if none.
    std::size_t find_entering(const std::vector<Rational>& cost, std::size_t active_cols) const {
        for (std::size_t j = 0; j < active_cols; ++j) {
            Rational red = cost[j];
            for (std::size_t i = 0; i < rows_.size(); ++i) {
                if (rows_[i][j] != 0) red -= cost[basis_[i]] * rows_[i][j];
            }
            if (red < 0) return j;
        }
        return cols_ + 1;
    }

    // Minimum-ratio row; ties resolved toward the smallest basic index.
    std::size_t find_leaving(std::size_t entering) const {
        std::size_t best = omega_ + 1;
        Rational best_ratio = 0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (rows_[i][entering] <= 0) continue;
            const Rational ratio = rhs(i) / rows_[i][entering];
            if (best == omega_ + 1 || ratio < best_ratio ||
                (ratio == best_ratio && basis_[i] < basis_[best])) {
                best = i;
                best_ratio = ratio;
            }
        }
        return best;
    }

    void pivot(std::size_t row, std::size_t col) {
        auto& pr = rows_[row];
        const Rational inv = Rational(1) / pr[col];
        for (auto& v : pr) v *= inv;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (i == row || rows_[i][col] == 0) continue;
            const Rational factor = rows_[i][col];
            for (std::size_t j = 0; j <= cols_; ++j) {
                if (pr[j] != 0) rows_[i][j] -= factor * pr[j];
            }
        }
        basis_[row] = col;
    }

    std::size_t n_;
    std::size_t omega_;
    std::size_t cols_;
    std::vector<std::vector<Rational>> rows_;
    std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution solve_lpp(const LpProblem& problem) {
    if (problem.gamma.empty()) throw std::invalid_argument("LP needs at least one constraint");
    for (const auto& row : problem.gamma) {
        if (row.size() != problem.vars) throw std::invalid_argument("ragged constraint matrix");
        if (std::none_of(row.begin(), row.end(), [](int v) { return v != 0; })) {
            throw std::invalid_argument("constraint row without any variable");
        }
    }

    Tableau t(problem);
    const std::size_t n = t.n();
    const std::size_t omega = t.omega();

    std::vector<Rational> phase1_cost(t.cols(), Rational(0));
    for (std::size_t j = n + omega; j < t.cols(); ++j) phase1_cost[j] = 1;
    t.optimize(phase1_cost, t.cols());
    if (t.objective(phase1_cost) != 0) {
        throw std::logic_error("LPP reported infeasible; y = 1 is always feasible");
    }
    t.eliminate_artificials();

    std::vector<Rational> phase2_cost(t.cols(), Rational(0));
    for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = 1;
    t.optimize(phase2_cost, n + omega);

    LpSolution sol;
    sol.y = t.primal(n);
    sol.objective = 0;
    for (const auto& v : sol.y) sol.objective += v;
    return sol;
}

DerivedParameters derive_parameters(const std::vector<Rational>& y, const BigInt& multiplier) {
    if (multiplier < 1) throw std::invalid_argument("multiplier must be positive");
    DerivedParameters out;
    out.k = lcm_of_denominators(y) * multiplier;
    out.m = 0;
    out.per_node.reserve(y.size());
    for (const auto& v : y) {
        const Rational scaled = v * Rational(out.k);
        if (den(scaled) != 1) throw std::logic_error("fragment count not integral");
        out.per_node.push_back(num(scaled));
        out.m += num(scaled);
    }
    out.beta = Rational(out.m - out.k, out.k);
    return out;
}

}  // namespace mec
