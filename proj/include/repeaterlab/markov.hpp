#pragma once

// Finite discrete-time Markov chains: validation, structure (irreducibility,
// period), equilibrium, matrix powers, and hitting-time moments.
//
// Everything here is templated on the scalar type so the same code runs in
// double for production and in long double for cross-checks.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "repeaterlab/error.hpp"

namespace repeaterlab {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kFundamentalResidualTolerance = 1e-10;

namespace detail {

inline std::string fmt_index(Index i, Index j) {
    std::ostringstream os;
    os << "(" << i << ", " << j << ")";
    return os.str();
}

inline void check_state(Index state, Index n) {
    if (state < 0 || state >= n) {
        throw Error(ErrorCode::StateOutOfRange,
                    "state " + std::to_string(state) + " not in [0, " + std::to_string(n) + ")");
    }
}

} // namespace detail

/// Square row-stochastic matrix. Only constructible through validate().
template <typename Scalar = double>
class StochasticMatrix {
public:
    using Matrix = MatrixX<Scalar>;

    static StochasticMatrix validate(Matrix raw) {
        if (raw.rows() != raw.cols() || raw.rows() < 1) {
            throw Error(ErrorCode::NonSquare, "matrix is " + std::to_string(raw.rows()) + "x" +
                                                  std::to_string(raw.cols()));
        }
        for (Index i = 0; i < raw.rows(); ++i) {
            for (Index j = 0; j < raw.cols(); ++j) {
                const Scalar v = raw(i, j);
                if (!(v >= Scalar(0) && v <= Scalar(1))) {
                    throw Error(ErrorCode::EntryOutOfRange, "entry " + detail::fmt_index(i, j));
                }
            }
            const Scalar sum = raw.row(i).sum();
            if (std::abs(sum - Scalar(1)) > Scalar(kRowSumTolerance)) {
                std::ostringstream os;
                os.precision(17);
                os << "row " << i << " sums to " << static_cast<double>(sum);
                throw Error(ErrorCode::RowSumViolation, os.str());
            }
        }
        return StochasticMatrix(std::move(raw));
    }

    /// Rows of unequal length are reported as NonSquare.
    static StochasticMatrix validate(const std::vector<std::vector<Scalar>>& rows) {
        const auto n = static_cast<Index>(rows.size());
        Matrix m(n, n);
        for (Index i = 0; i < n; ++i) {
            if (static_cast<Index>(rows[i].size()) != n) {
                throw Error(ErrorCode::NonSquare,
                            "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                " entries, expected " + std::to_string(n));
            }
            for (Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
        }
        return validate(std::move(m));
    }

    Index size() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    Scalar operator()(Index i, Index j) const { return m_(i, j); }

    std::vector<std::vector<Scalar>> rows() const {
        std::vector<std::vector<Scalar>> out(m_.rows(), std::vector<Scalar>(m_.cols()));
        for (Index i = 0; i < m_.rows(); ++i)
            for (Index j = 0; j < m_.cols(); ++j) out[i][j] = m_(i, j);
        return out;
    }

private:
    explicit StochasticMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

/// Probability row vector.
template <typename Scalar = double>
class Distribution {
public:
    static Distribution validate(RowVectorX<Scalar> probs) {
        if (probs.size() < 1) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
        for (Index i = 0; i < probs.size(); ++i) {
            if (!(probs(i) >= Scalar(0) && probs(i) <= Scalar(1))) {
                throw Error(ErrorCode::InvalidDistribution,
                            "entry " + std::to_string(i) + " outside [0, 1]");
            }
        }
        if (std::abs(probs.sum() - Scalar(1)) > Scalar(kRowSumTolerance)) {
            throw Error(ErrorCode::InvalidDistribution, "entries do not sum to 1");
        }
        return Distribution(std::move(probs));
    }

    Index size() const { return p_.size(); }
    const RowVectorX<Scalar>& probs() const { return p_; }
    Scalar operator[](Index i) const { return p_(i); }

private:
    explicit Distribution(RowVectorX<Scalar> p) : p_(std::move(p)) {}
    RowVectorX<Scalar> p_;
};

/// (I - Q)^{-1} where Q drops row and column `target`.
template <typename Scalar = double>
struct FundamentalMatrix {
    Index target = 0;
    MatrixX<Scalar> values;
    std::vector<Index> index_map;  // reduced index -> original state

    /// Reduced index of an original state; -1 for the target itself.
    Index reduced_index(Index state) const {
        if (state == target) return -1;
        return state < target ? state : state - 1;
    }
};

/// Hitting-time moments (in steps) of `target`, one entry per non-target start state.
template <typename Scalar = double>
struct HittingStats {
    Index target = 0;
    VectorX<Scalar> means;
    VectorX<Scalar> variances;
    std::vector<Index> index_map;

    Scalar mean_from(Index start) const { return means(reduced(start)); }
    Scalar variance_from(Index start) const { return variances(reduced(start)); }

private:
    Index reduced(Index start) const {
        detail::check_state(start, static_cast<Index>(index_map.size()) + 1);
        if (start == target) {
            throw Error(ErrorCode::StateOutOfRange,
                        "start equals target; use mean_return_time for return times");
        }
        return start < target ? start : start - 1;
    }
};

// ---------------------------------------------------------------------------
// Structure
// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
std::vector<bool> reachable(const MatrixX<Scalar>& m, Index from, bool reverse) {
    const Index n = m.rows();
    std::vector<bool> seen(n, false);
    std::queue<Index> frontier;
    seen[from] = true;
    frontier.push(from);
    while (!frontier.empty()) {
        const Index u = frontier.front();
        frontier.pop();
        for (Index v = 0; v < n; ++v) {
            const Scalar w = reverse ? m(v, u) : m(u, v);
            if (w > Scalar(0) && !seen[v]) {
                seen[v] = true;
                frontier.push(v);
            }
        }
    }
    return seen;
}

} // namespace detail

/// True iff the support graph (edge i->j iff P_ij > 0) is strongly connected.
template <typename Scalar>
bool is_irreducible(const StochasticMatrix<Scalar>& p) {
    const auto fwd = detail::reachable(p.matrix(), 0, false);
    const auto bwd = detail::reachable(p.matrix(), 0, true);
    for (Index i = 0; i < p.size(); ++i)
        if (!fwd[i] || !bwd[i]) return false;
    return true;
}

/// Period of `state`: gcd of the lengths of all cycles through it.
///
/// BFS levels inside the state's communicating class; every edge u->v within
/// the class contributes level(u) + 1 - level(v) to the gcd.
template <typename Scalar>
std::int64_t period(const StochasticMatrix<Scalar>& p, Index state) {
    const Index n = p.size();
    detail::check_state(state, n);
    const auto& m = p.matrix();
    const auto fwd = detail::reachable(m, state, false);
    const auto bwd = detail::reachable(m, state, true);

    std::vector<std::int64_t> level(n, -1);
    std::queue<Index> frontier;
    level[state] = 0;
    frontier.push(state);
    std::int64_t g = 0;
    bool has_cycle = false;
    while (!frontier.empty()) {
        const Index u = frontier.front();
        frontier.pop();
        for (Index v = 0; v < n; ++v) {
            if (!(m(u, v) > Scalar(0)) || !fwd[v] || !bwd[v]) continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                frontier.push(v);
            } else {
                has_cycle = true;
                g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
            }
        }
    }
    if (!has_cycle || g == 0) {
        throw Error(ErrorCode::NoReturnPath, "state " + std::to_string(state) + " never returns");
    }
    return g;
}

// ---------------------------------------------------------------------------
// Equilibrium
// ---------------------------------------------------------------------------

enum class EquilibriumMethod { LinearSolve, PowerIteration };

struct EquilibriumOptions {
    EquilibriumMethod method = EquilibriumMethod::LinearSolve;
    double tol = 1e-12;
    std::int64_t max_iterations = 1'000'000;
};

namespace detail {

template <typename Scalar>
Scalar fixed_point_residual(const MatrixX<Scalar>& m, const RowVectorX<Scalar>& pi) {
    return (pi * m - pi).cwiseAbs().maxCoeff();
}

template <typename Scalar>
RowVectorX<Scalar> equilibrium_linear(const MatrixX<Scalar>& m) {
    const Index n = m.rows();
    // pi (P - I) = 0 transposed, with the last equation replaced by sum(pi) = 1.
    MatrixX<Scalar> a = (m - MatrixX<Scalar>::Identity(n, n)).transpose();
    a.row(n - 1).setOnes();
    VectorX<Scalar> b = VectorX<Scalar>::Zero(n);
    b(n - 1) = Scalar(1);
    Eigen::FullPivLU<MatrixX<Scalar>> lu(a);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::SingularSystem,
                    "equilibrium system is singular (more than one closed class)");
    }
    RowVectorX<Scalar> pi = lu.solve(b).transpose();
    // Round-off can leave entries like -1e-18 on states with zero mass.
    pi = pi.cwiseMax(Scalar(0));
    pi /= pi.sum();
    return pi;
}

template <typename Scalar>
RowVectorX<Scalar> equilibrium_power(const MatrixX<Scalar>& m, const EquilibriumOptions& opt) {
    const Index n = m.rows();
    RowVectorX<Scalar> pi = RowVectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
    for (std::int64_t it = 0; it < opt.max_iterations; ++it) {
        RowVectorX<Scalar> next = pi * m;
        const Scalar delta = (next - pi).cwiseAbs().maxCoeff();
        pi = std::move(next);
        if (delta <= Scalar(opt.tol)) {
            pi /= pi.sum();
            if (fixed_point_residual(m, pi) <= Scalar(opt.tol)) return pi;
        }
    }
    throw Error(ErrorCode::NotConverged,
                "power iteration did not converge in " + std::to_string(opt.max_iterations) +
                    " iterations");
}

} // namespace detail

/// Stationary distribution pi = pi P.
///
/// LinearSolve needs a unique stationary vector (one closed class);
/// PowerIteration additionally needs that class to be aperiodic.
template <typename Scalar>
Distribution<Scalar> equilibrium(const StochasticMatrix<Scalar>& p,
                                 const EquilibriumOptions& opt = {}) {
    const auto& m = p.matrix();
    RowVectorX<Scalar> pi = opt.method == EquilibriumMethod::LinearSolve
                                ? detail::equilibrium_linear(m)
                                : detail::equilibrium_power(m, opt);
    const Scalar residual = detail::fixed_point_residual(m, pi);
    if (!(residual <= Scalar(opt.tol))) {
        std::ostringstream os;
        os << "fixed-point residual " << static_cast<double>(residual) << " exceeds tolerance "
           << opt.tol;
        throw Error(ErrorCode::SingularSystem, os.str());
    }
    return Distribution<Scalar>::validate(std::move(pi));
}

/// P^k by repeated squaring. P^0 is the identity.
template <typename Scalar>
MatrixX<Scalar> matrix_power(const StochasticMatrix<Scalar>& p, std::uint64_t k) {
    const Index n = p.size();
    MatrixX<Scalar> result = MatrixX<Scalar>::Identity(n, n);
    MatrixX<Scalar> base = p.matrix();
    while (k > 0) {
        if (k & 1U) result = (result * base).eval();
        k >>= 1U;
        if (k > 0) base = (base * base).eval();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Hitting times
// ---------------------------------------------------------------------------

template <typename Scalar>
FundamentalMatrix<Scalar> fundamental_matrix(const StochasticMatrix<Scalar>& p, Index target) {
    const Index n = p.size();
    detail::check_state(target, n);
    const auto& m = p.matrix();

    FundamentalMatrix<Scalar> out;
    out.target = target;
    out.index_map.reserve(n - 1);
    for (Index i = 0; i < n; ++i)
        if (i != target) out.index_map.push_back(i);

    const Index r = n - 1;
    MatrixX<Scalar> i_minus_q(r, r);
    for (Index a = 0; a < r; ++a)
        for (Index b = 0; b < r; ++b)
            i_minus_q(a, b) = (a == b ? Scalar(1) : Scalar(0)) - m(out.index_map[a], out.index_map[b]);

    if (r == 0) {
        out.values.resize(0, 0);
        return out;
    }
    Eigen::FullPivLU<MatrixX<Scalar>> lu(i_minus_q);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::SingularMatrix,
                    "I - Q is singular; state " + std::to_string(target) +
                        " is not reachable from every other state");
    }
    out.values = lu.inverse();
    const Scalar residual =
        (i_minus_q * out.values - MatrixX<Scalar>::Identity(r, r)).cwiseAbs().maxCoeff();
    if (!(residual <= Scalar(kFundamentalResidualTolerance))) {
        std::ostringstream os;
        os << "inverse residual " << static_cast<double>(residual) << " too large";
        throw Error(ErrorCode::SingularMatrix, os.str());
    }
    return out;
}

/// Mean t = N 1 and variance (2N - I) t - t.*t of the hitting time of `target`.
template <typename Scalar>
HittingStats<Scalar> hitting_stats(const StochasticMatrix<Scalar>& p, Index target) {
    auto fm = fundamental_matrix(p, target);
    const Index r = fm.values.rows();
    HittingStats<Scalar> out;
    out.target = target;
    out.means = fm.values * VectorX<Scalar>::Ones(r);
    out.variances = (Scalar(2) * fm.values - MatrixX<Scalar>::Identity(r, r)) * out.means -
                    out.means.cwiseProduct(out.means);
    out.index_map = std::move(fm.index_map);
    return out;
}

/// Expected return time to `state`, 1 / pi_state.
template <typename Scalar>
Scalar mean_return_time(const StochasticMatrix<Scalar>& p, Index state,
                        const EquilibriumOptions& opt = {}) {
    detail::check_state(state, p.size());
    const auto pi = equilibrium(p, opt);
    if (!(pi[state] > Scalar(0))) {
        throw Error(ErrorCode::NoReturnPath,
                    "state " + std::to_string(state) + " has zero equilibrium mass");
    }
    return Scalar(1) / pi[state];
}

} // namespace repeaterlab
