#pragma once

// Markov chains of continuous entanglement-distribution protocols and their
// closed-form statistics. Closed forms return step units; callers scale by tau.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "repeaterlab/error.hpp"
#include "repeaterlab/markov.hpp"

namespace repeaterlab {

struct MultiHeraldParams {
    std::vector<double> round_probs;  // p_1 .. p_n
    bool operator==(const MultiHeraldParams&) const = default;
};

/// Two-link parameters. One entry per side for single-heralded EG, two for double-heralded.
struct TwoLinkParams {
    std::vector<double> left_probs;
    std::vector<double> right_probs;
    double swap_prob = 1.0;
    bool operator==(const TwoLinkParams&) const = default;
};

/// A protocol transition matrix with its labelled states.
///
/// The success and start (failure) rows must coincide: both states begin the
/// next distribution attempt.
template <typename Scalar = double>
class ProtocolChain {
public:
    ProtocolChain(StochasticMatrix<Scalar> matrix, std::vector<std::string> labels,
                  Index success_state, Index start_state, double tau)
        : matrix_(std::move(matrix)), labels_(std::move(labels)), success_(success_state),
          start_(start_state), tau_(tau) {
        const Index n = matrix_.size();
        if (static_cast<Index>(labels_.size()) != n) {
            throw Error(ErrorCode::LabelMismatch, std::to_string(labels_.size()) + " labels for " +
                                                      std::to_string(n) + " states");
        }
        detail::check_state(success_, n);
        detail::check_state(start_, n);
        if (success_ == start_) {
            throw Error(ErrorCode::LabelMismatch, "success and start state coincide");
        }
        if (matrix_.matrix().row(success_) != matrix_.matrix().row(start_)) {
            throw Error(ErrorCode::RowMismatch, "success row differs from start row");
        }
        if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
            throw Error(ErrorCode::InvalidTau, "tau must be positive and finite");
        }
    }

    const StochasticMatrix<Scalar>& matrix() const { return matrix_; }
    const std::vector<std::string>& labels() const { return labels_; }
    Index success_state() const { return success_; }
    Index start_state() const { return start_; }
    double tau() const { return tau_; }
    Index size() const { return matrix_.size(); }

private:
    StochasticMatrix<Scalar> matrix_;
    std::vector<std::string> labels_;
    Index success_;
    Index start_;
    double tau_;
};

namespace detail {

inline void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::ProbabilityOutOfRange,
                    std::string(name) + " = " + std::to_string(p) + " not in [0, 1]");
    }
}

inline void check_two_link(const TwoLinkParams& params, std::size_t heralds) {
    if (params.left_probs.size() != heralds || params.right_probs.size() != heralds) {
        throw Error(ErrorCode::WrongHeraldCount,
                    "expected " + std::to_string(heralds) + " probabilities per link, got " +
                        std::to_string(params.left_probs.size()) + " left and " +
                        std::to_string(params.right_probs.size()) + " right");
    }
    for (double p : params.left_probs) check_probability(p, "left probability");
    for (double p : params.right_probs) check_probability(p, "right probability");
    check_probability(params.swap_prob, "swap probability");
}

/// Puts 1 - (sum of the other entries) on column `fill` so every row sums to 1
/// up to one rounding.
template <typename Scalar>
void close_row(MatrixX<Scalar>& m, Index row, Index fill) {
    m(row, fill) = Scalar(0);
    const Scalar rest = m.row(row).sum();
    Scalar v = Scalar(1) - rest;
    if (v < Scalar(0)) v = Scalar(0);
    m(row, fill) = v;
}

} // namespace detail

/// (n+1)-state chain: state i < n advances to i+1 w.p. p_{i+1}, else resets to 0;
/// state n behaves like state 0. n = 1 is single-heralded EG, n = 2 the BKP chain.
template <typename Scalar = double>
ProtocolChain<Scalar> build_multiheralded(const MultiHeraldParams& params, double tau) {
    const auto& p = params.round_probs;
    if (p.empty()) throw Error(ErrorCode::EmptyRounds, "at least one heralding round required");
    for (double q : p) detail::check_probability(q, "round probability");

    const Index n = static_cast<Index>(p.size());
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n + 1, n + 1);
    for (Index i = 0; i <= n; ++i) {
        const Index next = i < n ? i + 1 : 1;
        const Scalar q = static_cast<Scalar>(i < n ? p[i] : p[0]);
        m(i, next) = q;
        detail::close_row(m, i, 0);
    }
    std::vector<std::string> labels;
    for (Index i = 0; i <= n; ++i) labels.push_back(std::to_string(i));
    return ProtocolChain<Scalar>(StochasticMatrix<Scalar>::validate(std::move(m)), std::move(labels),
                                 n, 0, tau);
}

/// Two links with single-heralded EG and one swap. States 00, 01, 10, 11, S.
template <typename Scalar = double>
ProtocolChain<Scalar> build_two_link_single_heralded(const TwoLinkParams& params, double tau) {
    detail::check_two_link(params, 1);
    const Scalar pl = params.left_probs[0];
    const Scalar pr = params.right_probs[0];
    const Scalar ps = params.swap_prob;
    const Scalar ql = Scalar(1) - pl;
    const Scalar qr = Scalar(1) - pr;
    enum : Index { k00, k01, k10, k11, kS };

    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(5, 5);
    for (Index row : {Index(k00), Index(kS)}) {
        m(row, k01) = ql * pr;
        m(row, k10) = pl * qr;
        m(row, k11) = pl * pr;
        detail::close_row(m, row, k00);
    }
    m(k01, k11) = pl;
    detail::close_row(m, k01, k01);
    m(k10, k11) = pr;
    detail::close_row(m, k10, k10);
    m(k11, kS) = ps;
    detail::close_row(m, k11, k00);

    return ProtocolChain<Scalar>(StochasticMatrix<Scalar>::validate(std::move(m)),
                                 {"00", "01", "10", "11", "S"}, kS, k00, tau);
}

/// Two links with double-heralded EG and one swap. State ij records the last
/// successful round on the left (i) and right (j) link.
template <typename Scalar = double>
ProtocolChain<Scalar> build_two_link_double_heralded(const TwoLinkParams& params, double tau) {
    detail::check_two_link(params, 2);
    const Scalar pl[2] = {Scalar(params.left_probs[0]), Scalar(params.left_probs[1])};
    const Scalar pr[2] = {Scalar(params.right_probs[0]), Scalar(params.right_probs[1])};
    const Scalar ps = params.swap_prob;
    const auto state = [](Index i, Index j) { return 3 * i + j; };
    constexpr Index kS = 9;
    constexpr Index k00 = 0;

    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(10, 10);
    // Both links still generating: each side advances a round or resets to 0.
    const auto both = [&](Index row, Index i, Index j) {
        const Scalar l = pl[i], r = pr[j];
        m(row, state(0, j + 1)) += (Scalar(1) - l) * r;
        m(row, state(i + 1, 0)) += l * (Scalar(1) - r);
        m(row, state(i + 1, j + 1)) += l * r;
        detail::close_row(m, row, k00);
    };
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j) both(state(i, j), i, j);
    both(kS, 0, 0);
    // Right link done; only the left link generates.
    for (Index i = 0; i < 2; ++i) {
        const Index row = state(i, 2);
        m(row, state(i + 1, 2)) = pl[i];
        detail::close_row(m, row, state(0, 2));
    }
    // Left link done; only the right link generates.
    for (Index j = 0; j < 2; ++j) {
        const Index row = state(2, j);
        m(row, state(2, j + 1)) = pr[j];
        detail::close_row(m, row, state(2, 0));
    }
    m(state(2, 2), kS) = ps;
    detail::close_row(m, state(2, 2), k00);

    return ProtocolChain<Scalar>(StochasticMatrix<Scalar>::validate(std::move(m)),
                                 {"00", "01", "02", "10", "11", "12", "20", "21", "22", "S"}, kS,
                                 k00, tau);
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

namespace detail {

inline void check_rounds(const MultiHeraldParams& params) {
    if (params.round_probs.empty()) throw Error(ErrorCode::EmptyRounds, "no rounds");
    for (double q : params.round_probs) check_probability(q, "round probability");
}

/// 1 + sum_{i=1}^{n-1} prod_{j<=i} p_j
template <typename Scalar>
Scalar multiherald_denominator(const std::vector<double>& p) {
    Scalar sum = 1, prod = 1;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        prod *= Scalar(p[i]);
        sum += prod;
    }
    return sum;
}

template <typename Scalar>
Scalar product(const std::vector<double>& p) {
    Scalar prod = 1;
    for (double q : p) prod *= Scalar(q);
    return prod;
}

} // namespace detail

/// Equilibrium probability of the success state of the n-round chain.
template <typename Scalar = double>
Scalar cf_equilibrium_multiheralded(const MultiHeraldParams& params) {
    detail::check_rounds(params);
    return detail::product<Scalar>(params.round_probs) /
           detail::multiherald_denominator<Scalar>(params.round_probs);
}

/// Hitting-time variance (steps^2) of the success state from the failure state.
///
/// ((1 + S) / P)^2 - (2n - 1 + sum_{i=1}^{n-1} (2i - 1) prod_{j<=n-i} p_j) / P
/// with P = prod p_i and S = sum_{i=1}^{n-1} prod_{j<=i} p_j.
template <typename Scalar = double>
Scalar cf_latency_variance_multiheralded(const MultiHeraldParams& params) {
    detail::check_rounds(params);
    const auto& p = params.round_probs;
    for (double q : p)
        if (q == 0.0) throw Error(ErrorCode::ZeroProbability, "round probability is zero");
    const std::size_t n = p.size();
    const Scalar prod = detail::product<Scalar>(p);
    const Scalar mean = detail::multiherald_denominator<Scalar>(p) / prod;

    // prefix[m] = prod_{j<=m} p_j
    std::vector<Scalar> prefix(n + 1, Scalar(1));
    for (std::size_t m = 1; m <= n; ++m) prefix[m] = prefix[m - 1] * Scalar(p[m - 1]);
    Scalar tail = Scalar(2 * n - 1);
    for (std::size_t i = 1; i < n; ++i) tail += Scalar(2 * i - 1) * prefix[n - i];
    return mean * mean - tail / prod;
}

/// Expected successes per step of the BKP chain over N steps started in state 0.
template <typename Scalar = double>
Scalar cf_bkp_exact_mean_throughput(double p1, double p2, std::uint64_t horizon) {
    detail::check_probability(p1, "p1");
    detail::check_probability(p2, "p2");
    if (horizon < 1) throw Error(ErrorCode::ArgumentOutOfRange, "horizon must be >= 1");
    const Scalar a = p1, b = p2;
    const Scalar n = static_cast<Scalar>(horizon);
    const Scalar alt = std::pow(-a, static_cast<Scalar>(horizon));
    const Scalar s = Scalar(1) + a;
    // ab/(1+a) [1 - (1 - (-a)^N) / ((1+a) N)]; the bracket is exactly 0 at N = 1.
    return a * b / s * (Scalar(1) - (Scalar(1) - alt) / (s * n));
}

/// Limit of N tau^2 Var[T] for the BKP chain.
template <typename Scalar = double>
Scalar cf_bkp_throughput_variance_leading(double p1, double p2) {
    detail::check_probability(p1, "p1");
    detail::check_probability(p2, "p2");
    const Scalar a = p1, b = p2;
    const Scalar s = Scalar(1) + a;
    return a * b * (s * s - a * b * (Scalar(3) + a)) / (s * s * s);
}

/// Equilibrium probability of S for two single-heralded links as a function of
/// (p_l, p_r, p_s). No range check: nested estimators also evaluate it at
/// arguments above 1.
template <typename Scalar = double>
Scalar shs_success_equilibrium(Scalar pl, Scalar pr, Scalar ps) {
    const Scalar ql = Scalar(1) - pl, qr = Scalar(1) - pr;
    const Scalar num = pl * pr * ps * (Scalar(1) - ql * qr);
    const Scalar den = Scalar(2) * pl * pr + ql * pr * pr + qr * pl * pl - pl * pr * ql * qr;
    return num / den;
}

template <typename Scalar = double>
Scalar cf_equilibrium_shs(const TwoLinkParams& params) {
    detail::check_two_link(params, 1);
    const double pl = params.left_probs[0], pr = params.right_probs[0];
    if (pl == 0.0 && pr == 0.0) {
        throw Error(ErrorCode::DegenerateChain, "both link probabilities are zero");
    }
    return shs_success_equilibrium<Scalar>(pl, pr, params.swap_prob);
}

/// Hitting-time variance (steps^2) of S from 00 for two single-heralded links.
///
/// First numerator is p_l p_r + p_l^2 + p_r^2 - p_l^2 p_r^2; the variance must
/// vanish when every probability is 1.
template <typename Scalar = double>
Scalar cf_latency_variance_shs(const TwoLinkParams& params) {
    detail::check_two_link(params, 1);
    const Scalar pl = params.left_probs[0], pr = params.right_probs[0], ps = params.swap_prob;
    if (pl == Scalar(0) || pr == Scalar(0) || ps == Scalar(0)) {
        throw Error(ErrorCode::ZeroProbability, "shs latency variance needs p_l, p_r, p_s > 0");
    }
    const Scalar either = pl + pr - pl * pr;
    const Scalar base = pl * pr * ps;
    const Scalar first = (pl * pr + pl * pl + pr * pr - pl * pl * pr * pr) / (base * either);
    const Scalar qr = Scalar(1) - pr;
    const Scalar second_num = pl * pl * pr * qr * (Scalar(2) - pr) +
                              pl * pl * pl * qr * qr * (Scalar(3) + pr) + Scalar(3) * pr * pr * pr +
                              pl * pr * (Scalar(4) + Scalar(2) * pr - Scalar(5) * pr * pr);
    return first * first - second_num / (base * either * either);
}

} // namespace repeaterlab
