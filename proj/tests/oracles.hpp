#pragma once

// Test-only reference computations. None of these touch the library's
// solvers: plain nested vectors, repeated multiplication and path sums.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat multiply(const Mat& a, const Mat& b) {
    const std::size_t n = a.size();
    Mat c(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

/// P^k by k - 1 plain multiplications.
inline Mat naive_power(const Mat& p, unsigned k) {
    const std::size_t n = p.size();
    Mat r(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) r[i][i] = 1.0;
    for (unsigned s = 0; s < k; ++s) r = multiply(r, p);
    return r;
}

/// Row-vector power iteration from the uniform distribution until the
/// sup-norm change drops below tol.
inline Vec power_iteration(const Mat& p, double tol = 1e-15, std::uint64_t cap = 10'000'000) {
    const std::size_t n = p.size();
    Vec x(n, 1.0 / static_cast<double>(n));
    for (std::uint64_t it = 0; it < cap; ++it) {
        Vec y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) y[j] += x[i] * p[i][j];
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) delta = std::max(delta, std::abs(y[j] - x[j]));
        x = y;
        if (delta < tol) return x;
    }
    throw std::runtime_error("oracle power iteration did not converge");
}

/// gcd{t <= bound : (P^t)_ii > 0} from boolean matrix powers; 0 if no return.
inline std::int64_t period_by_enumeration(const Mat& p, std::size_t state, std::size_t bound) {
    const std::size_t n = p.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;  // P^0
    std::int64_t g = 0;
    for (std::size_t t = 1; t <= bound; ++t) {
        std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (reach[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (p[k][j] > 0.0) next[i][j] = true;
        reach = std::move(next);
        if (reach[state][state]) g = std::gcd(g, static_cast<std::int64_t>(t));
    }
    return g;
}

/// P(hitting time of `target` = t | start) for t = 1..horizon, by explicit
/// depth-first enumeration of every path that avoids the target until step t.
inline Vec hitting_pmf_by_paths(const Mat& p, std::size_t start, std::size_t target, unsigned horizon) {
    Vec pmf(horizon + 1, 0.0);
    std::function<void(std::size_t, unsigned, double)> walk = [&](std::size_t at, unsigned t, double prob) {
        if (t == horizon) return;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double w = prob * p[at][j];
            if (w == 0.0) continue;
            if (j == target) pmf[t + 1] += w;
            else walk(j, t + 1, w);
        }
    };
    walk(start, 0, 1.0);
    return pmf;
}

struct HittingMoments {
    double mean = 0.0;
    double variance = 0.0;
    double tail_bound = 0.0;  // bound on the truncated part of E[T^2]
    unsigned horizon = 0;
};

/// Mean and variance of the hitting time from path-probability sums
/// E[T] = sum_{t>=0} P(T > t), E[T^2] = sum_{t>=0} (2t + 1) P(T > t),
/// truncated once the worst-case survival mass is negligible. The tail is
/// bounded via submultiplicativity: P(T > qm) <= c^q with c = max_i P(T > m | i).
inline HittingMoments hitting_moments_by_paths(const Mat& p, std::size_t start, std::size_t target,
                                               unsigned max_horizon = 2'000'000) {
    const std::size_t n = p.size();
    // alive[i][s]: probability of being at s at time t, target not yet hit, from i.
    Mat alive(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        if (i != target) alive[i][i] = 1.0;

    HittingMoments out;
    long double m1 = 0.0L, m2 = 0.0L;
    double worst = 1.0;
    unsigned t = 0;
    for (; t < max_horizon; ++t) {
        double from_start = 0.0;
        worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == target) continue;
            double s = 0.0;
            for (double v : alive[i]) s += v;
            if (i == start) from_start = s;
            worst = std::max(worst, s);
        }
        m1 += from_start;
        m2 += (2.0L * t + 1.0L) * from_start;
        if (worst < 1e-22 && t > 0) break;
        Mat next(n, Vec(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t s = 0; s < n; ++s) {
                if (alive[i][s] == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != target) next[i][j] += alive[i][s] * p[s][j];
            }
        alive = std::move(next);
    }
    out.horizon = t;
    // Remaining terms t' > t: with m = t + 1 and c = worst (computed at time t),
    // sum_{q>=1} sum_{r<m} (2(qm + r) + 1) c^q <= sum_{q>=1} m (2(q+1)m + 1) c^q.
    const double m = static_cast<double>(t + 1);
    double bound = 0.0, cq = worst;
    for (int q = 1; q < 64 && cq > 0.0; ++q, cq *= worst) bound += m * (2.0 * (q + 1) * m + 1.0) * cq;
    out.tail_bound = bound;
    out.mean = static_cast<double>(m1);
    out.variance = static_cast<double>(m2 - m1 * m1);
    return out;
}

/// Visits to `s` in steps 1..N from `start`, averaged: (1/N) sum_k (P^k)_{start,s}.
inline double visit_fraction(const Mat& p, std::size_t start, std::size_t s, unsigned horizon) {
    Mat pk = p;
    double sum = 0.0;
    for (unsigned k = 1; k <= horizon; ++k) {
        sum += pk[start][s];
        pk = multiply(pk, p);
    }
    return sum / horizon;
}

} // namespace oracle
