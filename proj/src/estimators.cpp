#include "repeaterlab/estimators.hpp"

#include <cmath>
#include <string>

namespace repeaterlab {

double exact_count_variance(const ProtocolChain<double>& chain, std::uint64_t horizon) {
    const auto& m = chain.matrix().matrix();
    const Index n = chain.size();
    const Index s = chain.success_state();

    // a_k = (P^k)_{start,S}, b_k = (P^k)_{S,S}, advanced as row vectors.
    RowVectorX<double> from_start = RowVectorX<double>::Zero(n);
    RowVectorX<double> from_success = RowVectorX<double>::Zero(n);
    from_start(chain.start_state()) = 1.0;
    from_success(s) = 1.0;

    std::vector<long double> a(horizon + 1, 0.0L);
    std::vector<long double> b_prefix(horizon + 1, 0.0L);  // sum_{m=1}^{k} b_m
    for (std::uint64_t k = 1; k <= horizon; ++k) {
        from_start = (from_start * m).eval();
        from_success = (from_success * m).eval();
        a[k] = from_start(s);
        b_prefix[k] = b_prefix[k - 1] + from_success(s);
    }

    // 2 sum_{k<l} [b_{l-k} - a_l] a_k + sum_k a_k (1 - a_k)
    //   = 2 sum_k a_k B_{N-k} - [(sum a)^2 - sum a^2] + sum a - sum a^2
    long double sum_a = 0, sum_a2 = 0, cross = 0;
    for (std::uint64_t k = 1; k <= horizon; ++k) {
        sum_a += a[k];
        sum_a2 += a[k] * a[k];
        cross += a[k] * b_prefix[horizon - k];
    }
    const long double total = 2 * cross - (sum_a * sum_a - sum_a2) + sum_a - sum_a2;
    return static_cast<double>(total);
}

ThroughputEstimate estimate_throughput(const ProtocolChain<double>& chain, std::uint64_t horizon,
                                       bool exact, const ThroughputOptions& options) {
    if (horizon < 1) throw Error(ErrorCode::ArgumentOutOfRange, "horizon must be >= 1");
    if (horizon > options.horizon_cap) {
        throw Error(ErrorCode::HorizonTooLarge, "horizon " + std::to_string(horizon) +
                                                    " exceeds cap " +
                                                    std::to_string(options.horizon_cap));
    }
    const double tau = chain.tau();
    const double pi_s = equilibrium(chain.matrix())[chain.success_state()];
    const double n = static_cast<double>(horizon);

    ThroughputEstimate out;
    out.mean_rate = pi_s / tau;
    out.naive_variance = pi_s * (1.0 - pi_s) / (n * tau * tau);
    out.horizon = horizon;
    out.tau = tau;
    if (exact) out.exact_variance = exact_count_variance(chain, horizon) / (n * n * tau * tau);
    return out;
}

LatencyEstimate estimate_latency(const ProtocolChain<double>& chain) {
    const auto stats = hitting_stats(chain.matrix(), chain.success_state());
    const double tau = chain.tau();
    return {tau * stats.mean_from(chain.start_state()),
            tau * tau * stats.variance_from(chain.start_state())};
}

NestedEstimate nested_throughput(double p, int k, NestedMethod method) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::ArgumentOutOfRange, "p = " + std::to_string(p) + " not in (0, 1]");
    }
    if (k < 1) throw Error(ErrorCode::ArgumentOutOfRange, "k must be >= 1");

    const auto pi = [](double x) { return shs_success_equilibrium<double>(x, x, 1.0); };
    NestedEstimate out;
    out.level_k = k;
    out.method = method;
    out.per_level_rates.push_back(pi(p));
    if (method == NestedMethod::Type1) out.unclamped_rates.push_back(pi(p));

    for (int level = 2; level <= k; ++level) {
        if (method == NestedMethod::Type2) {
            out.per_level_rates.push_back(pi(out.per_level_rates.back()));
            continue;
        }
        // The level-k swap takes 2^{k-1} steps: rescale to that time unit and back.
        const double scale = std::ldexp(1.0, level - 1);
        const double arg = scale * out.per_level_rates.back();
        const double clamped_arg = arg > 1.0 ? 1.0 : arg;
        if (clamped_arg != arg) out.clamped = true;
        out.per_level_rates.push_back(pi(clamped_arg) / scale);
        out.unclamped_rates.push_back(pi(scale * out.unclamped_rates.back()) / scale);
    }
    return out;
}

} // namespace repeaterlab
