#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "repeaterlab/protocols.hpp"

namespace repeaterlab {

inline constexpr std::uint64_t kDefaultHorizonCap = 1'000'000;

/// Long-run throughput. Rates are pairs per time unit, variances of the
/// N-step average rate in 1/time^2.
struct ThroughputEstimate {
    double mean_rate = 0.0;
    double naive_variance = 0.0;
    std::optional<double> exact_variance;
    std::uint64_t horizon = 1;
    double tau = 1.0;
};

/// On-demand latency from the failure state, in time units.
struct LatencyEstimate {
    double mean = 0.0;
    double variance = 0.0;
};

enum class NestedMethod { Type1, Type2 };

constexpr std::string_view to_string(NestedMethod m) {
    return m == NestedMethod::Type1 ? "type1" : "type2";
}

/// Recursive throughput estimate of a 2^k-link nested chain, in units of the
/// elementary-link time step. per_level_rates[j] is the level-(j+1) estimate.
struct NestedEstimate {
    int level_k = 1;
    NestedMethod method = NestedMethod::Type2;
    std::vector<double> per_level_rates;
    /// Type 1 only: the recursion evaluated without clamping its argument.
    std::vector<double> unclamped_rates;
    bool clamped = false;

    double rate() const { return per_level_rates.back(); }
};

struct ThroughputOptions {
    std::uint64_t horizon_cap = kDefaultHorizonCap;
};

ThroughputEstimate estimate_throughput(const ProtocolChain<double>& chain, std::uint64_t horizon,
                                       bool exact, const ThroughputOptions& options = {});

/// N^2 Var[sum of success indicators] over `horizon` steps starting in the
/// failure state, from the covariance double sum (steps, dimensionless).
double exact_count_variance(const ProtocolChain<double>& chain, std::uint64_t horizon);

LatencyEstimate estimate_latency(const ProtocolChain<double>& chain);

NestedEstimate nested_throughput(double p, int k, NestedMethod method);

} // namespace repeaterlab
