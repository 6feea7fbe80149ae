#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "repeaterlab/protocols.hpp"

namespace repeaterlab {

inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64";

struct SimConfig {
    std::uint64_t steps_per_trajectory = 100'000;
    std::uint64_t trajectories = 1'000;
    std::uint64_t seed = 0;
    std::string rng_algorithm = kRngAlgorithm;
    /// Worker threads; 0 means hardware concurrency capped by REPEATERLAB_THREADS.
    unsigned threads = 0;
    /// Verify NestedChainState invariants after every step.
    bool check_invariants = false;

    void validate() const;
};

struct SimulationResult {
    std::vector<std::uint64_t> success_counts;
    double mean_throughput = 0.0;      // successes per step
    double throughput_variance = 0.0;  // sample variance of per-trajectory throughput
    double standard_error = 0.0;       // sqrt(throughput_variance / trajectories)
    SimConfig config;
    double wall_time = 0.0;  // seconds
};

/// Per-trajectory generator, seeded from (seed, trajectory index) so results do
/// not depend on how trajectories are spread over threads.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t trajectory);

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Thread count from REPEATERLAB_THREADS, else hardware concurrency.
unsigned default_thread_count();

/// Nested repeater chain with 2^k elementary links, single-heralded EG and
/// deterministic swapping. Segment (level j, position i) spans links
/// [i 2^j, (i+1) 2^j).
class NestedChainState {
public:
    enum class Slot : std::uint8_t {
        Empty,     // level 0 only: link idle, attempts EG
        Ready,     // entangled segment available
        Pending,   // swap in flight producing this segment
        Consumed,  // merged into a higher-level segment
    };

    NestedChainState(int k, double p);

    /// Advances one time step; returns true if an end-to-end pair completed.
    bool step(std::mt19937_64& rng);

    /// Throws if the segment bookkeeping is inconsistent.
    void check_invariants() const;

    int levels() const { return k_; }
    Slot slot(int level, std::size_t position) const { return slots_[level][position]; }
    std::uint32_t timer(int level, std::size_t position) const { return timers_[level][position]; }

private:
    void reset();

    int k_;
    double p_;
    std::vector<std::vector<Slot>> slots_;
    std::vector<std::vector<std::uint32_t>> timers_;
};

SimulationResult simulate_chain(const ProtocolChain<double>& chain, const SimConfig& config);

SimulationResult simulate_nested(int k, double p, const SimConfig& config);

} // namespace repeaterlab
