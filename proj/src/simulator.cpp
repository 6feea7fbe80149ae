#include "repeaterlab/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <thread>

namespace repeaterlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Runs body(t) for every trajectory t; each index is handled by exactly one thread.
void for_each_trajectory(std::uint64_t count, unsigned threads,
                         const std::function<void(std::uint64_t)>& body) {
    const auto workers = static_cast<std::uint64_t>(
        std::max<unsigned>(1, std::min<std::uint64_t>(threads, count)));
    if (workers == 1) {
        for (std::uint64_t t = 0; t < count; ++t) body(t);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::uint64_t t = w; t < count; t += workers) body(t);
        });
    }
}

SimulationResult summarize(std::vector<std::uint64_t> counts, const SimConfig& config,
                           std::chrono::steady_clock::time_point start) {
    SimulationResult out;
    const double steps = static_cast<double>(config.steps_per_trajectory);
    const double m = static_cast<double>(counts.size());
    double sum = 0.0;
    for (auto c : counts) sum += static_cast<double>(c) / steps;
    out.mean_throughput = sum / m;
    double ss = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) / steps - out.mean_throughput;
        ss += d * d;
    }
    out.throughput_variance = counts.size() > 1 ? ss / (m - 1.0) : 0.0;
    out.standard_error = std::sqrt(out.throughput_variance / m);
    out.success_counts = std::move(counts);
    out.config = config;
    out.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

unsigned resolve_threads(const SimConfig& config) {
    return config.threads > 0 ? config.threads : default_thread_count();
}

} // namespace

void SimConfig::validate() const {
    if (steps_per_trajectory < 1) throw Error(ErrorCode::InvalidConfig, "steps must be >= 1");
    if (trajectories < 1) throw Error(ErrorCode::InvalidConfig, "trajectories must be >= 1");
    if (rng_algorithm != kRngAlgorithm) {
        throw Error(ErrorCode::InvalidConfig, "unsupported rng_algorithm '" + rng_algorithm + "'");
    }
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t trajectory) {
    std::uint64_t state = splitmix64(seed) ^ splitmix64(trajectory + 0x632be59bd9b4e019ULL);
    std::seed_seq seq{static_cast<std::uint32_t>(state), static_cast<std::uint32_t>(state >> 32),
                      static_cast<std::uint32_t>(trajectory), static_cast<std::uint32_t>(seed)};
    return std::mt19937_64(seq);
}

unsigned default_thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("REPEATERLAB_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

// ---------------------------------------------------------------------------
// Trajectories of an arbitrary protocol chain
// ---------------------------------------------------------------------------

SimulationResult simulate_chain(const ProtocolChain<double>& chain, const SimConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto& m = chain.matrix().matrix();
    const Index n = chain.size();

    // Cumulative rows; the last positive column absorbs rounding in the tail.
    std::vector<std::vector<double>> cumulative(n);
    std::vector<Index> last_positive(n, 0);
    for (Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < n; ++j) {
            acc += m(i, j);
            cumulative[i].push_back(acc);
            if (m(i, j) > 0.0) last_positive[i] = j;
        }
    }

    const Index success = chain.success_state();
    std::vector<std::uint64_t> counts(config.trajectories, 0);
    for_each_trajectory(config.trajectories, resolve_threads(config), [&](std::uint64_t t) {
        auto rng = trajectory_rng(config.seed, t);
        Index state = chain.start_state();
        std::uint64_t hits = 0;
        for (std::uint64_t step = 0; step < config.steps_per_trajectory; ++step) {
            const double u = uniform01(rng);
            const auto& row = cumulative[state];
            Index next = last_positive[state];
            for (Index j = 0; j < n; ++j) {
                if (u < row[j] && m(state, j) > 0.0) {
                    next = j;
                    break;
                }
            }
            state = next;
            if (state == success) ++hits;
        }
        counts[t] = hits;
    });
    return summarize(std::move(counts), config, start);
}

// ---------------------------------------------------------------------------
// Nested repeater chain
// ---------------------------------------------------------------------------

NestedChainState::NestedChainState(int k, double p) : k_(k), p_(p) {
    if (k < 1 || k > 20) throw Error(ErrorCode::ArgumentOutOfRange, "k must be in [1, 20]");
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::ArgumentOutOfRange, "p must be in (0, 1]");
    slots_.resize(k + 1);
    timers_.resize(k + 1);
    for (int level = 0; level <= k; ++level) {
        const std::size_t width = std::size_t{1} << (k - level);
        slots_[level].assign(width, Slot::Empty);
        timers_[level].assign(width, 0);
    }
}

void NestedChainState::reset() {
    for (auto& level : slots_) std::fill(level.begin(), level.end(), Slot::Empty);
    for (auto& level : timers_) std::fill(level.begin(), level.end(), 0);
}

bool NestedChainState::step(std::mt19937_64& rng) {
    // Swaps in flight.
    for (int level = 1; level <= k_; ++level) {
        for (std::size_t i = 0; i < slots_[level].size(); ++i) {
            if (slots_[level][i] != Slot::Pending) continue;
            if (--timers_[level][i] == 0) slots_[level][i] = Slot::Ready;
        }
    }
    // Entanglement generation on idle elementary links.
    for (auto& link : slots_[0]) {
        if (link == Slot::Empty && uniform01(rng) < p_) link = Slot::Ready;
    }
    if (slots_[k_][0] == Slot::Ready) {
        reset();
        return true;
    }
    // Start swaps for sibling segments that are both ready. A segment created by
    // a swap this step can join a higher-level swap in the same step.
    for (int level = 1; level <= k_; ++level) {
        auto& below = slots_[level - 1];
        for (std::size_t i = 0; i < slots_[level].size(); ++i) {
            if (below[2 * i] == Slot::Ready && below[2 * i + 1] == Slot::Ready) {
                below[2 * i] = Slot::Consumed;
                below[2 * i + 1] = Slot::Consumed;
                slots_[level][i] = Slot::Pending;
                timers_[level][i] = std::uint32_t{1} << (level - 1);
            }
        }
    }
    return false;
}

void NestedChainState::check_invariants() const {
    const auto fail = [](const std::string& what) {
        throw Error(ErrorCode::InvalidConfig, "nested state invariant violated: " + what);
    };
    for (int level = 0; level <= k_; ++level) {
        for (std::size_t i = 0; i < slots_[level].size(); ++i) {
            const Slot s = slots_[level][i];
            const std::string where = "level " + std::to_string(level) + " pos " + std::to_string(i);
            if (level > 0 && s == Slot::Empty) {
                // An empty upper slot must not sit on consumed children.
                if (slots_[level - 1][2 * i] == Slot::Consumed ||
                    slots_[level - 1][2 * i + 1] == Slot::Consumed)
                    fail("consumed children under empty slot at " + where);
            }
            if (level > 0 && (s == Slot::Pending || s == Slot::Ready)) {
                if (slots_[level - 1][2 * i] != Slot::Consumed ||
                    slots_[level - 1][2 * i + 1] != Slot::Consumed)
                    fail("segment at " + where + " without two consumed halves");
            }
            if (s == Slot::Pending) {
                const std::uint32_t t = timers_[level][i];
                if (level == 0 || t < 1 || t > (std::uint32_t{1} << (level - 1)))
                    fail("bad swap timer at " + where);
            } else if (timers_[level][i] != 0) {
                fail("timer without pending swap at " + where);
            }
            if (s == Slot::Consumed) {
                if (level == k_) fail("top level consumed");
                // Parent is live or itself merged further up.
                if (slots_[level + 1][i / 2] == Slot::Empty)
                    fail("consumed slot under empty parent at " + where);
            }
            if (level == 0 && s == Slot::Pending) fail("pending elementary link");
        }
    }
    // Live segments (Ready or Pending, not consumed) tile disjoint aligned spans.
    std::vector<int> cover(slots_[0].size(), 0);
    for (int level = 0; level <= k_; ++level) {
        const std::size_t span = std::size_t{1} << level;
        for (std::size_t i = 0; i < slots_[level].size(); ++i) {
            const Slot s = slots_[level][i];
            if (s != Slot::Ready && s != Slot::Pending) continue;
            for (std::size_t l = i * span; l < (i + 1) * span; ++l) ++cover[l];
        }
    }
    for (std::size_t l = 0; l < cover.size(); ++l) {
        if (cover[l] > 1) fail("link " + std::to_string(l) + " covered by overlapping segments");
    }
}

SimulationResult simulate_nested(int k, double p, const SimConfig& config) {
    config.validate();
    NestedChainState probe(k, p);  // argument validation
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::uint64_t> counts(config.trajectories, 0);
    for_each_trajectory(config.trajectories, resolve_threads(config), [&](std::uint64_t t) {
        auto rng = trajectory_rng(config.seed, t);
        NestedChainState state(k, p);
        std::uint64_t hits = 0;
        for (std::uint64_t step = 0; step < config.steps_per_trajectory; ++step) {
            if (state.step(rng)) ++hits;
            if (config.check_invariants) state.check_invariants();
        }
        counts[t] = hits;
    });
    return summarize(std::move(counts), config, start);
}

} // namespace repeaterlab
