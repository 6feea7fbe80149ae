#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "repeaterlab/io.hpp"
#include "repeaterlab/simulator.hpp"

namespace repeaterlab {

struct GridAxis {
    std::string name;
    double start = 0.0;
    double stop = 1.0;
    int count = 2;

    double value(int i) const {
        return start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

/// Parameter grid plus the metrics to evaluate at every point.
///
/// protocol: multiherald (p1..pn), shs (pl, pr, ps; "p" sets both links),
/// dhs (pl1, pl2, pr1, pr2, ps; aliases p1, p2, pl, pr) or nested (k, p).
/// Every chain protocol also accepts tau.
struct SweepSpec {
    std::string protocol;
    std::vector<GridAxis> varied;
    std::map<std::string, double> fixed;
    std::vector<std::string> outputs;
    std::uint64_t horizon = 1000;  // N for naive_var / exact_var
    SimConfig simulation{.steps_per_trajectory = 20'000, .trajectories = 100};
};

const std::vector<std::string>& known_metrics();

SweepSpec sweep_spec_from_json(const Json& doc);
Json to_json(const SweepSpec& spec);

/// Number of grid points, first axis outermost.
std::size_t grid_size(const SweepSpec& spec);

/// Parameter values at flat grid index `point`, fixed values included.
std::map<std::string, double> grid_point(const SweepSpec& spec, std::size_t point);

/// Builds chain parameters from named values of a chain protocol.
ProtocolParams protocol_params_from_values(const std::string& protocol,
                                           const std::map<std::string, double>& values);

/// Evaluates every metric at one point, in spec.outputs order.
std::vector<double> evaluate_point(const SweepSpec& spec, std::size_t point);

/// Full CSV text: header of varied names then metric names, one row per point.
std::string run_sweep(const SweepSpec& spec, unsigned threads);

} // namespace repeaterlab
