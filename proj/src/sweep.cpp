#include "repeaterlab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "repeaterlab/estimators.hpp"

namespace repeaterlab {

namespace {

bool is_chain_protocol(const std::string& p) { return p == "multiherald" || p == "shs" || p == "dhs"; }

double lookup(const std::map<std::string, double>& values, const std::string& key) {
    const auto it = values.find(key);
    if (it == values.end()) throw Error(ErrorCode::InvalidSpec, "parameter '" + key + "' not set");
    return it->second;
}

double lookup_or(const std::map<std::string, double>& values, const std::string& key, double fallback) {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

/// First match among `keys`.
double lookup_any(const std::map<std::string, double>& values, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        const auto it = values.find(k);
        if (it != values.end()) return it->second;
    }
    throw Error(ErrorCode::InvalidSpec, std::string("parameter '") + *keys.begin() + "' not set");
}

int integer_param(const std::map<std::string, double>& values, const std::string& key) {
    const double v = lookup(values, key);
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 1) {
        throw Error(ErrorCode::InvalidSpec, key + " must be a positive integer");
    }
    return static_cast<int>(r);
}

bool metric_allowed(const std::string& protocol, const std::string& metric) {
    if (metric == "simulated_mean") return true;
    const bool nested_metric = metric == "nested_type1" || metric == "nested_type2";
    return nested_metric == (protocol == "nested");
}

} // namespace

const std::vector<std::string>& known_metrics() {
    static const std::vector<std::string> metrics = {
        "equilibrium", "mean_latency", "latency_std_over_mean", "naive_var",
        "exact_var",   "nested_type1", "nested_type2",          "simulated_mean"};
    return metrics;
}

SweepSpec sweep_spec_from_json(const Json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::InvalidSpec, "sweep spec must be an object");
    SweepSpec spec;
    if (!doc.contains("protocol") || !doc.at("protocol").is_string()) {
        throw Error(ErrorCode::InvalidSpec, "missing protocol");
    }
    spec.protocol = doc.at("protocol").get<std::string>();
    if (!is_chain_protocol(spec.protocol) && spec.protocol != "nested") {
        throw Error(ErrorCode::InvalidSpec, "unknown protocol '" + spec.protocol + "'");
    }
    try {
        for (const auto& axis : doc.at("varied")) {
            GridAxis a{axis.at("name").get<std::string>(), axis.at("start").get<double>(),
                       axis.at("stop").get<double>(), axis.at("count").get<int>()};
            if (a.count < 2) throw Error(ErrorCode::InvalidSpec, "grid count for " + a.name + " must be >= 2");
            spec.varied.push_back(a);
        }
        if (doc.contains("fixed")) {
            for (const auto& [name, value] : doc.at("fixed").items()) spec.fixed[name] = value.get<double>();
        }
        for (const auto& m : doc.at("outputs")) spec.outputs.push_back(m.get<std::string>());
        if (doc.contains("horizon")) spec.horizon = doc.at("horizon").get<std::uint64_t>();
        if (doc.contains("simulation")) {
            const auto& sim = doc.at("simulation");
            if (sim.contains("steps")) spec.simulation.steps_per_trajectory = sim.at("steps").get<std::uint64_t>();
            if (sim.contains("trajectories")) spec.simulation.trajectories = sim.at("trajectories").get<std::uint64_t>();
            if (sim.contains("seed")) spec.simulation.seed = sim.at("seed").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, e.what());
    }
    if (spec.varied.empty()) throw Error(ErrorCode::InvalidSpec, "no varied parameters");
    if (spec.outputs.empty()) throw Error(ErrorCode::InvalidSpec, "no outputs");
    for (const auto& m : spec.outputs) {
        const auto& known = known_metrics();
        if (std::find(known.begin(), known.end(), m) == known.end()) {
            throw Error(ErrorCode::InvalidSpec, "unknown metric '" + m + "'");
        }
        if (!metric_allowed(spec.protocol, m)) {
            throw Error(ErrorCode::InvalidSpec, "metric '" + m + "' not available for " + spec.protocol);
        }
    }
    spec.simulation.validate();
    if (spec.horizon < 1) throw Error(ErrorCode::InvalidSpec, "horizon must be >= 1");
    return spec;
}

Json to_json(const SweepSpec& spec) {
    Json doc;
    doc["protocol"] = spec.protocol;
    doc["varied"] = Json::array();
    for (const auto& a : spec.varied) {
        doc["varied"].push_back({{"name", a.name}, {"start", a.start}, {"stop", a.stop}, {"count", a.count}});
    }
    doc["fixed"] = spec.fixed;
    doc["outputs"] = spec.outputs;
    doc["horizon"] = spec.horizon;
    doc["simulation"] = {{"steps", spec.simulation.steps_per_trajectory},
                         {"trajectories", spec.simulation.trajectories},
                         {"seed", spec.simulation.seed}};
    return doc;
}

std::size_t grid_size(const SweepSpec& spec) {
    std::size_t n = 1;
    for (const auto& a : spec.varied) n *= static_cast<std::size_t>(a.count);
    return n;
}

std::map<std::string, double> grid_point(const SweepSpec& spec, std::size_t point) {
    std::map<std::string, double> values = spec.fixed;
    for (auto it = spec.varied.rbegin(); it != spec.varied.rend(); ++it) {
        const auto count = static_cast<std::size_t>(it->count);
        values[it->name] = it->value(static_cast<int>(point % count));
        point /= count;
    }
    return values;
}

ProtocolParams protocol_params_from_values(const std::string& protocol,
                                           const std::map<std::string, double>& values) {
    ProtocolParams out;
    out.kind = protocol_kind_from_string(protocol);
    out.tau = lookup_or(values, "tau", 1.0);
    switch (out.kind) {
    case ProtocolKind::MultiHerald: {
        int rounds = 0;
        for (const auto& [name, _] : values) {
            if (name.size() > 1 && name[0] == 'p' &&
                std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
                rounds = std::max(rounds, std::stoi(name.substr(1)));
            }
        }
        if (rounds == 0) throw Error(ErrorCode::InvalidSpec, "multiherald needs p1..pn");
        for (int i = 1; i <= rounds; ++i) out.multi.round_probs.push_back(lookup(values, "p" + std::to_string(i)));
        break;
    }
    case ProtocolKind::Shs:
        out.two_link.left_probs = {lookup_any(values, {"pl", "p"})};
        out.two_link.right_probs = {lookup_any(values, {"pr", "p"})};
        out.two_link.swap_prob = lookup_or(values, "ps", 1.0);
        break;
    case ProtocolKind::Dhs:
        out.two_link.left_probs = {lookup_any(values, {"pl1", "p1", "pl"}), lookup_any(values, {"pl2", "p2", "pl"})};
        out.two_link.right_probs = {lookup_any(values, {"pr1", "p1", "pr"}), lookup_any(values, {"pr2", "p2", "pr"})};
        out.two_link.swap_prob = lookup_or(values, "ps", 1.0);
        break;
    }
    return out;
}

std::vector<double> evaluate_point(const SweepSpec& spec, std::size_t point) {
    const auto values = grid_point(spec, point);
    SimConfig sim = spec.simulation;
    sim.threads = 1;
    sim.seed = spec.simulation.seed + point;

    std::vector<double> out;
    out.reserve(spec.outputs.size());
    if (spec.protocol == "nested") {
        const int k = integer_param(values, "k");
        const double p = lookup(values, "p");
        for (const auto& m : spec.outputs) {
            if (m == "nested_type1") out.push_back(nested_throughput(p, k, NestedMethod::Type1).rate());
            else if (m == "nested_type2") out.push_back(nested_throughput(p, k, NestedMethod::Type2).rate());
            else out.push_back(simulate_nested(k, p, sim).mean_throughput);
        }
        return out;
    }

    const auto chain = build_chain(protocol_params_from_values(spec.protocol, values));
    for (const auto& m : spec.outputs) {
        if (m == "equilibrium") {
            out.push_back(equilibrium(chain.matrix())[chain.success_state()]);
        } else if (m == "mean_latency") {
            out.push_back(estimate_latency(chain).mean);
        } else if (m == "latency_std_over_mean") {
            const auto lat = estimate_latency(chain);
            out.push_back(std::sqrt(std::max(0.0, lat.variance)) / lat.mean);
        } else if (m == "naive_var") {
            out.push_back(estimate_throughput(chain, spec.horizon, false).naive_variance);
        } else if (m == "exact_var") {
            out.push_back(*estimate_throughput(chain, spec.horizon, true).exact_variance);
        } else {
            out.push_back(simulate_chain(chain, sim).mean_throughput);
        }
    }
    return out;
}

std::string run_sweep(const SweepSpec& spec, unsigned threads) {
    const std::size_t total = grid_size(spec);
    std::vector<std::vector<double>> rows(total);
    std::vector<std::exception_ptr> errors(total);
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, total);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < total; i += workers) {
                    try {
                        rows[i] = evaluate_point(spec, i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<std::string> header;
    for (const auto& a : spec.varied) header.push_back(a.name);
    header.insert(header.end(), spec.outputs.begin(), spec.outputs.end());
    std::string csv = csv_line(header);
    for (std::size_t i = 0; i < total; ++i) {
        const auto values = grid_point(spec, i);
        std::vector<std::string> cells;
        for (const auto& a : spec.varied) cells.push_back(format_number(values.at(a.name)));
        for (double v : rows[i]) cells.push_back(format_number(v));
        csv += csv_line(cells);
    }
    return csv;
}

} // namespace repeaterlab
