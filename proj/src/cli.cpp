#include "repeaterlab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "repeaterlab/sweep.hpp"

namespace repeaterlab {

namespace {

struct ChainFlags {
    std::string protocol;
    std::vector<double> probs;
    std::vector<double> pl;
    std::vector<double> pr;
    double ps = 1.0;
    double tau = 1.0;
    std::string params_file;

    void attach(CLI::App& cmd) {
        cmd.add_option("--protocol", protocol, "multiherald | shs | dhs");
        cmd.add_option("--probs", probs, "round probabilities for multiherald")->delimiter(',');
        cmd.add_option("--pl", pl, "left link EG probabilities")->delimiter(',');
        cmd.add_option("--pr", pr, "right link EG probabilities")->delimiter(',');
        cmd.add_option("--ps", ps, "swap success probability");
        cmd.add_option("--tau", tau, "time step");
        cmd.add_option("--params", params_file, "protocol parameter JSON file");
    }

    ProtocolParams resolve() const {
        if (!params_file.empty()) return protocol_params_from_json(Json::parse(read_file(params_file)));
        if (protocol.empty()) throw Error(ErrorCode::InvalidSpec, "--protocol or --params required");
        ProtocolParams out;
        out.kind = protocol_kind_from_string(protocol);
        out.tau = tau;
        if (out.kind == ProtocolKind::MultiHerald) {
            out.multi.round_probs = probs;
        } else {
            out.two_link.left_probs = pl;
            out.two_link.right_probs = pr;
            out.two_link.swap_prob = ps;
        }
        return out;
    }
};

struct SimFlags {
    bool nested = false;
    int k = 1;
    double p = 0.5;
    std::uint64_t steps = 100'000;
    std::uint64_t trajectories = 1'000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;

    void attach(CLI::App& cmd) {
        cmd.add_flag("--nested", nested, "simulate a 2^k-link nested repeater chain");
        cmd.add_option("--k", k, "nesting level");
        cmd.add_option("--p", p, "elementary link EG probability");
        cmd.add_option("--steps", steps, "time steps per trajectory");
        cmd.add_option("--trajectories", trajectories, "number of trajectories");
        cmd.add_option("--seed", seed, "64-bit seed; drawn from OS entropy when absent");
        cmd.add_option("--threads", threads, "worker threads (default: REPEATERLAB_THREADS or all cores)");
    }

    SimConfig config() const {
        SimConfig c;
        c.steps_per_trajectory = steps;
        c.trajectories = trajectories;
        if (seed) {
            c.seed = *seed;
        } else {
            std::random_device rd;
            c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        }
        c.threads = threads;
        return c;
    }
};

Json config_json(const SimConfig& c) {
    return {{"steps", c.steps_per_trajectory},
            {"trajectories", c.trajectories},
            {"seed", c.seed},
            {"rng_algorithm", c.rng_algorithm}};
}

Json distribution_json(const Distribution<double>& d) {
    Json out = Json::array();
    for (Index i = 0; i < d.size(); ++i) out.push_back(d[i]);
    return out;
}

/// |analytical - simulated| in standard errors. Deterministic runs have zero
/// spread across trajectories; they fall back to the i.i.d. (naive) error.
double sigma_distance(double analytical, const SimulationResult& r) {
    double se = r.standard_error;
    if (!(se > 0.0)) {
        const double n = static_cast<double>(r.config.steps_per_trajectory * r.config.trajectories);
        se = std::sqrt(std::max(0.0, analytical * (1.0 - analytical)) / n);
    }
    if (se > 0.0) return std::abs(analytical - r.mean_throughput) / se;
    return analytical == r.mean_throughput ? 0.0 : std::numeric_limits<double>::max();
}

int report_error(const Error& e, std::ostream& err) {
    err << Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << "\n";
    return is_numerical(e.code()) ? kExitNumerical : kExitValidation;
}

} // namespace

Json analyze_report(const ProtocolParams& params, std::optional<std::uint64_t> horizon) {
    const auto chain = build_chain(params);
    const auto pi = equilibrium(chain.matrix());
    const double pi_s = pi[chain.success_state()];
    const auto throughput = estimate_throughput(chain, horizon.value_or(10'000), horizon.has_value());
    const auto latency = estimate_latency(chain);

    Json report;
    report["params"] = to_json(params);
    report["labels"] = chain.labels();
    report["matrix"] = to_json(chain.matrix());
    report["success_state"] = chain.labels()[chain.success_state()];
    report["start_state"] = chain.labels()[chain.start_state()];
    report["equilibrium"] = distribution_json(pi);
    report["equilibrium_success"] = pi_s;
    report["throughput"] = {{"mean_rate", throughput.mean_rate},
                            {"naive_variance", throughput.naive_variance},
                            {"exact_variance", throughput.exact_variance ? Json(*throughput.exact_variance) : Json()},
                            {"horizon", throughput.horizon}};
    report["latency"] = {{"mean", latency.mean}, {"variance", latency.variance}};

    Json checks;
    const double tau = chain.tau();
    checks["return_time_latency_delta"] =
        std::abs(latency.mean - tau * mean_return_time(chain.matrix(), chain.success_state()));
    std::optional<double> cf_eq, cf_var;
    try {
        if (params.kind == ProtocolKind::MultiHerald) {
            cf_eq = cf_equilibrium_multiheralded(params.multi);
            cf_var = cf_latency_variance_multiheralded(params.multi);
        } else if (params.kind == ProtocolKind::Shs) {
            cf_eq = cf_equilibrium_shs(params.two_link);
            cf_var = cf_latency_variance_shs(params.two_link);
        }
    } catch (const Error&) {
        // Closed forms undefined at zero probabilities; the chain analysis still stands.
    }
    if (cf_eq) {
        checks["closed_form_equilibrium"] = *cf_eq;
        checks["equilibrium_delta"] = std::abs(*cf_eq - pi_s);
    }
    if (cf_var) {
        checks["closed_form_latency_variance"] = *cf_var * tau * tau;
        checks["latency_variance_delta"] = std::abs(*cf_var * tau * tau - latency.variance);
    }
    report["cross_checks"] = checks;
    return report;
}

std::string simulation_csv(const SimulationResult& result) {
    std::string csv = csv_line({"trajectory_index", "success_count"});
    for (std::size_t i = 0; i < result.success_counts.size(); ++i) {
        csv += csv_line({std::to_string(i), std::to_string(result.success_counts[i])});
    }
    return csv;
}

Json simulation_summary(const SimulationResult& result, const Json& target) {
    return {{"target", target},
            {"config", config_json(result.config)},
            {"mean_throughput", result.mean_throughput},
            {"throughput_variance", result.throughput_variance},
            {"standard_error", result.standard_error},
            {"total_successes",
             std::accumulate(result.success_counts.begin(), result.success_counts.end(), std::uint64_t{0})},
            {"wall_time", result.wall_time}};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Throughput and latency analysis of quantum repeater protocols"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "analytical statistics of one protocol chain");
    ChainFlags analyze_chain;
    analyze_chain.attach(*analyze);
    std::optional<std::uint64_t> horizon;
    std::string emit_params;
    analyze->add_option("--horizon", horizon, "N for the exact throughput variance");
    analyze->add_option("--emit-params", emit_params, "write the resolved parameters as JSON");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "evaluate metrics over a parameter grid");
    std::string spec_path, out_path;
    unsigned sweep_threads = 0;
    sweep->add_option("--spec", spec_path, "sweep spec JSON")->required();
    sweep->add_option("--out", out_path, "output CSV path")->required();
    sweep->add_option("--threads", sweep_threads, "worker threads");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo trajectories");
    ChainFlags sim_chain;
    SimFlags sim_flags;
    std::string csv_path, summary_path;
    sim_chain.attach(*simulate);
    sim_flags.attach(*simulate);
    simulate->add_option("--csv", csv_path, "per-trajectory CSV output path");
    simulate->add_option("--summary", summary_path, "summary JSON output path (default stdout)");

    // compare
    auto* compare = app.add_subcommand("compare", "analytical vs simulated mean throughput");
    ChainFlags cmp_chain;
    SimFlags cmp_flags;
    cmp_chain.attach(*compare);
    cmp_flags.attach(*compare);

    std::vector<std::string> argv_store = {"repeaterlab"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*analyze) {
            const auto params = analyze_chain.resolve();
            if (!emit_params.empty()) write_file_atomic(emit_params, to_json(params).dump(2) + "\n");
            out << analyze_report(params, horizon).dump(2) << "\n";
        } else if (*sweep) {
            const auto spec = sweep_spec_from_json(Json::parse(read_file(spec_path)));
            const unsigned threads = sweep_threads > 0 ? sweep_threads : default_thread_count();
            write_file_atomic(out_path, run_sweep(spec, threads));
            out << Json{{"rows", grid_size(spec)}, {"out", out_path}}.dump() << "\n";
        } else if (*simulate) {
            const auto config = sim_flags.config();
            SimulationResult result;
            Json target;
            if (sim_flags.nested) {
                result = simulate_nested(sim_flags.k, sim_flags.p, config);
                target = {{"nested", true}, {"k", sim_flags.k}, {"p", sim_flags.p}};
            } else {
                const auto params = sim_chain.resolve();
                result = simulate_chain(build_chain(params), config);
                target = to_json(params);
            }
            if (!csv_path.empty()) write_file_atomic(csv_path, simulation_csv(result));
            const std::string summary = simulation_summary(result, target).dump(2) + "\n";
            if (summary_path.empty()) out << summary;
            else write_file_atomic(summary_path, summary);
        } else if (*compare) {
            const auto config = cmp_flags.config();
            std::string csv = csv_line({"quantity", "analytical", "simulated", "standard_error", "sigma_distance"});
            const auto row = [&](const std::string& name, double analytical, const SimulationResult& r) {
                csv += csv_line({name, format_number(analytical), format_number(r.mean_throughput),
                                 format_number(r.standard_error),
                                 format_number(sigma_distance(analytical, r))});
            };
            if (cmp_flags.nested) {
                const auto result = simulate_nested(cmp_flags.k, cmp_flags.p, config);
                if (cmp_flags.k == 1) {
                    row("shs_equilibrium", shs_success_equilibrium(cmp_flags.p, cmp_flags.p, 1.0), result);
                }
                row("nested_type1", nested_throughput(cmp_flags.p, cmp_flags.k, NestedMethod::Type1).rate(), result);
                row("nested_type2", nested_throughput(cmp_flags.p, cmp_flags.k, NestedMethod::Type2).rate(), result);
            } else {
                const auto chain = build_chain(cmp_chain.resolve());
                const auto result = simulate_chain(chain, config);
                row("equilibrium", equilibrium(chain.matrix())[chain.success_state()], result);
            }
            out << csv;
        }
    } catch (const Error& e) {
        return report_error(e, err);
    } catch (const nlohmann::json::exception& e) {
        return report_error(Error(ErrorCode::InvalidSpec, e.what()), err);
    }
    return kExitOk;
}

} // namespace repeaterlab
