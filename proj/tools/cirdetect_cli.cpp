#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cirdetect/cirdetect.hpp"

namespace {

using cirdetect::ordered_json;

constexpr int kUserError = 1;
constexpr int kInternalError = 2;

std::optional<double> parse_sigma_sq(const std::string& s) {
    if (s == "auto") return std::nullopt;
    double v = 0.0;
    if (!cirdetect::detail::parse_real(s, v) || v < 0.0) {
        throw cirdetect::ArgumentError("--sigma-sq must be 'auto' or a number >= 0");
    }
    return v;
}

cirdetect::InitialState parse_x0(const std::string& s) {
    if (s == "stationary") return cirdetect::StationaryStart{};
    double v = 0.0;
    if (!cirdetect::detail::parse_real(s, v) || v < 0.0) {
        throw cirdetect::ArgumentError("--x0 must be 'stationary' or a number >= 0");
    }
    return v;
}

void emit(const ordered_json& j, const std::optional<std::string>& out) {
    if (out) {
        std::ofstream os(*out);
        if (!os) throw cirdetect::ArgumentError("cannot open " + *out + " for writing");
        os << j.dump(2) << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
}

ordered_json decision_json(const cirdetect::Decision& d) {
    ordered_json j;
    j["parameter"] = cirdetect::to_string(d.parameter);
    j["side"] = cirdetect::to_string(d.side);
    j["component"] = d.component;
    j["alpha"] = d.alpha;
    j["statistic"] = d.statistic;
    j["critical_value"] = d.critical_value;
    j["p_value"] = d.p_value;
    j["reject"] = d.reject;
    return j;
}

struct SimulateArgs {
    double a = 1.0, b = 1.0, sigma = 0.5;
    std::optional<double> a_post, b_post;
    double rho = 0.5;
    std::string x0 = "stationary";
    double t_end = 100.0;
    double dt = 0.01;
    std::uint64_t seed = 1;
    std::optional<std::string> out;
};

int run_simulate(const SimulateArgs& args) {
    cirdetect::RandomSource rng(args.seed);
    const auto x0 = parse_x0(args.x0);
    if (args.a_post || args.b_post) {
        const cirdetect::ChangeScenario scenario({args.a, args.b},
                                                 {args.a_post.value_or(args.a), args.b_post.value_or(args.b)},
                                                 args.sigma, args.rho, args.t_end);
        const auto result = cirdetect::simulate_change_path(scenario, x0, args.dt, rng);
        if (args.out) {
            cirdetect::write_path_csv(*args.out, result.path);
            ordered_json j;
            j["points"] = result.path.size();
            j["change_index"] = result.change_index;
            j["tau"] = result.tau;
            j["tau_grid"] = result.tau_grid;
            std::cout << j.dump(2) << '\n';
        } else {
            cirdetect::write_path_csv(std::cout, result.path);
        }
        return 0;
    }
    const cirdetect::CirParams params(args.a, args.b, args.sigma);
    const auto path = cirdetect::simulate_path(params, x0, args.t_end, args.dt, rng);
    if (args.out) {
        cirdetect::write_path_csv(*args.out, path);
    } else {
        cirdetect::write_path_csv(std::cout, path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change detection in the drift of a Cox-Ingersoll-Ross process"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a path (optionally with one change) to CSV");
    simulate->add_option("--a", sim.a, "Drift level a");
    simulate->add_option("--b", sim.b, "Mean-reversion speed b");
    simulate->add_option("--sigma", sim.sigma, "Volatility sigma");
    simulate->add_option("--a-post", sim.a_post, "Post-change a (enables a change scenario)");
    simulate->add_option("--b-post", sim.b_post, "Post-change b (enables a change scenario)");
    simulate->add_option("--rho", sim.rho, "Change fraction in (0,1)");
    simulate->add_option("--x0", sim.x0, "Initial value or 'stationary'");
    simulate->add_option("--t-end", sim.t_end, "Horizon T");
    simulate->add_option("--dt", sim.dt, "Sampling step");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--out", sim.out, "Output CSV (default stdout)");

    std::string path_file;
    std::string sigma_sq = "auto";
    std::optional<std::string> out;

    auto* estimate = app.add_subcommand("estimate", "Least-squares drift estimate from a path CSV");
    estimate->add_option("--path", path_file, "Path CSV with header t,x")->required();
    estimate->add_option("--sigma-sq", sigma_sq, "sigma^2 or 'auto'");
    estimate->add_option("--out", out, "Output JSON (default stdout)");

    std::string param = "a";
    std::string side = "two";
    double alpha = 0.05;
    std::optional<std::size_t> grid;
    std::optional<std::string> trajectory_file;
    auto* test = app.add_subcommand("test", "CUSUM test for a change in a and/or b");
    test->add_option("--path", path_file, "Path CSV with header t,x")->required();
    test->add_option("--param", param, "a, b or both")->check(CLI::IsMember({"a", "b", "both"}));
    test->add_option("--side", side, "upper, lower or two")->check(CLI::IsMember({"upper", "lower", "two"}));
    test->add_option("--alpha", alpha, "Significance level");
    test->add_option("--grid", grid, "Number of t-grid intervals (default: path steps)");
    test->add_option("--sigma-sq", sigma_sq, "sigma^2 or 'auto'");
    test->add_option("--emit-trajectory", trajectory_file, "Write t,score_a,score_b CSV here");
    test->add_option("--out", out, "Output JSON (default stdout)");

    std::string direction = "down";
    auto* changepoint = app.add_subcommand("changepoint", "Estimate the change time");
    changepoint->add_option("--path", path_file, "Path CSV with header t,x")->required();
    changepoint->add_option("--param", param, "a or b")->check(CLI::IsMember({"a", "b"}));
    changepoint->add_option("--direction", direction, "up or down")->check(CLI::IsMember({"up", "down"}));
    changepoint->add_option("--sigma-sq", sigma_sq, "sigma^2 or 'auto'");
    changepoint->add_option("--out", out, "Output JSON (default stdout)");

    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replications;
    std::optional<unsigned> threads;
    bool records = false;
    bool timing = false;
    auto* experiment = app.add_subcommand("experiment", "Seeded Monte Carlo experiment");
    experiment->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    experiment->add_option("--seed", seed, "Master seed (overrides config)");
    experiment->add_option("--replications", replications, "Replication count (overrides config)");
    experiment->add_option("--threads", threads, "Worker threads, 0 = all cores");
    experiment->add_option("--out", out, "Report JSON (default stdout)");
    experiment->add_flag("--records", records, "Include per-replication records in the report");
    experiment->add_flag("--timing", timing, "Include wall-clock time in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUserError;
    }

    try {
        if (*simulate) return run_simulate(sim);

        if (*estimate) {
            const auto path = cirdetect::read_path_csv(path_file);
            const auto fn = cirdetect::compute_functionals(path, parse_sigma_sq(sigma_sq));
            const auto theta = cirdetect::lse(fn);
            ordered_json j;
            j["a_hat"] = theta.a_hat;
            j["b_hat"] = theta.b_hat;
            j["sigma_sq_hat"] = fn.sigma_sq();
            j["det_q"] = theta.det_q;
            emit(j, out);
            return 0;
        }

        if (*test) {
            const auto path = cirdetect::read_path_csv(path_file);
            const auto fn = cirdetect::compute_functionals(path, parse_sigma_sq(sigma_sq));
            const auto traj = cirdetect::test_trajectory(fn, grid);
            const cirdetect::TestSpec spec{cirdetect::parse_parameter(param), cirdetect::parse_side(side), alpha};
            const auto decisions = cirdetect::run_test(traj, spec);
            if (trajectory_file) {
                std::ofstream os(*trajectory_file);
                if (!os) throw cirdetect::ArgumentError("cannot open " + *trajectory_file);
                cirdetect::write_trajectory_csv(os, traj);
            }
            ordered_json j;
            j["a_hat"] = traj.theta_hat.a_hat;
            j["b_hat"] = traj.theta_hat.b_hat;
            j["sigma_sq_hat"] = fn.sigma_sq();
            j["decisions"] = ordered_json::array();
            for (const auto& d : decisions) j["decisions"].push_back(decision_json(d));
            emit(j, out);
            return 0;
        }

        if (*changepoint) {
            const auto path = cirdetect::read_path_csv(path_file);
            const auto fn = cirdetect::compute_functionals(path, parse_sigma_sq(sigma_sq));
            const auto raw = cirdetect::raw_score(fn, cirdetect::lse(fn));
            const auto est = cirdetect::estimate_change_point(raw, param == "b" ? 2 : 1,
                                                             cirdetect::parse_direction(direction));
            ordered_json j;
            j["tau_hat"] = path.t0() + est.tau_hat;
            j["index"] = est.index;
            j["achieved_value"] = est.achieved_value;
            j["direction"] = cirdetect::to_string(est.direction);
            j["component"] = est.component;
            emit(j, out);
            return 0;
        }

        if (*experiment) {
            cirdetect::ExperimentConfig config;
            if (config_file) config = cirdetect::read_config(*config_file);
            if (seed) config.master_seed = *seed;
            if (replications) config.replications = *replications;
            if (threads) config.threads = *threads;
            if (out) config.output = *out;
            if (timing) config.record_timing = true;
            const auto report = cirdetect::run_experiment(config);
            const auto j = report.to_json(records);
            if (config.output) {
                emit(j, config.output->string());
                if (config.per_replication) {
                    std::ofstream os(config.output->string() + ".replications.csv");
                    if (!os) throw cirdetect::ArgumentError("cannot write replication sidecar");
                    cirdetect::write_replications_csv(os, report.replications);
                }
            } else {
                emit(j, std::nullopt);
            }
            return 0;
        }
    } catch (const cirdetect::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUserError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kUserError;
}
