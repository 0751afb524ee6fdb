#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "changepoint.hpp"
#include "decision.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "model.hpp"
#include "path_io.hpp"
#include "pathfun.hpp"
#include "random.hpp"
#include "sampler.hpp"
#include "testprocess.hpp"

namespace cirdetect {

using ordered_json = nlohmann::ordered_json;

enum class ExperimentKind { size, power, drift, changepoint, sampler_moments };

inline ExperimentKind parse_kind(std::string_view s) {
    if (s == "size") return ExperimentKind::size;
    if (s == "power") return ExperimentKind::power;
    if (s == "drift") return ExperimentKind::drift;
    if (s == "changepoint") return ExperimentKind::changepoint;
    if (s == "sampler-moments") return ExperimentKind::sampler_moments;
    throw ArgumentError("unknown experiment kind '" + std::string(s) + "'");
}

inline std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::size: return "size";
        case ExperimentKind::power: return "power";
        case ExperimentKind::drift: return "drift";
        case ExperimentKind::changepoint: return "changepoint";
        case ExperimentKind::sampler_moments: return "sampler-moments";
    }
    return "?";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::size;
    // Null-hypothesis parameters, or the pre-change side of a scenario.
    double a = 1.0;
    double b = 1.0;
    double sigma = 0.5;
    // Post-change drift; only read by the scenario kinds.
    double a_post = 1.0;
    double b_post = 1.0;
    double rho = 0.5;
    double horizon = 500.0;
    double dt = 0.01;
    std::optional<std::size_t> grid;
    double alpha = 0.05;
    Parameter parameter = Parameter::a;
    Side side = Side::two_sided;
    std::size_t replications = 100;
    std::uint64_t master_seed = 1;
    // Empty means a stationary start.
    std::optional<double> x0;
    // Empty means sigma^2 is recovered from each path.
    std::optional<double> sigma_sq;
    bool per_replication = false;
    bool record_timing = false;
    std::optional<std::filesystem::path> output;
    // 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;

    CirParams params() const { return {a, b, sigma}; }
    ChangeScenario scenario() const { return {{a, b}, {a_post, b_post}, sigma, rho, horizon}; }

    InitialState initial_state() const {
        if (x0) return *x0;
        return StationaryStart{};
    }

    void validate() const {
        if (replications < 1) throw ArgumentError("replications must be >= 1");
        (void)params();
        check_alpha(alpha);
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("dt must be finite and > 0");
        if (x0 && !(*x0 >= 0.0)) throw ArgumentError("x0 must be >= 0");
        switch (kind) {
            case ExperimentKind::sampler_moments:
                if (!x0) throw ArgumentError("sampler-moments needs a numeric x0");
                return;
            case ExperimentKind::size:
                if (!(horizon >= dt)) throw ArgumentError("horizon must be >= dt");
                return;
            case ExperimentKind::power:
            case ExperimentKind::drift:
            case ExperimentKind::changepoint:
                (void)scenario();
                if (parameter == Parameter::both && kind != ExperimentKind::power) {
                    throw ArgumentError("drift and changepoint experiments need param a or b");
                }
                return;
        }
    }
};

inline ordered_json to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["kind"] = to_string(c.kind);
    j["a"] = c.a;
    j["b"] = c.b;
    j["sigma"] = c.sigma;
    if (c.kind == ExperimentKind::power || c.kind == ExperimentKind::drift ||
        c.kind == ExperimentKind::changepoint) {
        j["a_post"] = c.a_post;
        j["b_post"] = c.b_post;
        j["rho"] = c.rho;
    }
    j["horizon"] = c.horizon;
    j["dt"] = c.dt;
    j["grid"] = c.grid ? ordered_json(*c.grid) : ordered_json(nullptr);
    j["alpha"] = c.alpha;
    j["param"] = to_string(c.parameter);
    j["side"] = to_string(c.side);
    j["replications"] = c.replications;
    j["seed"] = c.master_seed;
    j["x0"] = c.x0 ? ordered_json(*c.x0) : ordered_json("stationary");
    j["sigma_sq"] = c.sigma_sq ? ordered_json(*c.sigma_sq) : ordered_json("auto");
    return j;
}

// Reads the keys of to_json; absent keys keep their defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        if (!j.is_object()) throw ArgumentError("experiment config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "kind") c.kind = parse_kind(value.get<std::string>());
            else if (key == "a") c.a = value.get<double>();
            else if (key == "b") c.b = value.get<double>();
            else if (key == "sigma") c.sigma = value.get<double>();
            else if (key == "a_post") c.a_post = value.get<double>();
            else if (key == "b_post") c.b_post = value.get<double>();
            else if (key == "rho") c.rho = value.get<double>();
            else if (key == "horizon") c.horizon = value.get<double>();
            else if (key == "dt") c.dt = value.get<double>();
            else if (key == "grid") {
                if (!value.is_null()) c.grid = value.get<std::size_t>();
            } else if (key == "alpha") c.alpha = value.get<double>();
            else if (key == "param") c.parameter = parse_parameter(value.get<std::string>());
            else if (key == "side") c.side = parse_side(value.get<std::string>());
            else if (key == "replications") c.replications = value.get<std::size_t>();
            else if (key == "seed") c.master_seed = value.get<std::uint64_t>();
            else if (key == "x0") {
                if (value.is_string()) {
                    if (value.get<std::string>() != "stationary") {
                        throw ArgumentError("x0 must be a number or \"stationary\"");
                    }
                    c.x0.reset();
                } else {
                    c.x0 = value.get<double>();
                }
            } else if (key == "sigma_sq") {
                if (value.is_string()) {
                    if (value.get<std::string>() != "auto") {
                        throw ArgumentError("sigma_sq must be a number or \"auto\"");
                    }
                    c.sigma_sq.reset();
                } else {
                    c.sigma_sq = value.get<double>();
                }
            } else if (key == "per_replication") c.per_replication = value.get<bool>();
            else if (key == "record_timing") c.record_timing = value.get<bool>();
            else if (key == "output") c.output = value.get<std::string>();
            else if (key == "threads") c.threads = value.get<unsigned>();
            else throw ArgumentError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("invalid experiment config: ") + e.what());
    }
    return c;
}

inline ExperimentConfig read_config(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ArgumentError("cannot open config " + file.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError("config " + file.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

// Per-replication statistics as named columns.
struct ReplicationTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(std::string_view name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw ArgumentError("no column " + std::string(name));
        const auto k = static_cast<std::size_t>(it - columns.begin());
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
    }
};

struct ExperimentReport {
    ExperimentConfig config;
    ReplicationTable replications;
    ordered_json aggregates;
    std::optional<double> wall_clock_seconds;

    ordered_json to_json(bool include_records) const {
        ordered_json j;
        j["config"] = cirdetect::to_json(config);
        j["seed"] = config.master_seed;
        j["aggregates"] = aggregates;
        if (wall_clock_seconds) j["wall_clock_seconds"] = *wall_clock_seconds;
        if (include_records) {
            ordered_json records = ordered_json::array();
            for (const auto& row : replications.rows) {
                ordered_json r;
                for (std::size_t k = 0; k < row.size(); ++k) r[replications.columns[k]] = row[k];
                records.push_back(std::move(r));
            }
            j["records"] = std::move(records);
        }
        return j;
    }
};

// Sup distance between the empirical CDF of `sample` and `cdf`.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ArgumentError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return v.size() < 2 ? 0.0 : s / static_cast<double>(v.size() - 1);
}

// Runs body(i) for i in [0, count) on `threads` workers. Each index is
// processed exactly once; the first exception is rethrown after joining.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
}

namespace detail {

inline std::size_t component_index(Parameter p) { return p == Parameter::b ? 1 : 0; }

// Change direction implied by a scenario for the tested parameter.
inline ChangeDirection scenario_direction(const ChangeScenario& s, Parameter p) {
    const double pre = p == Parameter::b ? s.pre().b : s.pre().a;
    const double post = p == Parameter::b ? s.post().b : s.post().a;
    return pre > post ? ChangeDirection::down : ChangeDirection::up;
}

inline std::vector<std::string> experiment_columns(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::size:
            return {"statistic", "p_value", "reject", "sup_abs_1", "sup_abs_2"};
        case ExperimentKind::power:
            return {"sup_abs", "signed_extreme", "reject_two_sided", "reject_one_sided"};
        case ExperimentKind::drift:
            return {"raw_extreme_over_T", "raw_max_over_T", "raw_min_over_T",
                    "normalized_sup_abs_over_sqrt_T"};
        case ExperimentKind::changepoint:
            return {"tau_hat", "abs_error"};
        case ExperimentKind::sampler_moments:
            return {"draw"};
    }
    return {};
}

inline SamplePath replication_path(const ExperimentConfig& c, RandomSource& rng) {
    if (c.kind == ExperimentKind::size) {
        return simulate_path(c.params(), c.initial_state(), c.horizon, c.dt, rng);
    }
    return simulate_change_path(c.scenario(), c.initial_state(), c.dt, rng).path;
}

inline std::vector<double> run_replication(const ExperimentConfig& c, std::size_t index) {
    RandomSource rng(derive_seed(c.master_seed, index));
    if (c.kind == ExperimentKind::sampler_moments) {
        return {sample_transition(c.params(), *c.x0, c.dt, rng)};
    }
    const SamplePath path = replication_path(c, rng);
    const PathFunctionals fn = compute_functionals(path, c.sigma_sq);
    const TestTrajectory traj = test_trajectory(fn, c.grid);
    const std::size_t comp = component_index(c.parameter);

    switch (c.kind) {
        case ExperimentKind::size: {
            const auto decisions = run_test(traj, {c.parameter, c.side, c.alpha});
            bool reject = false;
            double stat = decisions.front().statistic;
            double p = 1.0;
            for (const auto& d : decisions) {
                reject = reject || d.reject;
                p = std::min(p, d.p_value);
            }
            double s1 = 0.0, s2 = 0.0;
            for (const Vec2& v : traj.values) {
                s1 = std::max(s1, std::abs(v[0]));
                s2 = std::max(s2, std::abs(v[1]));
            }
            return {stat, p, reject ? 1.0 : 0.0, s1, s2};
        }
        case ExperimentKind::power: {
            const Parameter p = c.parameter;
            const auto two = run_test(traj, {p, Side::two_sided, c.alpha});
            bool reject_two = false;
            for (const auto& d : two) reject_two = reject_two || d.reject;
            bool reject_one = false;
            double sup_abs = 0.0;
            double signed_extreme = 0.0;
            for (Parameter q : {Parameter::a, Parameter::b}) {
                if (p != Parameter::both && p != q) continue;
                const Side side = scenario_direction(c.scenario(), q) == ChangeDirection::down
                                      ? Side::upper
                                      : Side::lower;
                const double level = p == Parameter::both ? c.alpha / 2.0 : c.alpha;
                const auto one = run_test(traj, {q, side, level});
                reject_one = reject_one || one.front().reject;
                if (q == p || (p == Parameter::both && q == Parameter::a)) {
                    signed_extreme = one.front().statistic;
                }
            }
            for (const Vec2& v : traj.values) sup_abs = std::max(sup_abs, std::abs(v[comp]));
            return {sup_abs, signed_extreme, reject_two ? 1.0 : 0.0, reject_one ? 1.0 : 0.0};
        }
        case ExperimentKind::drift: {
            const RawScore raw = raw_score(fn, traj.theta_hat);
            double hi = 0.0, lo = 0.0;
            for (const Vec2& v : raw.values) {
                hi = std::max(hi, v[comp]);
                lo = std::min(lo, v[comp]);
            }
            double sup_abs = 0.0;
            for (const Vec2& v : traj.values) sup_abs = std::max(sup_abs, std::abs(v[comp]));
            const double T = fn.horizon();
            // The extremum of larger magnitude, keeping its sign.
            const double extreme = hi >= -lo ? hi : lo;
            return {extreme / T, hi / T, lo / T, sup_abs / std::sqrt(T)};
        }
        case ExperimentKind::changepoint: {
            const RawScore raw = raw_score(fn, traj.theta_hat);
            const ChangeScenario s = c.scenario();
            const auto est = estimate_change_point(raw, static_cast<int>(comp) + 1,
                                                   scenario_direction(s, c.parameter));
            return {est.tau_hat, std::abs(est.tau_hat - s.tau())};
        }
        case ExperimentKind::sampler_moments:
            break;
    }
    return {};
}

}  // namespace detail

// Aggregates are a pure function of the configuration and the table, so
// they can be recomputed from emitted per-replication records.
inline ordered_json aggregate(const ExperimentConfig& c, const ReplicationTable& t) {
    ordered_json agg;
    agg["replications"] = t.rows.size();
    switch (c.kind) {
        case ExperimentKind::size: {
            const auto kolmogorov = [](double x) { return 1.0 - two_sided_tail(x); };
            agg["rejection_rate"] = mean(t.column("reject"));
            agg["mean_statistic"] = mean(t.column("statistic"));
            agg["ks_distance_sup_abs_1"] = ks_distance(t.column("sup_abs_1"), kolmogorov);
            agg["ks_distance_sup_abs_2"] = ks_distance(t.column("sup_abs_2"), kolmogorov);
            break;
        }
        case ExperimentKind::power:
            agg["rejection_rate_two_sided"] = mean(t.column("reject_two_sided"));
            agg["rejection_rate_one_sided"] = mean(t.column("reject_one_sided"));
            agg["mean_sup_abs"] = mean(t.column("sup_abs"));
            break;
        case ExperimentKind::drift: {
            const ChangeScenario s = c.scenario();
            const double target = c.parameter == Parameter::b ? drift_phi(s) : drift_psi(s);
            const auto extremes = t.column("raw_extreme_over_T");
            const double m = mean(extremes);
            std::size_t matches = 0;
            for (double e : extremes) {
                if ((e > 0.0 && target > 0.0) || (e < 0.0 && target < 0.0)) ++matches;
            }
            agg["target"] = target;
            agg["mean_raw_extreme_over_T"] = m;
            agg["relative_error"] = target != 0.0 ? std::abs(m - target) / std::abs(target)
                                                  : std::abs(m);
            agg["sign_match_rate"] =
                static_cast<double>(matches) / static_cast<double>(extremes.size());
            agg["mean_normalized_sup_abs_over_sqrt_T"] =
                mean(t.column("normalized_sup_abs_over_sqrt_T"));
            break;
        }
        case ExperimentKind::changepoint: {
            const auto err = t.column("abs_error");
            agg["tau"] = c.rho * c.horizon;
            agg["mean_abs_error"] = mean(err);
            agg["abs_error_q50"] = quantile(err, 0.5);
            agg["abs_error_q90"] = quantile(err, 0.9);
            break;
        }
        case ExperimentKind::sampler_moments: {
            const auto draws = t.column("draw");
            std::vector<double> squares;
            squares.reserve(draws.size());
            for (double d : draws) squares.push_back(d * d);
            const double n = static_cast<double>(draws.size());
            const CirParams p = c.params();
            const double m1 = mean(draws);
            const double m2 = mean(squares);
            const double se1 = std::sqrt(sample_variance(draws) / n);
            const double se2 = std::sqrt(sample_variance(squares) / n);
            const double t1 = conditional_mean(p, *c.x0, c.dt);
            const double t2 = conditional_second_moment(p, *c.x0, c.dt);
            agg["mean"] = m1;
            agg["mean_target"] = t1;
            agg["mean_std_error"] = se1;
            agg["mean_z"] = se1 > 0.0 ? (m1 - t1) / se1 : 0.0;
            agg["second_moment"] = m2;
            agg["second_moment_target"] = t2;
            agg["second_moment_std_error"] = se2;
            agg["second_moment_z"] = se2 > 0.0 ? (m2 - t2) / se2 : 0.0;
            break;
        }
    }
    return agg;
}

inline void write_replications_csv(std::ostream& os, const ReplicationTable& t) {
    os << "replication";
    for (const auto& c : t.columns) os << ',' << c;
    os << '\n';
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        os << i;
        for (double v : t.rows[i]) os << ',' << detail::format_real(v);
        os << '\n';
    }
}

// Replication i draws from derive_seed(master_seed, i), so the result does
// not depend on the thread count or schedule.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.config = config;
    report.replications.columns = detail::experiment_columns(config.kind);
    report.replications.rows.resize(config.replications);
    parallel_for(config.replications, config.threads, [&](std::size_t i) {
        report.replications.rows[i] = detail::run_replication(config, i);
    });
    report.aggregates = aggregate(config, report.replications);
    if (config.record_timing) {
        report.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return report;
}

}  // namespace cirdetect
