#include "eecmdp/harness.hpp"

#include "eecmdp/config.hpp"
#include "eecmdp/errors.hpp"
#include "eecmdp/format.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace eecmdp {

namespace {

// Re-throws inner-module failures with the failing stage named, keeping
// the exception type (and therefore the CLI exit code).
template <typename F>
auto stage(const char* tag, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(tag) + ": " + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string(tag) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(tag) + ": " + e.what());
    }
}

int integral_axis_value(SweepAxis axis, double value) {
    if (!(std::floor(value) == value) || value < 1 || value > 1e9) {
        std::ostringstream os;
        os << "axis " << to_string(axis) << " needs a positive integer, got " << value;
        throw ConfigError(os.str());
    }
    return static_cast<int>(value);
}

std::string format_power_mw(double watts) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", watts * 1e3);
    return std::string(buf);
}

} // namespace

const char* to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::discount: return "discount";
        case SweepAxis::max_snr: return "max_snr";
        case SweepAxis::bins_qs: return "bins_qs";
        case SweepAxis::actions_qa: return "actions_qa";
        case SweepAxis::antennas_m: return "antennas_m";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "discount") return SweepAxis::discount;
    if (name == "max_snr") return SweepAxis::max_snr;
    if (name == "bins_qs") return SweepAxis::bins_qs;
    if (name == "actions_qa") return SweepAxis::actions_qa;
    if (name == "antennas_m") return SweepAxis::antennas_m;
    throw ConfigError("unknown sweep axis '" + name +
                      "' (expected discount, max_snr, bins_qs, actions_qa or antennas_m)");
}

SweepSpec sweep_from_config(const ConfigFile& cf) {
    SweepSpec spec;
    std::string str;
    if (!cf.get_string("sweep", "axis", str))
        throw ConfigError("sweep needs [sweep] axis = ...");
    spec.axis = sweep_axis_from_string(str);
    if (!cf.get_string("sweep", "values", str))
        throw ConfigError("sweep needs [sweep] values = v1,v2,...");
    std::istringstream vs(str);
    std::string tok;
    while (std::getline(vs, tok, ',')) {
        auto b = tok.find_first_not_of(" \t");
        auto e = tok.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("sweep values contain an empty entry");
        tok = tok.substr(b, e - b + 1);
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size())
            throw ConfigError("sweep value is not a number: '" + tok + "'");
        spec.values.push_back(v);
    }
    if (spec.values.empty()) throw ConfigError("sweep values must be non-empty");
    return spec;
}

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value) {
    Scenario s = base;
    switch (axis) {
        case SweepAxis::discount:
            s.discount = value;
            break;
        case SweepAxis::bins_qs:
            if (!base.threshold_grid.empty())
                throw ConfigError("bins_qs sweep conflicts with explicit thresholds");
            s.bins = integral_axis_value(axis, value);
            break;
        case SweepAxis::actions_qa:
            s.power_levels = integral_axis_value(axis, value);
            break;
        case SweepAxis::antennas_m:
            s.num_antennas = integral_axis_value(axis, value);
            break;
        case SweepAxis::max_snr: {
            // Received-SNR interpretation: the cap is the transmit power
            // at which the reference (geometric-mean desired-link) gain
            // hits `value` dB over the noise floor. The geometry depends
            // only on the seed, so the reference gain is the same at
            // every sweep point, and because the cap merely truncates
            // the shared power lattice, raising it only adds actions.
            NetworkGeometry geo = build_geometry(base);
            double log_sum = 0.0;
            int count = 0;
            for (int l = 0; l < base.num_cells; ++l)
                for (int k = 0; k < base.uts_per_cell; ++k) {
                    log_sum += std::log(geo.gain(l, l, k).beta);
                    ++count;
                }
            double beta_ref = std::exp(log_sum / count);
            double cap_w =
                base.noise_variance_w() * std::pow(10.0, value / 10.0) / beta_ref;
            s.power_cap_mw = cap_w * 1e3;
            break;
        }
    }
    validate_scenario(s);
    return s;
}

ModelBundle build_model(const Scenario& s, int threads, const std::string& cache_path) {
    validate_scenario(s);
    ModelBundle b;
    stage("channel model", [&] {
        b.geometry = build_geometry(s);
        b.fsmc = build_fsmc(s, b.geometry);
        return 0;
    });
    stage("reward tables", [&] {
        RewardModel model = make_reward_model(s, b.geometry, b.fsmc);
        if (!cache_path.empty()) {
            auto cached =
                try_load_tables(cache_path, scenario_hash(s), s.reward_mode, s.mc_samples);
            if (cached) {
                b.tables = std::move(*cached);
                return 0;
            }
        }
        b.tables = build_reward_tables(model, s.reward_mode, s.mc_samples, threads);
        if (!cache_path.empty()) save_tables(b.tables, cache_path, scenario_hash(s));
        return 0;
    });
    b.mdp.num_states = b.tables.num_states;
    b.mdp.num_actions = b.tables.num_actions;
    b.mdp.transition = composite_transition_matrix(b.fsmc.codec, b.fsmc.links);
    b.mdp.reward = b.tables.reward;
    b.mdp.costs = b.tables.cost;
    b.mdp.discount = s.discount;

    b.settings.epsilon = s.epsilon;
    b.settings.rho_init = s.rho_init;
    b.settings.max_inner_iters = s.max_inner_iters;
    b.settings.max_outer_iters = s.max_outer_iters;
    b.settings.r_min = s.r_min;
    b.settings.initial_state = s.initial_state;
    b.settings.initial_distribution = b.fsmc.stationary;
    b.settings.strict_restart = s.strict_restart;
    b.settings.normalize_by_horizon = s.normalize_by_horizon;
    b.settings.rho_ceiling = s.rho_ceiling;
    b.settings.feasibility_tol = s.feasibility_tol;
    return b;
}

RunResult run_solve(const Scenario& s, int threads, const std::string& cache_path) {
    ModelBundle b = build_model(s, threads, cache_path);

    RunResult r;
    r.scenario = s;
    auto t0 = std::chrono::steady_clock::now();
    SolveResult solved = stage("solver", [&] { return solve_cmdp(b.mdp, b.settings); });
    if (s.csv_timing == CsvTiming::real) {
        auto t1 = std::chrono::steady_clock::now();
        r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    r.report = solved.report;
    r.policy = std::move(solved.policy);

    BaselineSpec spec;
    spec.feasibility_rule = s.baseline_rule;
    spec.r_inst = s.baseline_r_inst;
    r.baseline = stage("baseline", [&] { return greedy_ergodic_policy(b.mdp, spec); });
    r.comparison = compare_policies(r.policy, r.baseline, b.mdp, b.settings);
    r.fsmc = std::move(b.fsmc);
    return r;
}

std::string csv_header() {
    return "scenario_hash,axis,axis_value,policy,reward,slack,inner_iterations,"
           "outer_iterations,wall_ms\n";
}

std::string csv_row(const Scenario& s, const std::string& axis, const std::string& axis_value,
                    const std::string& policy_name, double reward,
                    const Eigen::VectorXd& slack, std::int64_t inner_iters, int outer_iters,
                    double wall_ms) {
    std::ostringstream os;
    os << scenario_hash_hex(s) << "," << axis << "," << axis_value << "," << policy_name
       << "," << fmt_double(reward) << ",";
    for (Eigen::Index u = 0; u < slack.size(); ++u)
        os << (u ? ";" : "") << fmt_double(slack(u));
    os << "," << inner_iters << "," << outer_iters << "," << fmt_double(wall_ms) << "\n";
    return os.str();
}

std::string csv_failed_row(const Scenario& s, const std::string& axis,
                           const std::string& axis_value) {
    std::ostringstream os;
    os << scenario_hash_hex(s) << "," << axis << "," << axis_value << ",failed,,,0,0,0\n";
    return os.str();
}

SweepOutcome run_sweep(const Scenario& base, const SweepSpec& sweep, int threads) {
    SweepOutcome out;
    std::ostringstream csv;
    csv << csv_header();
    const std::string axis = to_string(sweep.axis);
    for (double value : sweep.values) {
        std::string axis_value = fmt_double(value);
        Scenario point = base;
        try {
            point = apply_axis(base, sweep.axis, value);
            RunResult r = run_solve(point, threads);
            csv << csv_row(point, axis, axis_value, "proposed", r.report.reward_value,
                           r.report.slack, r.report.inner_iterations,
                           r.report.outer_iterations, r.wall_ms);
            csv << csv_row(point, axis, axis_value, "ergodic", r.comparison.value_b,
                           r.comparison.slack_b, 0, 0, 0.0);
            if (r.report.status == SolveStatus::infeasible) out.any_infeasible = true;
            if (r.report.status == SolveStatus::non_converged) out.any_non_converged = true;
        } catch (const std::exception& e) {
            std::cerr << "sweep point " << axis << " = " << axis_value << " failed: "
                      << e.what() << "\n";
            csv << csv_failed_row(point, axis, axis_value);
            out.any_failed = true;
        }
    }
    out.csv = csv.str();
    return out;
}

std::string format_lookup_table(const Policy& policy, const StateCodec& codec,
                                const ActionCodec& actions, const PowerGrid& grid) {
    std::ostringstream os;
    os << "# eecmdp-table v1, states=" << codec.total_states << ", cells=" << codec.num_cells
       << ", uts=" << codec.num_uts << "\n";
    std::vector<int> bins, levels;
    for (std::int64_t s = 0; s < codec.total_states; ++s) {
        codec.decode(s, bins);
        std::int64_t a = policy.action_of_state[s];
        actions.decode(a, levels);
        os << s;
        for (int b : bins) os << "," << b;
        os << "," << a;
        for (int lv : levels) os << "," << format_power_mw(grid.levels[lv]);
        os << "\n";
    }
    return os.str();
}

void export_lookup_table(const Policy& policy, const StateCodec& codec,
                         const ActionCodec& actions, const PowerGrid& grid,
                         const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write lookup table '" + path + "'");
    out << format_lookup_table(policy, codec, actions, grid);
    if (!out) throw ConfigError("short write to lookup table '" + path + "'");
}

} // namespace eecmdp
