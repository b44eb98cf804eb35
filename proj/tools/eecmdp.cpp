// Command-line front end: solve a configured scenario, sweep an axis,
// export the offline lookup table, validate a config, or run the
// built-in oracle self-tests.
#include "eecmdp/config.hpp"
#include "eecmdp/errors.hpp"
#include "eecmdp/format.hpp"
#include "eecmdp/harness.hpp"
#include "eecmdp/rng.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

namespace {

using namespace eecmdp;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNonConverged = 4;

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<int> mc_samples;
    int threads = 0;
};

void apply_overrides(Scenario& s, const CliOverrides& ov) {
    if (ov.seed) s.seed = *ov.seed;
    if (ov.mode) {
        if (*ov.mode == "representative")
            s.reward_mode = RewardMode::representative;
        else if (*ov.mode == "monte-carlo" || *ov.mode == "monte_carlo")
            s.reward_mode = RewardMode::monte_carlo;
        else
            throw ConfigError("--mode must be 'representative' or 'monte-carlo'");
    }
    if (ov.mc_samples) s.mc_samples = *ov.mc_samples;
    validate_scenario(s);
}

Scenario scenario_from_file(const std::string& path, const CliOverrides& ov,
                            SweepSpec* sweep) {
    ConfigFile cf = ConfigFile::read_file(path);
    Scenario s = scenario_from_config(cf);
    if (sweep) {
        *sweep = sweep_from_config(cf);
    } else if (cf.has_section("sweep")) {
        sweep_from_config(cf); // same file can drive `sweep`; parse and drop
    }
    cf.reject_unconsumed();
    validate_scenario(s);
    apply_overrides(s, ov);
    return s;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ConfigError("short write to '" + path + "'");
}

int status_exit_code(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return kExitOk;
        case SolveStatus::infeasible: return kExitInfeasible;
        case SolveStatus::non_converged: return kExitNonConverged;
    }
    return kExitNonConverged;
}

int cmd_solve(const std::string& config, const std::string& out_dir,
              const CliOverrides& ov) {
    Scenario s = scenario_from_file(config, ov, nullptr);
    std::filesystem::create_directories(out_dir);
    std::string cache = out_dir + "/tables.cache";
    RunResult r = run_solve(s, ov.threads, cache);

    std::string report = "scenario_hash = " + scenario_hash_hex(s) + "\n" +
                         r.report.to_text() +
                         "baseline_value = " + fmt_double(r.comparison.value_b) + "\n" +
                         "baseline_agreement = " + fmt_double(r.comparison.agreement) + "\n";
    write_text(out_dir + "/report.txt", report);
    write_text(out_dir + "/effective_config.ini", dump_scenario(s));

    std::string csv = csv_header();
    csv += csv_row(s, "none", "", "proposed", r.report.reward_value, r.report.slack,
                   r.report.inner_iterations, r.report.outer_iterations, r.wall_ms);
    csv += csv_row(s, "none", "", "ergodic", r.comparison.value_b, r.comparison.slack_b, 0,
                   0, 0.0);
    write_text(out_dir + "/solve.csv", csv);

    PowerGrid grid = scenario_power_grid(s);
    ActionCodec actions(s.num_uts_total(), static_cast<int>(grid.levels.size()));
    export_lookup_table(r.policy, r.fsmc.codec, actions, grid,
                        out_dir + "/lookup_table.txt");

    std::cout << report;
    std::cout << "wrote " << out_dir << "/report.txt, solve.csv, lookup_table.txt\n";
    return status_exit_code(r.report.status);
}

int cmd_sweep(const std::string& config, const std::string& out_dir,
              const CliOverrides& ov) {
    SweepSpec sweep;
    Scenario s = scenario_from_file(config, ov, &sweep);
    std::filesystem::create_directories(out_dir);
    SweepOutcome outcome = run_sweep(s, sweep, ov.threads);
    write_text(out_dir + "/sweep.csv", outcome.csv);
    std::cout << "wrote " << out_dir << "/sweep.csv (" << sweep.values.size()
              << " points on axis " << to_string(sweep.axis) << ")\n";
    if (outcome.any_failed) return kExitNonConverged;
    if (outcome.any_infeasible) return kExitInfeasible;
    if (outcome.any_non_converged) return kExitNonConverged;
    return kExitOk;
}

int cmd_export_table(const std::string& config, const std::string& out_dir,
                     const CliOverrides& ov) {
    Scenario s = scenario_from_file(config, ov, nullptr);
    std::filesystem::create_directories(out_dir);
    std::string cache = out_dir + "/tables.cache";
    RunResult r = run_solve(s, ov.threads, cache);
    if (r.report.status != SolveStatus::converged) {
        std::cerr << "refusing to export: solve status is "
                  << to_string(r.report.status) << "\n"
                  << (r.report.diagnostic.empty() ? "" : r.report.diagnostic + "\n");
        return status_exit_code(r.report.status);
    }
    PowerGrid grid = scenario_power_grid(s);
    ActionCodec actions(s.num_uts_total(), static_cast<int>(grid.levels.size()));
    std::string path = out_dir + "/lookup_table.txt";
    export_lookup_table(r.policy, r.fsmc.codec, actions, grid, path);
    std::cout << "wrote " << path << " (" << r.fsmc.codec.total_states << " states)\n";
    return kExitOk;
}

int cmd_validate(const std::string& config, const CliOverrides& ov) {
    ConfigFile cf = ConfigFile::read_file(config);
    Scenario s = scenario_from_config(cf);
    if (cf.has_section("sweep")) {
        SweepSpec sweep = sweep_from_config(cf);
        std::cout << "sweep axis " << to_string(sweep.axis) << " with "
                  << sweep.values.size() << " values\n";
    }
    cf.reject_unconsumed();
    validate_scenario(s);
    apply_overrides(s, ov);
    std::cout << dump_scenario(s);
    std::cout << "scenario_hash = " << scenario_hash_hex(s) << "\n";
    PowerGrid grid = scenario_power_grid(s);
    ActionCodec actions(s.num_uts_total(), grid.size());
    std::cout << "states = " << s.num_states() << ", actions = " << actions.total_actions;
    if (s.has_power_cap())
        std::cout << " (" << grid.size() << " of " << s.power_levels
                  << " power levels under the cap)";
    std::cout << "\n";
    return kExitOk;
}

// ---- selftest: condensed oracle suite ------------------------------

int checks_failed = 0;

void check(bool ok, const std::string& name) {
    std::cout << (ok ? "ok - " : "FAIL - ") << name << "\n";
    if (!ok) ++checks_failed;
}

void selftest_fsmc() {
    std::mt19937_64 rng(12345);
    bool rows_ok = true, stat_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        int qs = 2 + static_cast<int>(rng() % 5);
        double psi0 = std::exp(unit_uniform(rng) * 6.0 - 3.0);
        LinkQuantizer q = equiprobable_thresholds(psi0, qs);
        double fc = 0.8 * max_admissible_doppler(q);
        LinkTransitionMatrix m = link_transition_matrix(q, fc);
        for (int b = 0; b < qs; ++b)
            if (std::abs(m.probs.row(b).sum() - 1.0) > 1e-12) rows_ok = false;
        Eigen::VectorXd pi = stationary_distribution(m.probs);
        for (int b = 0; b < qs; ++b)
            if (std::abs(pi(b) - q.steady[b]) > 1e-10) stat_ok = false;
    }
    check(rows_ok, "link transition rows sum to 1");
    check(stat_ok, "link stationary distribution matches the steady vector");

    StateCodec codec(2, 1, 3);
    bool codec_ok = true;
    for (std::int64_t s = 0; s < codec.total_states; ++s)
        if (codec.encode(codec.decode(s)) != s) codec_ok = false;
    check(codec_ok, "state codec round-trips");
}

DiscountedMdp random_instance(std::mt19937_64& rng, int S, int A) {
    DiscountedMdp mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.discount = 0.9;
    mdp.transition.resize(S, S);
    for (int s = 0; s < S; ++s) {
        Eigen::VectorXd row(S);
        for (int t = 0; t < S; ++t) row(t) = unit_uniform(rng) + 1e-3;
        mdp.transition.row(s) = row / row.sum();
    }
    mdp.reward.resize(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) mdp.reward(s, a) = unit_uniform(rng);
    return mdp;
}

void selftest_solver() {
    std::mt19937_64 rng(99);
    bool vi_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        int S = 2 + static_cast<int>(rng() % 4);
        int A = 2 + static_cast<int>(rng() % 2);
        DiscountedMdp mdp = random_instance(rng, S, A);
        SolveSettings st;
        st.initial_state = 0;
        ValueIterationResult vi = value_iteration(mdp.reward, mdp, 1e-4, 100000);
        EnumerationResult best = enumerate_optimal_policy(mdp, st);
        PolicyEvaluator ev(mdp);
        double vi_value = ev.evaluate(vi.greedy, mdp.reward)(0);
        if (std::abs(vi_value - best.value) > 1e-4) vi_ok = false;
    }
    check(vi_ok, "value iteration matches exhaustive policy enumeration");
}

void selftest_determinism() {
    Scenario s;
    s.num_cells = 2;
    s.uts_per_cell = 1;
    s.num_antennas = 8;
    s.bins = 2;
    s.power_levels = 4;
    s.seed = 7;
    validate_scenario(s);
    RunResult a = run_solve(s, 1);
    RunResult b = run_solve(s, 4);
    bool same_policy = a.policy.action_of_state == b.policy.action_of_state;
    bool same_report = a.report.to_text() == b.report.to_text();
    check(same_policy && same_report,
          "identical seed reproduces the solve for any worker count");
}

int cmd_selftest() {
    selftest_fsmc();
    selftest_solver();
    selftest_determinism();
    if (checks_failed) {
        std::cout << checks_failed << " check(s) failed\n";
        return 1;
    }
    std::cout << "all checks passed\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline CMDP power allocation for multi-cell massive MIMO uplink"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    CliOverrides ov;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", config_path, "scenario config file");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory (default .)");
        cmd->add_option("--seed", ov.seed, "override the scenario seed");
        cmd->add_option("--mode", ov.mode,
                        "reward mode override: representative or monte-carlo");
        cmd->add_option("--mc-samples", ov.mc_samples,
                        "Monte-Carlo samples per (state, action) cell");
        cmd->add_option("--threads", ov.threads, "worker threads (0 = hardware)");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one scenario end to end");
    add_common(solve, true);
    CLI::App* sweep = app.add_subcommand("sweep", "run the [sweep] axis of the config");
    add_common(sweep, true);
    CLI::App* exportt = app.add_subcommand("export-table", "solve and export the lookup table");
    add_common(exportt, true);
    CLI::App* validate = app.add_subcommand("validate-config",
                                            "parse, validate and echo the effective config");
    add_common(validate, true);
    CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle suite");
    add_common(selftest, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(config_path, out_dir, ov);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, ov);
        if (exportt->parsed()) return cmd_export_table(config_path, out_dir, ov);
        if (validate->parsed()) return cmd_validate(config_path, ov);
        if (selftest->parsed()) return cmd_selftest();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return kExitNonConverged;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNonConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
