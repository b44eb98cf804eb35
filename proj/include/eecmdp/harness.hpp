#pragma once

#include "eecmdp/baseline.hpp"
#include "eecmdp/fsmc.hpp"
#include "eecmdp/mdp.hpp"
#include "eecmdp/phy.hpp"
#include "eecmdp/scenario.hpp"
#include "eecmdp/solver.hpp"
#include "eecmdp/tables.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace eecmdp {

class ConfigFile;

enum class SweepAxis { discount, max_snr, bins_qs, actions_qa, antennas_m };

const char* to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

// One experiment axis; the base scenario supplies every fixed
// parameter. Parsed from the [sweep] section (axis = ..., values =
// comma-separated list).
struct SweepSpec {
    SweepAxis axis = SweepAxis::discount;
    std::vector<double> values;
};

SweepSpec sweep_from_config(const ConfigFile& cf);

// The base scenario with one axis value applied. max_snr sets
// power_cap_mw so the given dB value is the received SNR of a reference
// (geometric-mean desired-link) large-scale gain at the cap; the
// underlying lattice is untouched, so growing the cap only adds
// actions. Integer axes require integral values.
Scenario apply_axis(const Scenario& base, SweepAxis axis, double value);

// Solver inputs assembled from a scenario end to end.
struct ModelBundle {
    NetworkGeometry geometry;
    FsmcModel fsmc;
    RewardTables tables;
    DiscountedMdp mdp;
    SolveSettings settings;
};

// Builds geometry, channel model, reward tables (optionally through the
// binary cache at cache_path) and the solver-facing MDP.
ModelBundle build_model(const Scenario& s, int threads, const std::string& cache_path = "");

// One full run: solve_cmdp plus the exhaustive-search baseline.
struct RunResult {
    Scenario scenario;
    FsmcModel fsmc;
    SolveReport report;
    Policy policy;   // proposed CMDP policy
    Policy baseline; // ergodic exhaustive-search policy
    ComparisonRecord comparison;
    double wall_ms = 0.0; // stays 0 unless csv_timing = real
};

RunResult run_solve(const Scenario& s, int threads, const std::string& cache_path = "");

// CSV schema shared by solve and sweep outputs.
std::string csv_header();
std::string csv_row(const Scenario& s, const std::string& axis, const std::string& axis_value,
                    const std::string& policy_name, double reward,
                    const Eigen::VectorXd& slack, std::int64_t inner_iters, int outer_iters,
                    double wall_ms);
// Row for a sweep point that threw: the policy column carries the
// "failed" marker and the numeric columns stay empty.
std::string csv_failed_row(const Scenario& s, const std::string& axis,
                           const std::string& axis_value);

struct SweepOutcome {
    std::string csv;
    bool any_infeasible = false;
    bool any_non_converged = false;
    bool any_failed = false; // a point threw before producing a report
};

// Runs every sweep point in listed order (points are independent;
// failures mark their row and the sweep continues).
SweepOutcome run_sweep(const Scenario& base, const SweepSpec& sweep, int threads);

// Offline lookup table: `# eecmdp-table v1, states=<n>, cells=<L>,
// uts=<K>` then one row per state with its per-link bins, the chosen
// action and the per-UT transmit powers in mW.
std::string format_lookup_table(const Policy& policy, const StateCodec& codec,
                                const ActionCodec& actions, const PowerGrid& grid);
void export_lookup_table(const Policy& policy, const StateCodec& codec,
                         const ActionCodec& actions, const PowerGrid& grid,
                         const std::string& path);

} // namespace eecmdp
