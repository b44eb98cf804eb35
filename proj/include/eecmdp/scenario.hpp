#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace eecmdp {

enum class GridSpacing { logarithmic, linear };
enum class RewardMode { representative, monte_carlo };
enum class CsvTiming { none, real };

// Feasible-action rule of the exhaustive-search baseline policy.
enum class FeasibilityRule { none, per_slot_rate };

struct GeometrySpec {
    double bs_spacing_m = 1000.0;
    double cell_radius_m = 500.0;
    double min_ut_distance_m = 35.0;
};

// Every physical and algorithmic parameter of a run. Defaults are the
// simulation parameters of the evaluated system: two cells, one single
// antenna UT per cell, 128 BS antennas, path loss exponent 3.7,
// log-normal shadowing with 10 dB^2 variance, -101 dBm noise, 10 mW
// circuit power per UT, transmit power 1e-2..1e2 mW over 20 levels,
// 4 channel bins per link and discount 0.9.
struct Scenario {
    // system
    int num_cells = 2;     // L
    int uts_per_cell = 1;  // K
    int num_antennas = 128;

    // channel
    double pathloss_exponent = 3.7;
    double pathloss_constant = 1.0;
    double shadow_variance_db = 10.0; // variance of 10*log10(shadow), dB^2
    double noise_dbm = -101.0;
    int bins = 4; // Q_S per link
    // Interior quantization thresholds in units of the per-link mean
    // gain; empty selects the equiprobable construction. When set,
    // bins = size() + 1.
    std::vector<double> threshold_grid;
    double normalized_doppler = 0.05;

    // power
    double power_min_mw = 1e-2;
    double power_max_mw = 1e2;
    int power_levels = 20; // Q_A
    GridSpacing power_spacing = GridSpacing::logarithmic;
    double circuit_power_mw = 10.0; // p_lc
    // Optional transmit-power ceiling (0 = none). The action grid keeps
    // the [power_min, power_max] lattice and drops the levels above the
    // cap, so raising the cap only ever adds actions.
    double power_cap_mw = 0.0;

    // solver
    double discount = 0.9;
    double r_min = 0.0;
    double epsilon = 1e-4;
    double rho_init = 10.0;
    int max_inner_iters = 200000;
    int max_outer_iters = 2000;
    bool strict_restart = false;       // restart value iteration from zero each outer step
    bool normalize_by_horizon = false; // compare (1-lambda)*cost against r_min
    double rho_ceiling = 1e6;
    double feasibility_tol = 1e-6;
    // Designated initial state; empty means average the value and cost
    // vectors under the stationary distribution of the channel chain.
    std::optional<std::int64_t> initial_state;

    // baseline
    FeasibilityRule baseline_rule = FeasibilityRule::none;
    double baseline_r_inst = 0.0; // per-slot rate floor under per_slot_rate

    // run
    std::uint64_t seed = 1;
    RewardMode reward_mode = RewardMode::representative;
    int mc_samples = 1000;
    double memory_budget_mb = 512.0;
    CsvTiming csv_timing = CsvTiming::none;

    GeometrySpec geometry;

    double noise_variance_w() const;
    bool has_power_cap() const { return power_cap_mw > 0.0; }
    double power_min_w() const { return power_min_mw * 1e-3; }
    double power_max_w() const { return power_max_mw * 1e-3; }
    double circuit_power_w() const { return circuit_power_mw * 1e-3; }
    int num_links() const { return num_cells * num_cells * uts_per_cell * uts_per_cell; }
    int num_uts_total() const { return num_cells * uts_per_cell; }
    std::int64_t num_states() const; // bins^(L^2 K^2), overflow-checked
    // power_levels^(L K) over the full lattice, overflow-checked; a
    // power cap can only shrink the effective count below this bound.
    std::int64_t num_actions() const;

    // Estimated resident bytes of the dense model (transition matrix,
    // reward table, one cost table per UT).
    double model_bytes() const;
};

// Parses the flat `key = value` config with [section] headers. Unknown
// keys and malformed lines are rejected with the offending line number;
// an empty file yields all defaults. Throws ConfigError.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(std::istream& in, const std::string& origin);

// Consumes the scenario keys out of an already-read config without the
// unknown-key sweep, so callers (sweeps) can claim their own sections
// first and reject leftovers once.
class ConfigFile;
Scenario scenario_from_config(const ConfigFile& cf);

// Validation applied after parsing (and to programmatically built
// scenarios). Throws ConfigError naming the field. Prints a warning to
// stderr when M <= K*L.
void validate_scenario(const Scenario& s);

// Canonical effective-config text. parse(dump(s)) == s, and the scenario
// hash is FNV-1a over this text.
std::string dump_scenario(const Scenario& s);
std::uint64_t scenario_hash(const Scenario& s);
std::string scenario_hash_hex(const Scenario& s);

bool operator==(const Scenario& a, const Scenario& b);

} // namespace eecmdp
