#pragma once

#include "eecmdp/phy.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eecmdp {

// Dense per-(state, action) reward and per-UT rate tables feeding the
// solver and the exported lookup table.
struct RewardTables {
    std::int64_t num_states = 0;
    std::int64_t num_actions = 0;
    int num_uts = 0;
    RewardMode mode = RewardMode::representative;
    int mc_samples = 0; // only meaningful in monte_carlo mode
    Eigen::MatrixXd reward;            // |S| x |A|
    std::vector<Eigen::MatrixXd> cost; // one |S| x |A| matrix per UT
};

// Fills the tables in the selected mode. Monte-Carlo cells draw from
// streams derived from (seed, state, action), so any worker count
// produces identical tables. threads = 0 uses the hardware count.
RewardTables build_reward_tables(const RewardModel& m, RewardMode mode, int mc_samples,
                                 int threads = 0);

// Binary cache so repeated CLI runs skip the table build. Layout:
// magic "EECMDP01", scenario hash, dimensions, then the little-endian
// double arrays.
void save_tables(const RewardTables& t, const std::string& path, std::uint64_t scenario_hash);

// Returns the cached tables when the file exists and its hash,
// dimensions and mode match; otherwise std::nullopt (rebuild).
std::optional<RewardTables> try_load_tables(const std::string& path,
                                            std::uint64_t scenario_hash, RewardMode mode,
                                            int mc_samples);

} // namespace eecmdp
