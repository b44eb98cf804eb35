#pragma once

#include "eecmdp/fsmc.hpp"
#include "eecmdp/scenario.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace eecmdp {

// Ascending transmit-power levels in watts.
struct PowerGrid {
    std::vector<double> levels;
    double min_power = 0.0;
    double max_power = 0.0;
    GridSpacing spacing = GridSpacing::logarithmic;

    int size() const { return static_cast<int>(levels.size()); }
};

PowerGrid make_power_grid(double min_power_w, double max_power_w, int num_levels,
                          GridSpacing spacing);

// The scenario's action grid: the [power_min, power_max] lattice with
// the levels above power_cap (when set) dropped, so grids at different
// caps share their surviving levels bit for bit.
PowerGrid scenario_power_grid(const Scenario& s);

// Composite action index <-> per-UT power level indices. UT (l, k)
// owns digit l*K + k; digit 0 is the least significant.
struct ActionCodec {
    int num_uts = 1;    // L*K
    int num_levels = 1; // Q_A
    std::int64_t total_actions = 1;

    ActionCodec() = default;
    ActionCodec(int uts, int levels);

    std::int64_t encode(const std::vector<int>& level_indices) const;
    void decode(std::int64_t action, std::vector<int>& level_indices) const;
    std::vector<int> decode(std::int64_t action) const;
};

// Per-UT transmit powers (watts, length L*K) of a composite action.
void action_powers(const ActionCodec& codec, const PowerGrid& grid, std::int64_t action,
                   Eigen::VectorXd& powers);

// One small-scale fading draw: channels[l*L + i] is the M x K matrix
// G_li from the UTs of cell i to BS l, column kappa scaled by
// sqrt(beta_{l,i,kappa}).
struct ChannelRealization {
    int num_cells = 0;
    int uts_per_cell = 0;
    int num_antennas = 0;
    double noise_variance = 0.0;
    std::vector<Eigen::MatrixXcd> channels;

    const Eigen::MatrixXcd& channel(int l, int i) const {
        return channels[static_cast<size_t>(l) * num_cells + i];
    }
};

ChannelRealization sample_channel(const Scenario& s, const NetworkGeometry& geo,
                                  std::mt19937_64& rng);

// A_l = G_ll (G_ll^H G_ll)^(-1), so A_l^H G_ll = I. Throws
// NumericalError with the condition number when the channel is
// (numerically) rank deficient.
Eigen::MatrixXcd zf_receiver(const Eigen::MatrixXcd& own_cell_channel);

// Post-receiver SINR of every UT of `cell`; powers is the flat per-UT
// transmit power vector (length L*K, UT (i, kappa) at i*K + kappa).
Eigen::VectorXd sinr(const Eigen::MatrixXcd& receiver, const ChannelRealization& real,
                     int cell, const Eigen::VectorXd& powers);

inline double instantaneous_rate(double gamma) { return std::log2(1.0 + gamma); }

// Sum over UTs of rate/(transmit + circuit power): bits per Joule at
// unit bandwidth. Throws std::domain_error when a UT's total power
// is not positive.
double ee_reward(const Eigen::VectorXd& gammas, const Eigen::VectorXd& powers,
                 double circuit_power_w);

// Reward plus per-UT rate-cost vector for one (state, action) cell.
struct RewardSample {
    double reward = 0.0;
    Eigen::VectorXd cost;     // length L*K, bits/s/Hz
    double reward_se = 0.0;   // Monte-Carlo standard error; 0 when exact
    double acceptance = 1.0;  // Monte-Carlo sampler acceptance rate
};

// Everything the per-cell reward evaluation needs; the referenced
// objects must outlive the model.
struct RewardModel {
    const Scenario* scenario = nullptr;
    const NetworkGeometry* geo = nullptr;
    const FsmcModel* fsmc = nullptr;
    PowerGrid grid;
    ActionCodec actions;
};

RewardModel make_reward_model(const Scenario& s, const NetworkGeometry& geo,
                              const FsmcModel& fsmc);

// Deterministic surrogate: each link contributes its bin's conditional
// mean gain; ZF nulls intra-cell interference exactly and enhances
// noise by 1/(M-K).
RewardSample representative_reward(const RewardModel& m, std::int64_t state,
                                   std::int64_t action);

// Exact-ZF Monte-Carlo average over `samples` channel draws whose
// per-link effective gains are rejection-conditioned into the bins of
// `state`. Throws NumericalError when the sampler acceptance falls
// below 1e-4.
RewardSample monte_carlo_reward(const RewardModel& m, std::int64_t state, std::int64_t action,
                                int samples, std::mt19937_64& rng);

} // namespace eecmdp
