#pragma once

#include "eecmdp/mdp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eecmdp {

// Knobs of the Lagrangian solve. When initial_state is empty, values
// and constraint costs are read off as the average under
// initial_distribution (the channel's stationary vector).
struct SolveSettings {
    double epsilon = 1e-4;
    double rho_init = 10.0;
    int max_inner_iters = 200000;
    int max_outer_iters = 2000;
    double r_min = 0.0;
    std::optional<std::int64_t> initial_state;
    Eigen::VectorXd initial_distribution;
    bool strict_restart = false;       // re-run every inner solve from v = 0
    bool normalize_by_horizon = false; // constrain (1-lambda)*c instead of c
    double rho_ceiling = 1e6;
    double feasibility_tol = 1e-6;
};

void validate_settings(const SolveSettings& st, std::int64_t num_states);

// v(s0), or the initial-distribution average when no s0 is designated.
double read_off(const SolveSettings& st, const Eigen::VectorXd& v);

// Discounted total cost of UT u under the policy, read off at the
// initial state; the raw Bellman quantity, never horizon-normalized.
double constraint_cost(const Policy& policy, const DiscountedMdp& mdp, int u,
                       const SolveSettings& st);

// One projected diminishing-step update of every multiplier:
// rho_u <- max(0, rho_u + (1/step_index) (r_min - c_u)). step_index is
// 1-based; 0 is a domain error.
LagrangeMultipliers multiplier_update(const LagrangeMultipliers& m,
                                      const Eigen::VectorXd& costs, double r_min,
                                      int step_index);

enum class SolveStatus { converged, non_converged, infeasible };

const char* to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::converged;
    int outer_iterations = 0;
    std::int64_t inner_iterations = 0;
    double reward_value = 0.0;     // expected discounted total reward at s0
    double lagrangian_value = 0.0; // value of the final inner solve at s0
    double r_min = 0.0;
    double epsilon = 0.0;
    double final_rho_delta = 0.0;  // multiplier movement at the stop
    double final_residual = 0.0;   // last inner-sweep residual
    Eigen::VectorXd rho;           // the multipliers the policy was computed at
    Eigen::VectorXd cost;          // per-UT discounted total rate at s0
    Eigen::VectorXd slack;         // cost - r_min (after optional normalization)
    std::string diagnostic;        // non-empty for infeasible/non_converged

    // `key = value` lines, one per field, vectors indexed by UT.
    std::string to_text() const;
};

struct SolveResult {
    Policy policy;
    LagrangeMultipliers multipliers; // rho*
    SolveReport report;
};

// Alternates inner value iteration on the Lagrangian table with outer
// multiplier updates until the multiplier movement drops below epsilon,
// then recomputes the policy at rho*. Outer-budget exhaustion returns
// the best iterate flagged non_converged; a multiplier escaping past
// rho_ceiling, or converged multipliers with a violated constraint,
// yields an infeasibility diagnosis.
SolveResult solve_cmdp(const DiscountedMdp& mdp, const SolveSettings& st);

} // namespace eecmdp
