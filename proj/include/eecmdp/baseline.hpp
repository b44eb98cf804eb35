#pragma once

#include "eecmdp/mdp.hpp"
#include "eecmdp/scenario.hpp"
#include "eecmdp/solver.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace eecmdp {

struct BaselineSpec {
    FeasibilityRule feasibility_rule = FeasibilityRule::none;
    double r_inst = 0.0; // minimum per-slot rate (bits/s/Hz) under per_slot_rate
};

// Per-state exhaustive search: the reward-maximizing action among the
// feasible ones (lowest index on ties), evaluated exactly. Throws
// ConfigError listing the states when some state has no feasible
// action.
Policy greedy_ergodic_policy(const DiscountedMdp& mdp, const BaselineSpec& spec);

struct EnumerationResult {
    Policy best;
    double value = 0.0; // reward value at s0 of the best feasible policy
    bool feasible = false;
    std::int64_t policies_scanned = 0;
};

// Brute-force CMDP oracle: walks all |A|^|S| deterministic stationary
// policies, evaluates each exactly and keeps the best whose discounted
// costs meet r_min at s0 (ties by policy index). Refuses instances
// above `limit` policies. feasible=false reports the unconstrained
// best with the constraint unmet.
EnumerationResult enumerate_optimal_policy(const DiscountedMdp& mdp, const SolveSettings& st,
                                           std::int64_t limit = 1000000);

struct ComparisonRecord {
    double value_a = 0.0;          // reward value at s0
    double value_b = 0.0;
    double value_difference = 0.0; // value_a - value_b
    double agreement = 0.0;        // fraction of states with equal actions
    Eigen::VectorXd slack_a;       // per-UT cost - r_min
    Eigen::VectorXd slack_b;
};

ComparisonRecord compare_policies(const Policy& a, const Policy& b, const DiscountedMdp& mdp,
                                  const SolveSettings& st);

} // namespace eecmdp
