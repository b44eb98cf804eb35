#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace eecmdp {

// Discounted MDP with an action-independent transition matrix (the
// channel chain does not react to power choices). Tests may populate
// action_transitions to exercise the generic action-dependent paths;
// when non-empty it overrides `transition`.
struct DiscountedMdp {
    std::int64_t num_states = 0;
    std::int64_t num_actions = 0;
    Eigen::MatrixXd transition;        // |S| x |S|, rows sum to 1
    Eigen::MatrixXd reward;            // |S| x |A|
    std::vector<Eigen::MatrixXd> costs; // per constrained UT, |S| x |A|
    double discount = 0.9;
    std::vector<Eigen::MatrixXd> action_transitions; // optional, |A| entries

    bool action_dependent() const { return !action_transitions.empty(); }
    const Eigen::MatrixXd& transition_for(std::int64_t action) const {
        return action_dependent() ? action_transitions[action] : transition;
    }
};

// Dimension and stochasticity checks (rows sum to 1 within 1e-10,
// discount in (0,1)); throws std::invalid_argument.
void validate_mdp(const DiscountedMdp& mdp);

// Deterministic stationary policy with its exact reward value and
// per-UT cost values.
struct Policy {
    std::vector<std::int64_t> action_of_state;
    Eigen::VectorXd value;
    std::vector<Eigen::VectorXd> cost_values;
};

struct LagrangeMultipliers {
    Eigen::VectorXd rho; // one component per constrained UT, >= 0
    int iteration = 0;   // outer step j' that produced this iterate
};

// L(s,a) = R(s,a) + sum_u rho_u * C_u(s,a).
Eigen::MatrixXd lagrangian_table(const DiscountedMdp& mdp, const LagrangeMultipliers& m);

struct ValueIterationResult {
    Eigen::VectorXd value;
    std::vector<std::int64_t> greedy; // lowest-index tie-breaking
    int iterations = 0;
    double residual = 0.0;
};

// Value iteration on an arbitrary |S| x |A| table over the MDP's
// transitions, stopping at sup-norm residual < epsilon(1-lambda)/lambda
// so the returned value is within epsilon of the fixed point. Starts
// from zero unless warm_start is given. Throws ConvergenceError with a
// residual trace when max_iters is exhausted.
ValueIterationResult value_iteration(const Eigen::MatrixXd& table, const DiscountedMdp& mdp,
                                     double epsilon, int max_iters,
                                     const Eigen::VectorXd* warm_start = nullptr);

enum class EvalMethod { direct, iterative };

// Solves v = r_pi + lambda P_pi v for the deterministic policy given by
// `actions` over an arbitrary table: direct linear solve or fixed-point
// iteration run down to the double-precision rounding floor.
Eigen::VectorXd policy_evaluation(const std::vector<std::int64_t>& actions,
                                  const Eigen::MatrixXd& table, const DiscountedMdp& mdp,
                                  EvalMethod method = EvalMethod::direct);

// Exact policy evaluation with the (I - lambda P) factorization cached:
// with action-independent transitions every policy and table shares one
// LU. Falls back to per-policy solves on action-dependent test MDPs.
class PolicyEvaluator {
  public:
    explicit PolicyEvaluator(const DiscountedMdp& mdp);

    Eigen::VectorXd evaluate(const std::vector<std::int64_t>& actions,
                             const Eigen::MatrixXd& table) const;

  private:
    const DiscountedMdp* mdp_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_; // of I - lambda P, shared path only
    bool shared_ = false;
};

// Stationary distribution of a row-stochastic matrix (direct solve of
// the balance equations with the normalization row).
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

} // namespace eecmdp
