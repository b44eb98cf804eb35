#include "eecmdp/solver.hpp"

#include "eecmdp/errors.hpp"
#include "eecmdp/format.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eecmdp {

void validate_settings(const SolveSettings& st, std::int64_t num_states) {
    if (!(st.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(st.rho_init >= 0.0)) throw std::invalid_argument("rho_init must be >= 0");
    if (st.max_inner_iters < 1 || st.max_outer_iters < 1)
        throw std::invalid_argument("iteration budgets must be positive");
    if (!(st.rho_ceiling > 0.0)) throw std::invalid_argument("rho_ceiling must be positive");
    if (st.initial_state) {
        if (*st.initial_state < 0 || *st.initial_state >= num_states)
            throw std::domain_error("initial state index out of range");
    } else {
        if (st.initial_distribution.size() != num_states)
            throw std::invalid_argument(
                "steady_average read-off needs an initial distribution over all states");
        if (std::abs(st.initial_distribution.sum() - 1.0) > 1e-8)
            throw std::invalid_argument("initial distribution must sum to 1");
    }
}

double read_off(const SolveSettings& st, const Eigen::VectorXd& v) {
    if (st.initial_state) {
        if (*st.initial_state < 0 || *st.initial_state >= v.size())
            throw std::domain_error("initial state index out of range");
        return v(*st.initial_state);
    }
    return st.initial_distribution.dot(v);
}

double constraint_cost(const Policy& policy, const DiscountedMdp& mdp, int u,
                       const SolveSettings& st) {
    if (u < 0 || u >= static_cast<int>(mdp.costs.size()))
        throw std::domain_error("constraint index out of range");
    Eigen::VectorXd c =
        policy_evaluation(policy.action_of_state, mdp.costs[u], mdp, EvalMethod::direct);
    return read_off(st, c);
}

LagrangeMultipliers multiplier_update(const LagrangeMultipliers& m,
                                      const Eigen::VectorXd& costs, double r_min,
                                      int step_index) {
    if (step_index < 1)
        throw std::domain_error("multiplier update steps are 1-indexed; got step 0");
    if (costs.size() != m.rho.size())
        throw std::invalid_argument("cost count does not match multiplier count");
    LagrangeMultipliers out;
    out.iteration = step_index;
    out.rho = (m.rho.array() + (r_min - costs.array()) / step_index).cwiseMax(0.0).matrix();
    return out;
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::non_converged: return "non_converged";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

std::string SolveReport::to_text() const {
    std::ostringstream os;
    os << "status = " << to_string(status) << "\n";
    os << "outer_iterations = " << outer_iterations << "\n";
    os << "inner_iterations = " << inner_iterations << "\n";
    os << "reward_value = " << fmt_double(reward_value) << "\n";
    os << "lagrangian_value = " << fmt_double(lagrangian_value) << "\n";
    os << "r_min = " << fmt_double(r_min) << "\n";
    os << "epsilon = " << fmt_double(epsilon) << "\n";
    os << "final_rho_delta = " << fmt_double(final_rho_delta) << "\n";
    os << "final_residual = " << fmt_double(final_residual) << "\n";
    for (Eigen::Index u = 0; u < rho.size(); ++u)
        os << "rho_" << u << " = " << fmt_double(rho(u)) << "\n";
    for (Eigen::Index u = 0; u < cost.size(); ++u)
        os << "cost_" << u << " = " << fmt_double(cost(u)) << "\n";
    for (Eigen::Index u = 0; u < slack.size(); ++u)
        os << "slack_" << u << " = " << fmt_double(slack(u)) << "\n";
    if (!diagnostic.empty()) os << "diagnostic = " << diagnostic << "\n";
    return os.str();
}

SolveResult solve_cmdp(const DiscountedMdp& mdp, const SolveSettings& st) {
    validate_mdp(mdp);
    validate_settings(st, mdp.num_states);
    int U = static_cast<int>(mdp.costs.size());
    double horizon_scale = st.normalize_by_horizon ? 1.0 - mdp.discount : 1.0;
    PolicyEvaluator evaluator(mdp);

    LagrangeMultipliers rho;
    rho.rho = Eigen::VectorXd::Constant(U, st.rho_init);
    rho.iteration = 0;

    SolveReport report;
    report.r_min = st.r_min;
    report.epsilon = st.epsilon;

    Eigen::VectorXd warm;
    bool have_warm = false;
    SolveStatus status = SolveStatus::non_converged;
    std::string diagnostic;
    int outer = 0;

    // Outer multiplier iteration; the loop leaves `rho` at the iterate
    // the final policy should be computed at.
    for (int j = 1; j <= st.max_outer_iters; ++j) {
        outer = j;
        Eigen::MatrixXd table = lagrangian_table(mdp, rho);
        ValueIterationResult vi =
            value_iteration(table, mdp, st.epsilon, st.max_inner_iters,
                            have_warm && !st.strict_restart ? &warm : nullptr);
        report.inner_iterations += vi.iterations;
        report.final_residual = vi.residual;
        warm = vi.value;
        have_warm = true;

        Eigen::VectorXd costs(U);
        for (int u = 0; u < U; ++u)
            costs(u) = horizon_scale *
                       read_off(st, evaluator.evaluate(vi.greedy, mdp.costs[u]));

        LagrangeMultipliers next = multiplier_update(rho, costs, st.r_min, j);
        double delta = U == 0 ? 0.0 : (next.rho - rho.rho).lpNorm<Eigen::Infinity>();
        report.final_rho_delta = delta;
        if (delta < st.epsilon) {
            status = SolveStatus::converged; // rho* is the pre-update iterate
            break;
        }
        if (next.rho.maxCoeff() > st.rho_ceiling) {
            Eigen::Index worst;
            next.rho.maxCoeff(&worst);
            std::ostringstream os;
            os << "multiplier " << worst << " grew past the ceiling " << st.rho_ceiling
               << " while constraint " << worst << " stayed violated (cost "
               << costs(worst) << " < r_min " << st.r_min
               << "); the rate requirement looks infeasible";
            diagnostic = os.str();
            status = SolveStatus::infeasible;
            rho = next;
            break;
        }
        rho = next;
        if (j == st.max_outer_iters) {
            std::ostringstream os;
            os << "multiplier iteration still moving " << delta << " (>= epsilon "
               << st.epsilon << ") after " << st.max_outer_iters
               << " outer steps; returning the last iterate";
            diagnostic = os.str();
            status = SolveStatus::non_converged;
        }
    }

    // Recompute the policy at rho* and evaluate it exactly.
    Eigen::MatrixXd table = lagrangian_table(mdp, rho);
    ValueIterationResult fin =
        value_iteration(table, mdp, st.epsilon, st.max_inner_iters,
                        have_warm && !st.strict_restart ? &warm : nullptr);
    report.inner_iterations += fin.iterations;
    report.final_residual = fin.residual;

    SolveResult result;
    result.policy.action_of_state = fin.greedy;
    result.policy.value = evaluator.evaluate(fin.greedy, mdp.reward);
    result.policy.cost_values.resize(U);
    result.multipliers = rho;

    report.status = status;
    report.outer_iterations = outer;
    report.lagrangian_value = read_off(st, fin.value);
    report.reward_value = read_off(st, result.policy.value);
    report.rho = rho.rho;
    report.cost.resize(U);
    report.slack.resize(U);
    for (int u = 0; u < U; ++u) {
        result.policy.cost_values[u] = evaluator.evaluate(fin.greedy, mdp.costs[u]);
        report.cost(u) = horizon_scale * read_off(st, result.policy.cost_values[u]);
        report.slack(u) = report.cost(u) - st.r_min;
    }
    if (status == SolveStatus::converged && U > 0 &&
        report.slack.minCoeff() < -st.feasibility_tol) {
        Eigen::Index worst;
        report.slack.minCoeff(&worst);
        std::ostringstream os;
        os << "multipliers converged but constraint " << worst << " is violated by "
           << -report.slack(worst) << " (> feasibility_tol " << st.feasibility_tol
           << "); the rate requirement looks infeasible";
        report.status = SolveStatus::infeasible;
        diagnostic = os.str();
    }
    report.diagnostic = diagnostic;
    result.report = std::move(report);
    return result;
}

} // namespace eecmdp
