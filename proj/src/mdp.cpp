#include "eecmdp/mdp.hpp"

#include "eecmdp/errors.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace eecmdp {

namespace {

void check_stochastic(const Eigen::MatrixXd& P) {
    if (P.rows() != P.cols()) throw std::invalid_argument("transition matrix must be square");
    for (Eigen::Index s = 0; s < P.rows(); ++s) {
        double sum = P.row(s).sum();
        if (std::abs(sum - 1.0) > 1e-10) {
            std::ostringstream os;
            os << "transition row " << s << " sums to " << sum << ", not 1";
            throw std::invalid_argument(os.str());
        }
        if (P.row(s).minCoeff() < -1e-14)
            throw std::invalid_argument("transition matrix has a negative entry");
    }
}

// r_pi(s) = table(s, pi(s))
Eigen::VectorXd policy_rewards(const std::vector<std::int64_t>& actions,
                               const Eigen::MatrixXd& table) {
    Eigen::VectorXd r(table.rows());
    for (Eigen::Index s = 0; s < table.rows(); ++s) {
        std::int64_t a = actions[s];
        if (a < 0 || a >= table.cols())
            throw std::domain_error("policy action index out of range");
        r(s) = table(s, a);
    }
    return r;
}

Eigen::MatrixXd policy_transition(const std::vector<std::int64_t>& actions,
                                  const DiscountedMdp& mdp) {
    if (!mdp.action_dependent()) return mdp.transition;
    Eigen::MatrixXd P(mdp.num_states, mdp.num_states);
    for (std::int64_t s = 0; s < mdp.num_states; ++s)
        P.row(s) = mdp.action_transitions[actions[s]].row(s);
    return P;
}

} // namespace

void validate_mdp(const DiscountedMdp& mdp) {
    if (mdp.num_states < 1 || mdp.num_actions < 1)
        throw std::invalid_argument("MDP needs at least one state and one action");
    if (!(mdp.discount > 0.0 && mdp.discount < 1.0))
        throw std::invalid_argument("discount must lie in (0, 1)");
    if (mdp.reward.rows() != mdp.num_states || mdp.reward.cols() != mdp.num_actions)
        throw std::invalid_argument("reward table shape does not match |S| x |A|");
    for (const auto& c : mdp.costs)
        if (c.rows() != mdp.num_states || c.cols() != mdp.num_actions)
            throw std::invalid_argument("cost table shape does not match |S| x |A|");
    if (mdp.action_dependent()) {
        if (static_cast<std::int64_t>(mdp.action_transitions.size()) != mdp.num_actions)
            throw std::invalid_argument("need one transition matrix per action");
        for (const auto& P : mdp.action_transitions) check_stochastic(P);
    } else {
        if (mdp.transition.rows() != mdp.num_states)
            throw std::invalid_argument("transition matrix shape does not match |S|");
        check_stochastic(mdp.transition);
    }
}

Eigen::MatrixXd lagrangian_table(const DiscountedMdp& mdp, const LagrangeMultipliers& m) {
    if (static_cast<size_t>(m.rho.size()) != mdp.costs.size())
        throw std::invalid_argument("multiplier count does not match cost-table count");
    if (m.rho.size() > 0 && m.rho.minCoeff() < 0.0)
        throw std::domain_error("Lagrange multipliers must be nonnegative");
    Eigen::MatrixXd table = mdp.reward;
    for (Eigen::Index u = 0; u < m.rho.size(); ++u) table += m.rho(u) * mdp.costs[u];
    return table;
}

ValueIterationResult value_iteration(const Eigen::MatrixXd& table, const DiscountedMdp& mdp,
                                     double epsilon, int max_iters,
                                     const Eigen::VectorXd* warm_start) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    std::int64_t S = mdp.num_states, A = mdp.num_actions;
    double lambda = mdp.discount;
    double threshold = epsilon * (1.0 - lambda) / lambda;

    Eigen::VectorXd v = warm_start ? *warm_start : Eigen::VectorXd::Zero(S);
    Eigen::VectorXd next(S);
    std::deque<double> trace;

    auto sweep = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out,
                     std::vector<std::int64_t>* greedy) {
        if (!mdp.action_dependent()) {
            Eigen::VectorXd w = lambda * (mdp.transition * in);
            for (std::int64_t s = 0; s < S; ++s) {
                double best = table(s, 0);
                std::int64_t arg = 0;
                for (std::int64_t a = 1; a < A; ++a)
                    if (table(s, a) > best) {
                        best = table(s, a);
                        arg = a;
                    }
                out(s) = best + w(s);
                if (greedy) (*greedy)[s] = arg;
            }
        } else {
            Eigen::MatrixXd w(S, A);
            for (std::int64_t a = 0; a < A; ++a)
                w.col(a) = lambda * (mdp.action_transitions[a] * in);
            for (std::int64_t s = 0; s < S; ++s) {
                double best = table(s, 0) + w(s, 0);
                std::int64_t arg = 0;
                for (std::int64_t a = 1; a < A; ++a) {
                    double q = table(s, a) + w(s, a);
                    if (q > best) {
                        best = q;
                        arg = a;
                    }
                }
                out(s) = best;
                if (greedy) (*greedy)[s] = arg;
            }
        }
    };

    for (int iter = 1; iter <= max_iters; ++iter) {
        sweep(v, next, nullptr);
        double residual = (next - v).lpNorm<Eigen::Infinity>();
        v = next;
        trace.push_back(residual);
        if (trace.size() > 8) trace.pop_front();
        if (residual < threshold) {
            ValueIterationResult out;
            out.value = v;
            out.iterations = iter;
            out.residual = residual;
            out.greedy.resize(S);
            sweep(v, next, &out.greedy); // greedy w.r.t. the returned value
            return out;
        }
    }
    std::ostringstream os;
    os << "value iteration did not reach residual " << threshold << " in " << max_iters
       << " sweeps; last residuals:";
    for (double r : trace) os << " " << r;
    throw ConvergenceError(os.str());
}

Eigen::VectorXd policy_evaluation(const std::vector<std::int64_t>& actions,
                                  const Eigen::MatrixXd& table, const DiscountedMdp& mdp,
                                  EvalMethod method) {
    if (static_cast<std::int64_t>(actions.size()) != mdp.num_states)
        throw std::domain_error("policy length does not match state count");
    Eigen::VectorXd r = policy_rewards(actions, table);
    double lambda = mdp.discount;

    if (method == EvalMethod::direct) {
        Eigen::MatrixXd P = policy_transition(actions, mdp);
        Eigen::MatrixXd A =
            Eigen::MatrixXd::Identity(mdp.num_states, mdp.num_states) - lambda * P;
        Eigen::VectorXd v = A.partialPivLu().solve(r);
        if (!v.allFinite())
            throw std::logic_error("policy evaluation solve produced non-finite values "
                                   "(I - lambda P should never be singular for lambda < 1)");
        return v;
    }

    // Fixed point iteration run to the double-precision floor: the
    // update contracts by lambda per sweep until rounding noise takes
    // over, so the iterate is returned once the residual is noise-level
    // small or has stopped shrinking. Either way it is as close to the
    // fixed point as the arithmetic allows, whatever the value scale.
    Eigen::MatrixXd P = policy_transition(actions, mdp);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.num_states);
    const int hard_cap = 100000000;
    int needed = static_cast<int>(std::ceil(std::log(1e-16) / std::log(lambda))) + 64;
    int max_iters = std::min(hard_cap, std::max(needed, 64));
    double prev_residual = std::numeric_limits<double>::infinity();
    for (int i = 0; i < max_iters; ++i) {
        Eigen::VectorXd next = r + lambda * (P * v);
        double residual = (next - v).lpNorm<Eigen::Infinity>();
        double scale = std::max(1.0, next.lpNorm<Eigen::Infinity>());
        v = next;
        if (residual < 4.0 * std::numeric_limits<double>::epsilon() * scale) return v;
        if (residual >= prev_residual) return v;
        prev_residual = residual;
    }
    throw ConvergenceError("iterative policy evaluation failed to reach its residual target");
}

PolicyEvaluator::PolicyEvaluator(const DiscountedMdp& mdp) : mdp_(&mdp) {
    if (!mdp.action_dependent()) {
        Eigen::MatrixXd A =
            Eigen::MatrixXd::Identity(mdp.num_states, mdp.num_states) -
            mdp.discount * mdp.transition;
        lu_.compute(A);
        shared_ = true;
    }
}

Eigen::VectorXd PolicyEvaluator::evaluate(const std::vector<std::int64_t>& actions,
                                          const Eigen::MatrixXd& table) const {
    if (!shared_) return policy_evaluation(actions, table, *mdp_, EvalMethod::direct);
    Eigen::VectorXd r = policy_rewards(actions, table);
    Eigen::VectorXd v = lu_.solve(r);
    if (!v.allFinite())
        throw std::logic_error("policy evaluation solve produced non-finite values");
    return v;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
    check_stochastic(transition);
    Eigen::Index n = transition.rows();
    // (P^T - I) pi = 0 with sum(pi) = 1: replace the last balance row by
    // the normalization and solve the square system.
    Eigen::MatrixXd A = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd pi = A.fullPivLu().solve(b);
    if (!pi.allFinite()) throw NumericalError("stationary distribution solve failed");
    return pi;
}

} // namespace eecmdp
