#include "eecmdp/baseline.hpp"

#include "eecmdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace eecmdp {

namespace {

bool action_feasible(const DiscountedMdp& mdp, const BaselineSpec& spec, std::int64_t s,
                     std::int64_t a) {
    if (spec.feasibility_rule == FeasibilityRule::none) return true;
    for (const auto& c : mdp.costs)
        if (c(s, a) < spec.r_inst) return false;
    return true;
}

void fill_evaluations(Policy& p, const DiscountedMdp& mdp) {
    PolicyEvaluator evaluator(mdp);
    p.value = evaluator.evaluate(p.action_of_state, mdp.reward);
    p.cost_values.resize(mdp.costs.size());
    for (size_t u = 0; u < mdp.costs.size(); ++u)
        p.cost_values[u] = evaluator.evaluate(p.action_of_state, mdp.costs[u]);
}

} // namespace

Policy greedy_ergodic_policy(const DiscountedMdp& mdp, const BaselineSpec& spec) {
    validate_mdp(mdp);
    if (spec.r_inst < 0.0) throw ConfigError("baseline r_inst must be >= 0");
    Policy p;
    p.action_of_state.resize(mdp.num_states);
    std::vector<std::int64_t> starved;
    for (std::int64_t s = 0; s < mdp.num_states; ++s) {
        std::int64_t arg = -1;
        double best = 0.0;
        for (std::int64_t a = 0; a < mdp.num_actions; ++a) {
            if (!action_feasible(mdp, spec, s, a)) continue;
            if (arg < 0 || mdp.reward(s, a) > best) {
                best = mdp.reward(s, a);
                arg = a;
            }
        }
        if (arg < 0) {
            starved.push_back(s);
            arg = 0;
        }
        p.action_of_state[s] = arg;
    }
    if (!starved.empty()) {
        std::ostringstream os;
        os << "no action meets the per-slot rate " << spec.r_inst << " in "
           << starved.size() << " state(s):";
        size_t shown = std::min<size_t>(starved.size(), 16);
        for (size_t i = 0; i < shown; ++i) os << " " << starved[i];
        if (starved.size() > shown) os << " ...";
        throw ConfigError(os.str());
    }
    fill_evaluations(p, mdp);
    return p;
}

EnumerationResult enumerate_optimal_policy(const DiscountedMdp& mdp, const SolveSettings& st,
                                           std::int64_t limit) {
    validate_mdp(mdp);
    validate_settings(st, mdp.num_states);
    double total_log = mdp.num_states * std::log(static_cast<double>(mdp.num_actions));
    if (total_log > std::log(static_cast<double>(limit)) + 1e-12) {
        std::ostringstream os;
        os << "policy enumeration refused: " << mdp.num_actions << "^" << mdp.num_states
           << " deterministic policies exceed the limit " << limit;
        throw ConfigError(os.str());
    }

    double horizon_scale = st.normalize_by_horizon ? 1.0 - mdp.discount : 1.0;
    PolicyEvaluator evaluator(mdp);
    int U = static_cast<int>(mdp.costs.size());

    EnumerationResult out;
    std::vector<std::int64_t> actions(mdp.num_states, 0);
    double best_any = 0.0;
    bool have_any = false;
    std::vector<std::int64_t> best_feasible_actions, best_any_actions;

    for (;;) {
        ++out.policies_scanned;
        Eigen::VectorXd v = evaluator.evaluate(actions, mdp.reward);
        double value = read_off(st, v);
        bool ok = true;
        for (int u = 0; u < U && ok; ++u) {
            double c = horizon_scale * read_off(st, evaluator.evaluate(actions, mdp.costs[u]));
            if (c < st.r_min) ok = false;
        }
        if (!have_any || value > best_any) {
            best_any = value;
            best_any_actions = actions;
            have_any = true;
        }
        if (ok && (!out.feasible || value > out.value)) {
            out.value = value;
            out.feasible = true;
            best_feasible_actions = actions;
        }

        // next policy in mixed-radix order (state 0 is the fastest digit)
        std::int64_t s = 0;
        while (s < mdp.num_states && ++actions[s] == mdp.num_actions) actions[s++] = 0;
        if (s == mdp.num_states) break;
    }

    out.best.action_of_state = out.feasible ? best_feasible_actions : best_any_actions;
    if (!out.feasible) out.value = best_any;
    fill_evaluations(out.best, mdp);
    return out;
}

ComparisonRecord compare_policies(const Policy& a, const Policy& b, const DiscountedMdp& mdp,
                                  const SolveSettings& st) {
    if (a.action_of_state.size() != b.action_of_state.size() ||
        static_cast<std::int64_t>(a.action_of_state.size()) != mdp.num_states)
        throw std::invalid_argument("policies must cover the same state space");
    double horizon_scale = st.normalize_by_horizon ? 1.0 - mdp.discount : 1.0;
    PolicyEvaluator evaluator(mdp);
    int U = static_cast<int>(mdp.costs.size());

    ComparisonRecord rec;
    rec.value_a = read_off(st, evaluator.evaluate(a.action_of_state, mdp.reward));
    rec.value_b = read_off(st, evaluator.evaluate(b.action_of_state, mdp.reward));
    rec.value_difference = rec.value_a - rec.value_b;
    std::int64_t same = 0;
    for (std::int64_t s = 0; s < mdp.num_states; ++s)
        if (a.action_of_state[s] == b.action_of_state[s]) ++same;
    rec.agreement = static_cast<double>(same) / static_cast<double>(mdp.num_states);
    rec.slack_a.resize(U);
    rec.slack_b.resize(U);
    for (int u = 0; u < U; ++u) {
        rec.slack_a(u) =
            horizon_scale * read_off(st, evaluator.evaluate(a.action_of_state, mdp.costs[u])) -
            st.r_min;
        rec.slack_b(u) =
            horizon_scale * read_off(st, evaluator.evaluate(b.action_of_state, mdp.costs[u])) -
            st.r_min;
    }
    return rec;
}

} // namespace eecmdp
