#include "eecmdp/baseline.hpp"
#include "eecmdp/errors.hpp"
#include "eecmdp/mdp.hpp"
#include "eecmdp/rng.hpp"
#include "eecmdp/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

using namespace eecmdp;

namespace {

// Shared action-independent transitions, like the channel chain.
DiscountedMdp random_mdp(std::uint64_t seed, int S, int A, int U) {
    auto rng = make_rng(seed, stream::rollout, S, A);
    DiscountedMdp mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.discount = 0.9;
    mdp.transition.resize(S, S);
    for (int i = 0; i < S; ++i) {
        double row = 0.0;
        for (int j = 0; j < S; ++j) {
            mdp.transition(i, j) = 0.05 + unit_uniform(rng);
            row += mdp.transition(i, j);
        }
        mdp.transition.row(i) /= row;
    }
    mdp.reward.resize(S, A);
    for (int i = 0; i < S; ++i)
        for (int a = 0; a < A; ++a) mdp.reward(i, a) = unit_uniform(rng);
    mdp.costs.assign(U, Eigen::MatrixXd(S, A));
    for (int u = 0; u < U; ++u)
        for (int i = 0; i < S; ++i)
            for (int a = 0; a < A; ++a) mdp.costs[u](i, a) = unit_uniform(rng);
    return mdp;
}

SolveSettings at_state_zero() {
    SolveSettings st;
    st.initial_state = 0;
    return st;
}

} // namespace

TEST_CASE("the ergodic baseline maximizes the per-state reward") {
    DiscountedMdp mdp = random_mdp(11, 6, 5, 1);
    Policy p = greedy_ergodic_policy(mdp, BaselineSpec{});
    for (std::int64_t s = 0; s < mdp.num_states; ++s) {
        std::int64_t arg = 0;
        for (std::int64_t a = 1; a < mdp.num_actions; ++a)
            if (mdp.reward(s, a) > mdp.reward(s, arg)) arg = a;
        CHECK(p.action_of_state[s] == arg);
    }
    Eigen::VectorXd v = policy_evaluation(p.action_of_state, mdp.reward, mdp);
    CHECK((p.value - v).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(p.cost_values.size() == 1);
    Eigen::VectorXd c = policy_evaluation(p.action_of_state, mdp.costs[0], mdp);
    CHECK((p.cost_values[0] - c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reward ties go to the lowest action index") {
    DiscountedMdp mdp = random_mdp(12, 4, 4, 0);
    mdp.reward.row(2).setConstant(0.25);
    mdp.reward(2, 1) = 2.0;
    mdp.reward(2, 3) = 2.0;
    Policy p = greedy_ergodic_policy(mdp, BaselineSpec{});
    CHECK(p.action_of_state[2] == 1);
}

TEST_CASE("with action-independent transitions the myopic baseline is the optimum") {
    // argmax_a [r(s,a) + lambda sum_s' P(s,s') v(s')] collapses to
    // argmax_a r(s,a) when P does not depend on a, so the greedy policy
    // and the unconstrained solve must agree state by state.
    for (std::uint64_t seed : {21ULL, 22ULL, 23ULL}) {
        DiscountedMdp mdp = random_mdp(seed, 8, 6, 1);
        Policy greedy = greedy_ergodic_policy(mdp, BaselineSpec{});

        SolveSettings st = at_state_zero();
        st.r_min = 0.0; // slack against nonnegative costs
        SolveResult solved = solve_cmdp(mdp, st);
        REQUIRE(solved.report.status == SolveStatus::converged);
        for (std::int64_t s = 0; s < mdp.num_states; ++s)
            CHECK(solved.policy.action_of_state[s] == greedy.action_of_state[s]);
        CHECK((solved.policy.value - greedy.value).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("the per-slot rule drops actions below the instantaneous rate floor") {
    DiscountedMdp mdp = random_mdp(31, 5, 4, 2);
    // Action 0 is always feasible; the unconstrained winner of state 1
    // violates UT 0's floor.
    for (int u = 0; u < 2; ++u) mdp.costs[u].col(0).setConstant(0.9);
    mdp.reward(1, 2) = 5.0;
    mdp.costs[0](1, 2) = 0.1;

    BaselineSpec spec;
    spec.feasibility_rule = FeasibilityRule::per_slot_rate;
    spec.r_inst = 0.3;
    Policy p = greedy_ergodic_policy(mdp, spec);

    Policy unconstrained = greedy_ergodic_policy(mdp, BaselineSpec{});
    CHECK(unconstrained.action_of_state[1] == 2);
    CHECK(p.action_of_state[1] != 2);

    for (std::int64_t s = 0; s < mdp.num_states; ++s) {
        std::int64_t chosen = p.action_of_state[s];
        for (int u = 0; u < 2; ++u) CHECK(mdp.costs[u](s, chosen) >= spec.r_inst);
        for (std::int64_t a = 0; a < mdp.num_actions; ++a) {
            bool ok = mdp.costs[0](s, a) >= spec.r_inst && mdp.costs[1](s, a) >= spec.r_inst;
            if (ok) CHECK(mdp.reward(s, chosen) >= mdp.reward(s, a));
        }
    }
}

TEST_CASE("states with no feasible action are reported, not glossed over") {
    DiscountedMdp mdp = random_mdp(32, 4, 3, 1);
    mdp.costs[0].row(2).setConstant(0.1);
    BaselineSpec spec;
    spec.feasibility_rule = FeasibilityRule::per_slot_rate;
    spec.r_inst = 0.5;
    CHECK_THROWS_WITH_AS(greedy_ergodic_policy(mdp, spec),
                         doctest::Contains("no action meets the per-slot rate"), ConfigError);

    BaselineSpec negative;
    negative.r_inst = -1.0;
    CHECK_THROWS_AS(greedy_ergodic_policy(mdp, negative), ConfigError);
}

TEST_CASE("enumeration walks every deterministic policy and keeps the feasible best") {
    DiscountedMdp mdp = random_mdp(41, 2, 2, 1);
    SolveSettings st = at_state_zero();

    // Re-derive the answer with an explicit loop over the four policies.
    std::vector<std::vector<std::int64_t>> all = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    auto value_of = [&](const std::vector<std::int64_t>& acts, const Eigen::MatrixXd& table) {
        return policy_evaluation(acts, table, mdp)(0);
    };

    SUBCASE("unconstrained") {
        st.r_min = 0.0;
        EnumerationResult res = enumerate_optimal_policy(mdp, st);
        CHECK(res.policies_scanned == 4);
        CHECK(res.feasible);
        double best = value_of(all[0], mdp.reward);
        for (const auto& acts : all) best = std::max(best, value_of(acts, mdp.reward));
        CHECK(res.value == doctest::Approx(best).epsilon(1e-12));
        CHECK(value_of(res.best.action_of_state, mdp.reward) ==
              doctest::Approx(best).epsilon(1e-12));
    }

    SUBCASE("binding rate floor") {
        // Put the floor above the cost of the unconstrained best policy
        // but below the maximum achievable cost.
        double best_value = -1.0, best_cost = 0.0, max_cost = 0.0;
        for (const auto& acts : all) {
            double v = value_of(acts, mdp.reward);
            double c = value_of(acts, mdp.costs[0]);
            max_cost = std::max(max_cost, c);
            if (v > best_value) {
                best_value = v;
                best_cost = c;
            }
        }
        REQUIRE(best_cost < max_cost); // the floor below can actually bind
        st.r_min = 0.5 * (best_cost + max_cost);
        EnumerationResult res = enumerate_optimal_policy(mdp, st);
        REQUIRE(res.feasible);
        CHECK(value_of(res.best.action_of_state, mdp.costs[0]) >= st.r_min);
        CHECK(res.value <= best_value);
        double expect = -1.0;
        bool found = false;
        for (const auto& acts : all) {
            if (value_of(acts, mdp.costs[0]) < st.r_min) continue;
            double v = value_of(acts, mdp.reward);
            if (!found || v > expect) expect = v;
            found = true;
        }
        REQUIRE(found);
        CHECK(res.value == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("infeasible floor falls back to the unconstrained best") {
        st.r_min = 1e6;
        EnumerationResult res = enumerate_optimal_policy(mdp, st);
        CHECK_FALSE(res.feasible);
        double best = value_of(all[0], mdp.reward);
        for (const auto& acts : all) best = std::max(best, value_of(acts, mdp.reward));
        CHECK(res.value == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("enumeration refuses state spaces past the policy limit") {
    DiscountedMdp mdp = random_mdp(42, 2, 4, 1); // 16 policies
    SolveSettings st = at_state_zero();
    CHECK_THROWS_WITH_AS(enumerate_optimal_policy(mdp, st, 10), doctest::Contains("limit"),
                         ConfigError);
    CHECK_NOTHROW(enumerate_optimal_policy(mdp, st, 16));
}

TEST_CASE("policy comparison reports values, agreement and slack") {
    DiscountedMdp mdp = random_mdp(51, 4, 3, 1);
    SolveSettings st = at_state_zero();
    st.r_min = 2.0;

    Policy a = greedy_ergodic_policy(mdp, BaselineSpec{});
    Policy b = a;
    b.action_of_state[0] = (a.action_of_state[0] + 1) % mdp.num_actions;
    b.action_of_state[3] = (a.action_of_state[3] + 1) % mdp.num_actions;

    ComparisonRecord rec = compare_policies(a, b, mdp, st);
    CHECK(rec.agreement == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rec.value_a == doctest::Approx(a.value(0)).epsilon(1e-12));
    CHECK(rec.value_difference == doctest::Approx(rec.value_a - rec.value_b).epsilon(1e-12));
    CHECK(rec.value_a >= rec.value_b); // a is the per-state argmax
    REQUIRE(rec.slack_a.size() == 1);
    double cost_a = policy_evaluation(a.action_of_state, mdp.costs[0], mdp)(0);
    CHECK(rec.slack_a(0) == doctest::Approx(cost_a - st.r_min).epsilon(1e-12));

    ComparisonRecord self = compare_policies(a, a, mdp, st);
    CHECK(self.agreement == 1.0);
    CHECK(self.value_difference == 0.0);

    Policy wrong;
    wrong.action_of_state.assign(3, 0);
    CHECK_THROWS_AS(compare_policies(a, wrong, mdp, st), std::invalid_argument);
}
