#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mbrl/mdp.hpp"

using namespace mbrl;

namespace {

TabularMdp empty_mdp(int S, int A, int H) {
    TabularMdp mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.horizon = H;
    mdp.start_state = 0;
    mdp.transition = TransitionModel(S, A);
    mdp.rewards.assign(static_cast<std::size_t>(S) * A, 0.0);
    return mdp;
}

/// Two states, H = 2: from the start a fair coin decides between staying (no
/// reward) and jumping to state 1, which pays 1 at the second step. Returns
/// are 0 or 1 with equal probability.
TabularMdp coin_mdp() {
    TabularMdp mdp = empty_mdp(2, 1, 2);
    mdp.transition.prob(0, 0, 0) = 0.5;
    mdp.transition.prob(0, 0, 1) = 0.5;
    mdp.transition.prob(1, 0, 1) = 1.0;
    mdp.reward(1, 0) = 1.0;
    mdp.validate();
    return mdp;
}

/// Deterministic two-state chain: step to state 1, collect 0.5 there at h=1.
TabularMdp two_step_chain() {
    TabularMdp mdp = empty_mdp(2, 1, 2);
    mdp.transition.prob(0, 0, 1) = 1.0;
    mdp.transition.prob(1, 0, 1) = 1.0;
    mdp.reward(1, 0) = 0.5;
    mdp.validate();
    return mdp;
}

TabularMdp random_mdp(int S, int A, int H, RngStream& rng) {
    TabularMdp mdp = empty_mdp(S, A, H);
    std::vector<double> row(S);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double total = 0.0;
            for (double& w : row) {
                w = rng.exponential();
                total += w;
            }
            for (double& w : row) w /= total;
            mdp.transition.set_row(s, a, row);
            mdp.reward(s, a) = rng.uniform01();
        }
    }
    const double max_path = max_trajectory_reward(mdp);
    for (double& r : mdp.rewards) r /= max_path;
    mdp.validate();
    return mdp;
}

Policy constant_policy(const TabularMdp& mdp, int action = 0) {
    Policy policy(mdp.horizon, mdp.num_states);
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) policy.action(h, s) = action;
    }
    return policy;
}

// Test-side oracle: return moments by brute-force path enumeration.
void enumerate_oracle(const TabularMdp& mdp, const Policy& policy, int h, int s,
                      double prob, double ret, double& mean, double& second) {
    if (h == mdp.horizon) {
        mean += prob * ret;
        second += prob * ret * ret;
        return;
    }
    const int a = policy.action(h, s);
    for (int sp = 0; sp < mdp.num_states; ++sp) {
        const double p = mdp.transition.prob(s, a, sp);
        if (p > 0.0) {
            enumerate_oracle(mdp, policy, h + 1, sp, prob * p, ret + mdp.reward(s, a),
                             mean, second);
        }
    }
}

double oracle_value(const TabularMdp& mdp, const Policy& policy) {
    double mean = 0.0, second = 0.0;
    enumerate_oracle(mdp, policy, 0, mdp.start_state, 1.0, 0.0, mean, second);
    return mean;
}

double oracle_variance(const TabularMdp& mdp, const Policy& policy) {
    double mean = 0.0, second = 0.0;
    enumerate_oracle(mdp, policy, 0, mdp.start_state, 1.0, 0.0, mean, second);
    return second - mean * mean;
}

// Odometer over all A^(H*S) deterministic non-stationary policies.
bool next_policy(Policy& policy, int num_actions) {
    for (int h = 0; h < policy.horizon(); ++h) {
        for (int s = 0; s < policy.num_states(); ++s) {
            if (++policy.action(h, s) < num_actions) return true;
            policy.action(h, s) = 0;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("policy evaluation with zero rewards is identically zero") {
    RngStream rng(11);
    const TabularMdp base = random_mdp(3, 2, 4, rng);
    TabularMdp mdp = base;
    mdp.rewards.assign(mdp.rewards.size(), 0.0);
    const ValueTables tables = policy_evaluation(mdp.transition, mdp, constant_policy(mdp));
    for (double v : tables.v) CHECK(v == 0.0);
    for (double q : tables.q) CHECK(q == 0.0);
}

TEST_CASE("policy evaluation unrolls the two-step chain by hand") {
    const TabularMdp mdp = two_step_chain();
    const ValueTables tables = policy_evaluation(mdp.transition, mdp, constant_policy(mdp));
    // h=1: V(1, s1) = 0.5; h=0: V(0, s0) = 0 + V(1, s1).
    CHECK(tables.value(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tables.value(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("evaluating the optimal policy reproduces the planning tables") {
    RngStream rng(17);
    const TabularMdp mdp = random_mdp(4, 3, 3, rng);
    const auto [policy, planned] = optimal_planning(mdp.transition, mdp);
    const ValueTables evaluated = policy_evaluation(mdp.transition, mdp, policy);
    REQUIRE(planned.v.size() == evaluated.v.size());
    for (std::size_t i = 0; i < planned.v.size(); ++i) {
        CHECK(planned.v[i] == doctest::Approx(evaluated.v[i]).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < planned.q.size(); ++i) {
        CHECK(planned.q[i] == doctest::Approx(evaluated.q[i]).epsilon(1e-12));
    }
}

TEST_CASE("single-action planning is forced") {
    RngStream rng(23);
    const TabularMdp mdp = random_mdp(3, 1, 3, rng);
    const auto [policy, tables] = optimal_planning(mdp.transition, mdp);
    const ValueTables forced = policy_evaluation(mdp.transition, mdp, constant_policy(mdp));
    CHECK(tables.value(0, mdp.start_state) ==
          doctest::Approx(forced.value(0, mdp.start_state)).epsilon(1e-15));
}

TEST_CASE("one-step argmax picks the richer action") {
    TabularMdp mdp = empty_mdp(2, 2, 1);
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) mdp.transition.prob(s, a, s) = 1.0;
    }
    mdp.reward(0, 0) = 0.3;
    mdp.reward(0, 1) = 0.7;
    mdp.validate();
    const auto [policy, tables] = optimal_planning(mdp.transition, mdp);
    CHECK(policy.action(0, 0) == 1);
    CHECK(tables.value(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("argmax ties break toward the lowest action index") {
    TabularMdp mdp = empty_mdp(2, 3, 2);
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 3; ++a) mdp.transition.prob(s, a, s) = 1.0;
    }
    mdp.validate();  // all rewards zero, every action ties
    const auto [policy, tables] = optimal_planning(mdp.transition, mdp);
    for (int h = 0; h < 2; ++h) {
        for (int s = 0; s < 2; ++s) CHECK(policy.action(h, s) == 0);
    }
}

TEST_CASE("planning dominates exhaustive policy enumeration") {
    RngStream rng(31);
    for (int instance = 0; instance < 5; ++instance) {
        const TabularMdp mdp = random_mdp(3, 2, 3, rng);
        const auto [best_policy, tables] = optimal_planning(mdp.transition, mdp);
        const double planned = tables.value(0, mdp.start_state);

        Policy policy(mdp.horizon, mdp.num_states);
        double best_enumerated = -1.0;
        do {
            const double value = policy_evaluation(mdp.transition, mdp, policy)
                                     .value(0, mdp.start_state);
            best_enumerated = std::max(best_enumerated, value);
            CHECK(planned >= value - 1e-10);
        } while (next_policy(policy, mdp.num_actions));
        CHECK(planned == doctest::Approx(best_enumerated).epsilon(1e-12));
    }
}

TEST_CASE("optimal value matches the enumeration oracle on a 4x3x3 instance") {
    RngStream rng(37);
    const TabularMdp mdp = random_mdp(4, 3, 3, rng);
    const double planned =
        optimal_planning(mdp.transition, mdp).second.value(0, mdp.start_state);

    Policy policy(mdp.horizon, mdp.num_states);
    double best = -1.0;
    do {
        best = std::max(best, oracle_value(mdp, policy));
    } while (next_policy(policy, mdp.num_actions));
    CHECK(planned == doctest::Approx(best).epsilon(1e-10));
}

TEST_CASE("Bellman residuals vanish on evaluation tables") {
    RngStream rng(41);
    for (int instance = 0; instance < 20; ++instance) {
        const TabularMdp mdp = random_mdp(2 + rng.uniform_int(4), 1 + rng.uniform_int(3),
                                          1 + rng.uniform_int(5), rng);
        Policy policy(mdp.horizon, mdp.num_states);
        for (int h = 0; h < mdp.horizon; ++h) {
            for (int s = 0; s < mdp.num_states; ++s) {
                policy.action(h, s) = rng.uniform_int(mdp.num_actions);
            }
        }
        const ValueTables tables = policy_evaluation(mdp.transition, mdp, policy);
        // V(H, .) = 0 and, under the true normalized kernel, values stay in
        // the unit interval wherever the start state can actually put mass.
        for (int s = 0; s < mdp.num_states; ++s) CHECK(tables.value(mdp.horizon, s) == 0.0);
        std::vector<char> reachable(mdp.num_states, 0);
        reachable[mdp.start_state] = 1;
        for (int h = 0; h < mdp.horizon; ++h) {
            std::vector<char> next(mdp.num_states, 0);
            for (int s = 0; s < mdp.num_states; ++s) {
                double backup = mdp.reward(s, policy.action(h, s));
                const auto row = mdp.transition.row(s, policy.action(h, s));
                for (int sp = 0; sp < mdp.num_states; ++sp) {
                    backup += row[sp] * tables.value(h + 1, sp);
                    if (reachable[s] && row[sp] > 0.0) next[sp] = 1;
                }
                CHECK(std::abs(tables.value(h, s) - backup) <= 1e-10);
                CHECK(tables.value(h, s) == tables.qvalue(h, s, policy.action(h, s)));
                if (reachable[s]) {
                    CHECK(tables.value(h, s) >= 0.0);
                    CHECK(tables.value(h, s) <= 1.0 + 1e-12);
                }
            }
            reachable = std::move(next);
        }
    }
}

TEST_CASE("occupancy starts as a point mass and stays normalized") {
    RngStream rng(43);
    const TabularMdp mdp = random_mdp(4, 2, 5, rng);
    const Policy policy = constant_policy(mdp, 1);
    const OccupancyMeasure occ = occupancy(mdp.transition, mdp, policy);

    CHECK(occ.at(0, mdp.start_state, 1) == 1.0);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            if (s != mdp.start_state || a != 1) CHECK(occ.at(0, s, a) == 0.0);
        }
    }
    for (int h = 0; h < mdp.horizon; ++h) {
        double total = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) total += occ.at(h, s, a);
        }
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("occupancy pushforward consistency at every step") {
    RngStream rng(47);
    const TabularMdp mdp = random_mdp(5, 3, 6, rng);
    Policy policy(mdp.horizon, mdp.num_states);
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            policy.action(h, s) = rng.uniform_int(mdp.num_actions);
        }
    }
    const OccupancyMeasure occ = occupancy(mdp.transition, mdp, policy);
    for (int h = 0; h + 1 < mdp.horizon; ++h) {
        for (int sp = 0; sp < mdp.num_states; ++sp) {
            double pushed = 0.0;
            for (int s = 0; s < mdp.num_states; ++s) {
                for (int a = 0; a < mdp.num_actions; ++a) {
                    pushed += occ.at(h, s, a) * mdp.transition.prob(s, a, sp);
                }
            }
            double next_mass = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) next_mass += occ.at(h + 1, sp, a);
            CHECK(std::abs(pushed - next_mass) <= 1e-10);
        }
    }
}

TEST_CASE("deterministic chain occupancy is a point mass per step") {
    const TabularMdp mdp = two_step_chain();
    const OccupancyMeasure occ = occupancy(mdp.transition, mdp, constant_policy(mdp));
    CHECK(occ.at(0, 0, 0) == 1.0);
    CHECK(occ.at(1, 1, 0) == 1.0);
    CHECK(occ.at(1, 0, 0) == 0.0);
}

TEST_CASE("occupancy-weighted rewards reproduce the evaluation value") {
    RngStream rng(53);
    for (int instance = 0; instance < 10; ++instance) {
        const TabularMdp mdp = random_mdp(4, 2, 5, rng);
        Policy policy(mdp.horizon, mdp.num_states);
        for (int h = 0; h < mdp.horizon; ++h) {
            for (int s = 0; s < mdp.num_states; ++s) {
                policy.action(h, s) = rng.uniform_int(mdp.num_actions);
            }
        }
        const OccupancyMeasure occ = occupancy(mdp.transition, mdp, policy);
        double total = 0.0;
        for (int h = 0; h < mdp.horizon; ++h) {
            for (int s = 0; s < mdp.num_states; ++s) {
                for (int a = 0; a < mdp.num_actions; ++a) {
                    total += occ.at(h, s, a) * mdp.reward(s, a);
                }
            }
        }
        const double value = policy_evaluation(mdp.transition, mdp, policy)
                                 .value(0, mdp.start_state);
        CHECK(std::abs(total - value) <= 1e-10);
    }
}

TEST_CASE("deterministic MDP trajectories ignore the seed") {
    const TabularMdp mdp = two_step_chain();
    RngStream a(1), b(999);
    const Trajectory ta = sample_trajectory(mdp, constant_policy(mdp), a);
    const Trajectory tb = sample_trajectory(mdp, constant_policy(mdp), b);
    CHECK(ta == tb);
    CHECK(ta.steps.size() == 2);
    CHECK(ta.steps[0].state == 0);
    CHECK(ta.steps[0].next_state == 1);
}

TEST_CASE("fixed seed gives bit-identical trajectories") {
    const TabularMdp mdp = coin_mdp();
    const Policy policy = constant_policy(mdp);
    RngStream a(20240817), b(20240817);
    for (int i = 0; i < 50; ++i) {
        CHECK(sample_trajectory(mdp, policy, a) == sample_trajectory(mdp, policy, b));
    }
}

TEST_CASE("trajectory invariants: length H, start at s0, supported steps") {
    RngStream rng(59);
    const TabularMdp mdp = random_mdp(4, 2, 6, rng);
    const Policy policy = constant_policy(mdp, 1);
    for (int i = 0; i < 100; ++i) {
        const Trajectory t = sample_trajectory(mdp, policy, rng);
        REQUIRE(t.steps.size() == static_cast<std::size_t>(mdp.horizon));
        CHECK(t.steps.front().state == mdp.start_state);
        for (std::size_t h = 0; h < t.steps.size(); ++h) {
            const auto& step = t.steps[h];
            CHECK(mdp.transition.prob(step.state, step.action, step.next_state) > 0.0);
            if (h + 1 < t.steps.size()) CHECK(t.steps[h + 1].state == step.next_state);
        }
    }
}

TEST_CASE("sample mean return matches the exact value at three sigma") {
    const TabularMdp mdp = coin_mdp();
    const Policy policy = constant_policy(mdp);
    const double exact = policy_evaluation(mdp.transition, mdp, policy)
                             .value(0, mdp.start_state);

    RngStream rng(61);
    const int n = 10000;
    double mean = 0.0, second = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ret = trajectory_return(sample_trajectory(mdp, policy, rng));
        mean += ret;
        second += ret * ret;
    }
    mean /= n;
    second /= n;
    const double sample_std = std::sqrt(std::max(0.0, second - mean * mean));
    CHECK(std::abs(mean - exact) <= 3.0 * sample_std / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("return variance is zero without randomness") {
    SUBCASE("deterministic transitions and policy") {
        const TabularMdp mdp = two_step_chain();
        CHECK(return_variance(mdp.transition, mdp, constant_policy(mdp)) == 0.0);
    }
    SUBCASE("single state") {
        TabularMdp mdp = empty_mdp(1, 2, 4);
        mdp.transition.prob(0, 0, 0) = 1.0;
        mdp.transition.prob(0, 1, 0) = 1.0;
        mdp.reward(0, 0) = 0.25;
        mdp.validate();
        CHECK(return_variance(mdp.transition, mdp, constant_policy(mdp)) == 0.0);
    }
}

TEST_CASE("coin MDP return variance is a quarter") {
    const TabularMdp mdp = coin_mdp();
    const Policy policy = constant_policy(mdp);
    // Oracle: two equiprobable paths with returns 0 and 1.
    CHECK(oracle_variance(mdp, policy) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(return_variance(mdp.transition, mdp, policy) ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("variance identity agrees with path enumeration on random instances") {
    RngStream rng(67);
    for (int instance = 0; instance < 25; ++instance) {
        const TabularMdp mdp = random_mdp(3 + rng.uniform_int(3), 2, 1 + rng.uniform_int(5),
                                          rng);
        Policy policy(mdp.horizon, mdp.num_states);
        for (int h = 0; h < mdp.horizon; ++h) {
            for (int s = 0; s < mdp.num_states; ++s) {
                policy.action(h, s) = rng.uniform_int(mdp.num_actions);
            }
        }
        const double identity = return_variance(mdp.transition, mdp, policy);
        const double brute = oracle_variance(mdp, policy);
        CHECK(std::abs(identity - brute) <= 1e-10);
    }
}

TEST_CASE("max trajectory reward") {
    SUBCASE("zero rewards") {
        TabularMdp mdp = empty_mdp(2, 1, 3);
        mdp.transition.prob(0, 0, 1) = 1.0;
        mdp.transition.prob(1, 0, 1) = 1.0;
        CHECK(max_trajectory_reward(mdp) == 0.0);
    }
    SUBCASE("chain paying 1/H per step") {
        const int H = 7;
        TabularMdp mdp = empty_mdp(3, 1, H);
        mdp.transition.prob(0, 0, 1) = 1.0;
        mdp.transition.prob(1, 0, 2) = 1.0;
        mdp.transition.prob(2, 0, 2) = 1.0;
        for (int s = 0; s < 3; ++s) mdp.reward(s, 0) = 1.0 / H;
        CHECK(std::abs(max_trajectory_reward(mdp) - 1.0) <= 1e-12);
    }
    SUBCASE("normalized random instances stay below one") {
        RngStream rng(71);
        for (int i = 0; i < 20; ++i) {
            const TabularMdp mdp = random_mdp(4, 3, 5, rng);
            CHECK(max_trajectory_reward(mdp) <= 1.0 + 1e-12);
        }
    }
    SUBCASE("unreachable rewards do not count") {
        TabularMdp mdp = empty_mdp(2, 1, 2);
        mdp.transition.prob(0, 0, 0) = 1.0;
        mdp.transition.prob(1, 0, 1) = 1.0;
        mdp.reward(1, 0) = 100.0;  // state 1 cannot be reached from 0
        CHECK(max_trajectory_reward(mdp) == 0.0);
    }
}

TEST_CASE("shape mismatches raise structured errors") {
    RngStream rng(73);
    const TabularMdp mdp = random_mdp(3, 2, 2, rng);
    const TransitionModel wrong_states(4, 2);
    CHECK_THROWS_AS(policy_evaluation(wrong_states, mdp, constant_policy(mdp)),
                    DimensionError);
    const TransitionModel wrong_actions(3, 3);
    CHECK_THROWS_AS(optimal_planning(wrong_actions, mdp), DimensionError);

    try {
        optimal_planning(wrong_states, mdp);
        FAIL("expected a DimensionError");
    } catch (const DimensionError& e) {
        CHECK(std::string(e.what()).find("num_states") != std::string::npos);
    }
}

TEST_CASE("validation rejects broken invariants") {
    SUBCASE("row does not sum to one") {
        TabularMdp mdp = empty_mdp(2, 1, 2);
        mdp.transition.prob(0, 0, 0) = 0.6;
        mdp.transition.prob(0, 0, 1) = 0.6;
        mdp.transition.prob(1, 0, 1) = 1.0;
        CHECK_THROWS_AS(mdp.validate(), InvariantError);
    }
    SUBCASE("negative transition entry") {
        TabularMdp mdp = empty_mdp(2, 1, 2);
        mdp.transition.prob(0, 0, 0) = 1.2;
        mdp.transition.prob(0, 0, 1) = -0.2;
        mdp.transition.prob(1, 0, 1) = 1.0;
        CHECK_THROWS_AS(mdp.validate(), InvariantError);
    }
    SUBCASE("path reward above one") {
        TabularMdp mdp = empty_mdp(2, 1, 2);
        mdp.transition.prob(0, 0, 1) = 1.0;
        mdp.transition.prob(1, 0, 1) = 1.0;
        mdp.reward(0, 0) = 0.8;
        mdp.reward(1, 0) = 0.8;
        CHECK_THROWS_AS(mdp.validate(), InvariantError);
    }
    SUBCASE("negative reward") {
        TabularMdp mdp = empty_mdp(2, 1, 2);
        mdp.transition.prob(0, 0, 1) = 1.0;
        mdp.transition.prob(1, 0, 1) = 1.0;
        mdp.reward(0, 0) = -0.1;
        CHECK_THROWS_AS(mdp.validate(), InvariantError);
    }
    SUBCASE("policy action out of range") {
        const TabularMdp mdp = two_step_chain();
        Policy policy(2, 2);
        policy.action(0, 0) = 5;
        CHECK_THROWS_AS(policy.validate(mdp), InvariantError);
    }
}
