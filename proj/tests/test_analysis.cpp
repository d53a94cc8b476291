#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mbrl/analysis.hpp"
#include "mbrl/generators.hpp"

using namespace mbrl;

namespace {

FunctionClassTable table_from(std::vector<std::vector<double>> values) {
    FunctionClassTable table;
    table.values = std::move(values);
    const std::size_t width = table.values.empty() ? 0 : table.values.front().size();
    for (std::size_t i = 0; i < width; ++i) {
        table.point_labels.push_back("x" + std::to_string(i));
    }
    return table;
}

FunctionClassTable indicator_table(int n) {
    std::vector<std::vector<double>> values(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) values[i][i] = 1.0;
    return table_from(std::move(values));
}

// Replays a witness sequence against the independence definition.
bool witness_is_valid(const FunctionClassTable& table, const EluderResult& result,
                      int p) {
    const double budget = (p == 1) ? result.epsilon : result.epsilon * result.epsilon;
    std::vector<double> sums(table.num_functions(), 0.0);
    for (std::size_t t = 0; t < result.witness_points.size(); ++t) {
        const int x = result.witness_points[t];
        const int g = result.witness_functions[t];
        if (!(sums[g] <= budget && table.values[g][x] > result.epsilon)) return false;
        for (int gg = 0; gg < table.num_functions(); ++gg) {
            const double v = table.values[gg][x];
            sums[gg] += (p == 1) ? v : v * v;
        }
    }
    return true;
}

TabularMdp gen_random_mdp(int S, int A, int H, std::uint64_t seed) {
    EnvParams params;
    params.family = EnvFamily::random_stochastic;
    params.num_states = S;
    params.num_actions = A;
    params.horizon = H;
    RngStream rng(seed);
    return gen_environment(params, rng);
}

Policy random_policy(const TabularMdp& mdp, RngStream& rng) {
    Policy policy(mdp.horizon, mdp.num_states);
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            policy.action(h, s) = rng.uniform_int(mdp.num_actions);
        }
    }
    return policy;
}

}  // namespace

TEST_CASE("psi table rows are squared Hellinger discrepancies") {
    const TabularMdp mdp = gen_random_mdp(3, 2, 3, 401);
    RngStream class_rng(402);
    const ModelClass model_class = gen_model_class(mdp, 5, 0.3, class_rng);
    const FunctionClassTable psi = build_psi(model_class, mdp);

    REQUIRE(psi.num_functions() == 5);
    REQUIRE(psi.num_points() == 6);

    SUBCASE("the truth row is identically zero") {
        for (double v : psi.values[*model_class.truth_index]) CHECK(v == 0.0);
    }
    SUBCASE("entries stay in the unit interval") {
        for (const auto& row : psi.values) {
            for (double v : row) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0 + 1e-15);
            }
        }
    }
    SUBCASE("a one-row perturbation lights exactly one column") {
        ModelClass tweaked;
        tweaked.truth_index = 0;
        tweaked.models = {mdp.transition, mdp.transition};
        std::vector<double> row(mdp.transition.row(1, 0).begin(),
                                mdp.transition.row(1, 0).end());
        std::rotate(row.begin(), row.begin() + 1, row.end());
        tweaked.models[1].set_row(1, 0, row);
        const FunctionClassTable single = build_psi(tweaked, mdp);
        int nonzero = 0;
        for (double v : single.values[1]) nonzero += (v > 0.0);
        CHECK(nonzero == 1);
    }
}

TEST_CASE("eluder dimension of stock tables") {
    SUBCASE("all-zero table has dimension zero") {
        const auto table = table_from({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}});
        const EluderResult r = eluder_dim_l1(table, 0.5, EluderMode::exhaustive);
        CHECK(r.dimension == 0);
        CHECK(r.exact);
    }
    SUBCASE("n singleton indicators have dimension n") {
        for (int n : {1, 3, 6, 9}) {
            const EluderResult r =
                eluder_dim_l1(indicator_table(n), 0.5, EluderMode::exhaustive);
            CHECK(r.dimension == n);
            CHECK(witness_is_valid(indicator_table(n), r, 1));
        }
    }
}

TEST_CASE("exhaustive witnesses satisfy the definition") {
    RngStream rng(409);
    for (int trial = 0; trial < 50; ++trial) {
        const int funcs = 2 + rng.uniform_int(5);
        const int points = 2 + rng.uniform_int(7);
        std::vector<std::vector<double>> values(funcs, std::vector<double>(points));
        for (auto& row : values) {
            for (double& v : row) v = rng.uniform01();
        }
        const auto table = table_from(std::move(values));
        const double eps = 0.05 + 0.9 * rng.uniform01();
        const EluderResult exact = eluder_dim_l1(table, eps, EluderMode::exhaustive);
        const EluderResult greedy = eluder_dim_l1(table, eps, EluderMode::greedy);
        CHECK(witness_is_valid(table, exact, 1));
        CHECK(witness_is_valid(table, greedy, 1));
        CHECK(exact.exact);
        CHECK_FALSE(greedy.exact);
        CHECK(greedy.dimension <= exact.dimension);
        CHECK(static_cast<int>(exact.witness_points.size()) == exact.dimension);
    }
}

TEST_CASE("l1 dimension never exceeds l2 dimension") {
    RngStream rng(419);
    for (int trial = 0; trial < 40; ++trial) {
        const int funcs = 2 + rng.uniform_int(5);
        const int points = 2 + rng.uniform_int(6);
        std::vector<std::vector<double>> values(funcs, std::vector<double>(points));
        for (auto& row : values) {
            for (double& v : row) v = rng.uniform01();
        }
        const auto table = table_from(std::move(values));
        const double eps = 0.05 + 0.9 * rng.uniform01();
        const EluderResult l1 = eluder_dim_l1(table, eps, EluderMode::exhaustive);
        const EluderResult l2 = eluder_dim_l2(table, eps, EluderMode::exhaustive);
        CHECK(witness_is_valid(table, l2, 2));
        CHECK(l1.dimension <= l2.dimension);
    }
}

TEST_CASE("tabular psi dimension is bounded by the number of pairs") {
    for (int trial = 0; trial < 20; ++trial) {
        const TabularMdp mdp = gen_random_mdp(3, 2, 3, 500 + trial);
        RngStream class_rng(600 + trial);
        const ModelClass model_class = gen_model_class(mdp, 8, 0.35, class_rng);
        const FunctionClassTable psi = build_psi(model_class, mdp);
        for (double eps : {0.3, 0.1, 0.03}) {
            const EluderResult r = eluder_dim_l1(psi, eps, EluderMode::exhaustive);
            CHECK(r.dimension <= mdp.num_states * mdp.num_actions);
        }
    }
}

TEST_CASE("plain-threshold dimension is not monotone in epsilon") {
    // Cross values below a large epsilon keep budgets alive that a smaller
    // epsilon would already have spent.
    const auto table = table_from({{0.9, 0.4, 0.4},
                                   {0.4, 0.9, 0.4},
                                   {0.4, 0.4, 0.9}});
    CHECK(eluder_dim_l1(table, 0.85, EluderMode::exhaustive).dimension == 3);
    CHECK(eluder_dim_l1(table, 0.45, EluderMode::exhaustive).dimension == 2);
}

TEST_CASE("exhaustive mode rejects oversized tables with a size report") {
    std::vector<std::vector<double>> values(13, std::vector<double>(3, 0.5));
    const auto table = table_from(std::move(values));
    try {
        eluder_dim_l1(table, 0.25, EluderMode::exhaustive);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("13") != std::string::npos);
    }
    // Greedy still works above the exhaustive budget.
    const EluderResult r = eluder_dim_l1(table, 0.25, EluderMode::greedy);
    CHECK_FALSE(r.exact);
    CHECK(r.dimension >= 1);
}

TEST_CASE("epsilon must be positive") {
    const auto table = indicator_table(2);
    CHECK_THROWS_AS(eluder_dim_l1(table, 0.0, EluderMode::exhaustive), ConfigError);
}

TEST_CASE("simulation bound is tight at the truth and holds under fuzz") {
    SUBCASE("model equals the truth") {
        const TabularMdp mdp = gen_random_mdp(4, 2, 4, 431);
        const Policy policy = optimal_planning(mdp.transition, mdp).first;
        const InequalityCheck check = check_simulation_lemma(mdp, mdp.transition, policy);
        CHECK(check.lhs == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(check.rhs == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(check.holds);
    }
    SUBCASE("one-step horizon collapses both sides") {
        const TabularMdp mdp = gen_random_mdp(3, 2, 1, 433);
        RngStream rng(434);
        const ModelClass model_class = gen_model_class(mdp, 2, 0.4, rng);
        const int other = 1 - *model_class.truth_index;
        const Policy policy = optimal_planning(mdp.transition, mdp).first;
        const InequalityCheck check =
            check_simulation_lemma(mdp, model_class.models[other], policy);
        // Terminal values vanish, and a one-step value gap is pure reward.
        CHECK(check.rhs == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(check.lhs == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("random triples") {
        RngStream rng(437);
        for (int trial = 0; trial < 2000; ++trial) {
            const TabularMdp mdp =
                gen_random_mdp(2 + trial % 4, 1 + trial % 3, 1 + trial % 6, 440 + trial);
            RngStream class_rng(5000 + trial);
            const ModelClass model_class =
                gen_model_class(mdp, 2, 0.05 + 0.5 * rng.uniform01(), class_rng);
            const int other = 1 - *model_class.truth_index;
            const Policy policy = random_policy(mdp, rng);
            const InequalityCheck check =
                check_simulation_lemma(mdp, model_class.models[other], policy);
            CHECK(check.holds);
        }
    }
}

TEST_CASE("change-of-variance identity") {
    SUBCASE("deterministic environment gives zero on both sides") {
        EnvParams params;
        params.family = EnvFamily::deterministic;
        params.num_states = 4;
        params.num_actions = 2;
        params.horizon = 5;
        RngStream rng(443);
        const TabularMdp mdp = gen_environment(params, rng);
        const Policy policy = optimal_planning(mdp.transition, mdp).first;
        const IdentityCheck check = check_change_of_variance(mdp, policy);
        CHECK(check.lhs == 0.0);
        CHECK(check.rhs == 0.0);
        CHECK(check.exact);
    }
    SUBCASE("two-branch coin") {
        TabularMdp mdp;
        mdp.num_states = 2;
        mdp.num_actions = 1;
        mdp.horizon = 2;
        mdp.start_state = 0;
        mdp.transition = TransitionModel(2, 1);
        mdp.transition.prob(0, 0, 0) = 0.5;
        mdp.transition.prob(0, 0, 1) = 0.5;
        mdp.transition.prob(1, 0, 1) = 1.0;
        mdp.rewards = {0.0, 1.0};
        mdp.validate();
        const IdentityCheck check = check_change_of_variance(mdp, Policy(2, 2));
        CHECK(check.lhs == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(check.rhs == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(check.abs_diff <= 1e-10);
    }
    SUBCASE("random instances in the exact regime") {
        RngStream rng(449);
        for (int trial = 0; trial < 50; ++trial) {
            const TabularMdp mdp = gen_random_mdp(5, 2, 4, 460 + trial);
            const Policy policy = random_policy(mdp, rng);
            const IdentityCheck check = check_change_of_variance(mdp, policy);
            CHECK(check.exact);
            CHECK(check.abs_diff <= 1e-10);
        }
    }
}

TEST_CASE("path counting and enumeration") {
    const TabularMdp mdp = gen_random_mdp(5, 2, 4, 467);
    const Policy policy = optimal_planning(mdp.transition, mdp).first;
    const std::uint64_t paths = count_support_paths(mdp.transition, mdp, policy, 1 << 20);
    CHECK(paths == 625);  // full support: 5^4
    const ReturnMoments moments = enumerate_return_moments(mdp.transition, mdp, policy);
    const double value = policy_evaluation(mdp.transition, mdp, policy)
                             .value(0, mdp.start_state);
    CHECK(moments.mean == doctest::Approx(value).epsilon(1e-12));
    CHECK_THROWS_AS(enumerate_return_moments(mdp.transition, mdp, policy, 100),
                    ConfigError);
}

TEST_CASE("bad episode set") {
    SUBCASE("all-zero trace is clean") {
        const std::vector<std::vector<double>> trace(10, std::vector<double>(4, 0.0));
        CHECK(bad_episode_set(trace, 2.0).empty());
    }
    SUBCASE("one heavy episode fires the ratio") {
        const double lambda = 2.0;
        std::vector<std::vector<double>> trace(5, std::vector<double>(1, 0.0));
        trace[3][0] = 10.0 * lambda;  // ratio (lambda + 10*lambda)/lambda = 11
        const auto bad = bad_episode_set(trace, lambda);
        REQUIRE(bad.size() == 1);
        CHECK(bad[0] == 3);
    }
    SUBCASE("the set can never exceed the episode count") {
        RngStream rng(479);
        for (int trial = 0; trial < 50; ++trial) {
            const int K = 1 + rng.uniform_int(40);
            std::vector<std::vector<double>> trace(K, std::vector<double>(3, 0.0));
            for (auto& row : trace) {
                for (double& v : row) v = rng.uniform01();
            }
            CHECK(bad_episode_set(trace, 1.5).size() <= static_cast<std::size_t>(K));
        }
    }
    SUBCASE("lambda at most one is rejected") {
        CHECK_THROWS_AS(bad_episode_set({}, 1.0), ConfigError);
    }
    SUBCASE("sup across traces flags the union") {
        const double lambda = 2.0;
        std::vector<std::vector<std::vector<double>>> traces(
            2, std::vector<std::vector<double>>(4, std::vector<double>(1, 0.0)));
        traces[0][1][0] = 30.0;
        traces[1][2][0] = 30.0;
        const auto bad = bad_episode_set_sup(traces, lambda);
        CHECK(bad == std::vector<int>{1, 2});
    }
}

TEST_CASE("recursion bound check") {
    SUBCASE("the zero sequence is fine") {
        const std::vector<double> zeros(20, 0.0);
        const RecursionCheck check = check_recursion_lemma(0.5, 0.2, zeros, 16, 4);
        CHECK(check.hypotheses_hold);
        CHECK(check.conclusion_holds);
    }
    SUBCASE("the induction envelope is the exact boundary") {
        // C_m = 2^(m+2) * G touches C_0 = 4G; the conclusion still holds
        // with equality even though the envelope is not itself a solution of
        // the recursive hypothesis.
        const double G = 0.25;
        std::vector<double> envelope;
        for (int m = 0; m < 12; ++m) envelope.push_back(std::ldexp(4.0 * G, m));
        const RecursionCheck check = check_recursion_lemma(G, 1e-12, envelope, 16, 4);
        CHECK(envelope[0] == 4.0 * G);
        CHECK(check.conclusion_holds);
    }
    SUBCASE("hypothesis-satisfying sequences always conclude") {
        RngStream rng(487);
        int accepted = 0;
        while (accepted < 10000) {
            const int K = 1 + rng.uniform_int(64);
            const int H = 1 + rng.uniform_int(16);
            const double kh = static_cast<double>(K) * H;
            const double G = rng.uniform(1e-3, kh);
            const double a = rng.uniform(0.0, G / 2.0);
            if (a == 0.0) continue;
            const int depth = std::max(0, static_cast<int>(std::ceil(std::log2(kh / G))));
            // Draw the tail first, then sample each earlier term inside its
            // feasible interval.
            std::vector<double> c(depth + 1, 0.0);
            c[depth] = rng.uniform(0.0, kh);
            for (int m = depth - 1; m >= 0; --m) {
                const double cap =
                    std::min(kh, std::ldexp(G, m) + std::sqrt(a * c[m + 1]) + a);
                c[m] = rng.uniform(0.0, cap);
            }
            const RecursionCheck check = check_recursion_lemma(G, a, c, K, H);
            REQUIRE(check.hypotheses_hold);
            CHECK(check.conclusion_holds);
            ++accepted;
        }
    }
    SUBCASE("bad parameters are rejected") {
        const std::vector<double> zeros(8, 0.0);
        CHECK_THROWS_AS(check_recursion_lemma(0.0, 0.1, zeros, 4, 4), ConfigError);
        CHECK_THROWS_AS(check_recursion_lemma(1.0, 0.1, zeros, 0, 4), ConfigError);
    }
}
