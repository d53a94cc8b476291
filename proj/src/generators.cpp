#include "mbrl/generators.hpp"

#include <algorithm>
#include <cmath>

namespace mbrl {

namespace {

void fill_random_rewards(TabularMdp& mdp, RngStream& rng) {
    for (double& r : mdp.rewards) r = rng.uniform01();
}

/// Rescales rewards so the best reachable path collects exactly 1.
void normalize_rewards(TabularMdp& mdp) {
    const double max_path = max_trajectory_reward(mdp);
    if (max_path <= 0.0) {
        throw InvariantError("gen_environment: all-zero rewards cannot be normalized");
    }
    for (double& r : mdp.rewards) r /= max_path;
}

TabularMdp make_base(const EnvParams& params) {
    if (params.num_states < 1 || params.num_actions < 1 || params.horizon < 1) {
        throw ConfigError("gen_environment: S, A and H must all be positive");
    }
    TabularMdp mdp;
    mdp.num_states = params.num_states;
    mdp.num_actions = params.num_actions;
    mdp.horizon = params.horizon;
    mdp.start_state = 0;
    mdp.transition = TransitionModel(params.num_states, params.num_actions);
    mdp.rewards.assign(static_cast<std::size_t>(params.num_states) * params.num_actions,
                       0.0);
    return mdp;
}

// Deterministic core shared by the `deterministic` and `variance_dial`
// families. The upper half of the state space pays 1/(H-1) per step; action
// 0 aims deterministically into it, the other actions aim at state 0 and pay
// a consolation sitting a small margin under the aim action's one-step
// premium. The kernel ignores the current state given the action, so under
// the aim policy the visited states are i.i.d.; the dial mixes toward
// uniform with weight 0.85*sigma, which raises the hit probability's
// variance strictly (q = 1 - 0.85*sigma*(1 - |W|/S) stays above 1/2) while
// the 0.15 deterministic floor keeps the aim action strictly optimal, so the
// decision problem stays comparable across the dial.
TabularMdp gen_mixed(const EnvParams& params, double sigma, RngStream& rng) {
    if (params.num_states < 2 || params.num_actions < 2 || params.horizon < 2) {
        throw ConfigError("gen_environment: this family needs S >= 2, A >= 2, H >= 2");
    }
    TabularMdp mdp = make_base(params);
    const int S = params.num_states, A = params.num_actions;
    const int first_paying = S / 2;  // states first_paying..S-1 pay
    const double step_pay = 1.0 / (params.horizon - 1);
    const double lambda = 0.85 * sigma;

    auto set_mixed_row = [&](int s, int a, int target) {
        for (int sp = 0; sp < S; ++sp) {
            mdp.transition.prob(s, a, sp) =
                (sp == target ? 1.0 - lambda : 0.0) + lambda / S;
        }
    };
    // One-step value spread between any two states is exactly the step pay,
    // so the aim action's continuation premium is (1-lambda)*step_pay at
    // every step except the last.
    const double premium = (1.0 - lambda) * step_pay;
    std::vector<double> consolation(A, 0.0);
    for (int a = 1; a < A; ++a) {
        const double margin = 0.1 * a * step_pay * rng.uniform(0.9, 1.1);
        consolation[a] = std::max(0.0, premium - margin);
    }
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            set_mixed_row(s, a, a == 0 ? first_paying : 0);
            if (s >= first_paying) mdp.reward(s, a) = step_pay;
            mdp.reward(s, a) += consolation[a];
        }
    }
    normalize_rewards(mdp);
    return mdp;
}

}  // namespace

TabularMdp gen_environment(const EnvParams& params, RngStream& rng) {
    TabularMdp mdp;
    switch (params.family) {
        case EnvFamily::random_stochastic: {
            mdp = make_base(params);
            std::vector<double> row(params.num_states);
            for (int s = 0; s < params.num_states; ++s) {
                for (int a = 0; a < params.num_actions; ++a) {
                    double total = 0.0;
                    for (double& w : row) {
                        w = rng.exponential();
                        total += w;
                    }
                    for (double& w : row) w /= total;
                    mdp.transition.set_row(s, a, row);
                }
            }
            fill_random_rewards(mdp, rng);
            normalize_rewards(mdp);
            break;
        }
        case EnvFamily::deterministic:
            mdp = gen_mixed(params, 0.0, rng);
            break;
        case EnvFamily::variance_dial: {
            if (params.sigma < 0.0 || params.sigma > 1.0) {
                throw ConfigError("gen_environment: sigma must lie in [0,1]");
            }
            mdp = gen_mixed(params, params.sigma, rng);
            break;
        }
        case EnvFamily::chain: {
            mdp = make_base(params);
            // Action 0 walks the chain; every other action restarts. Only the
            // walk pays, 1/H per step.
            for (int s = 0; s < params.num_states; ++s) {
                const int forward = std::min(s + 1, params.num_states - 1);
                for (int a = 0; a < params.num_actions; ++a) {
                    mdp.transition.prob(s, a, a == 0 ? forward : 0) = 1.0;
                }
                mdp.reward(s, 0) = 1.0 / params.horizon;
            }
            break;
        }
    }
    mdp.validate();
    return mdp;
}

ModelClass gen_model_class(const TabularMdp& mdp, int size, double perturbation_scale,
                           RngStream& rng) {
    if (size < 1) throw ConfigError("gen_model_class: size must be >= 1");
    if (size > 1 && perturbation_scale <= 0.0) {
        throw ConfigError("gen_model_class: perturbation scale must be positive, "
                          "members would collide");
    }

    const int S = mdp.num_states, A = mdp.num_actions;
    const int truth_at = size == 1 ? 0 : rng.uniform_int(size);

    ModelClass model_class;
    model_class.truth_index = truth_at;
    model_class.models.reserve(size);

    std::vector<double> row(S);
    for (int i = 0; i < size; ++i) {
        if (i == truth_at) {
            model_class.models.push_back(mdp.transition);
            continue;
        }
        for (int attempt = 0; attempt < 64; ++attempt) {
            TransitionModel member(S, A);
            for (int s = 0; s < S; ++s) {
                for (int a = 0; a < A; ++a) {
                    const auto truth_row = mdp.transition.row(s, a);
                    double total = 0.0;
                    for (int sp = 0; sp < S; ++sp) {
                        row[sp] = truth_row[sp] + perturbation_scale * rng.uniform01();
                        total += row[sp];
                    }
                    for (double& w : row) w /= total;
                    member.set_row(s, a, row);
                }
            }
            const bool collides =
                std::any_of(model_class.models.begin(), model_class.models.end(),
                            [&](const TransitionModel& m) { return m == member; });
            if (!collides) {
                model_class.models.push_back(std::move(member));
                break;
            }
        }
        if (static_cast<int>(model_class.models.size()) != i + 1) {
            throw InvariantError("gen_model_class: could not produce distinct members");
        }
    }
    model_class.validate(mdp);
    return model_class;
}

PolicyClass gen_policy_class(const TabularMdp& mdp, const ModelClass& model_class,
                             int num_random, RngStream& rng) {
    PolicyClass policies;
    policies.policies.push_back(optimal_planning(mdp.transition, mdp).first);
    policies.comparator_index = 0;

    auto push_unique = [&](Policy&& policy) {
        const bool seen = std::any_of(policies.policies.begin(), policies.policies.end(),
                                      [&](const Policy& p) { return p == policy; });
        if (!seen) policies.policies.push_back(std::move(policy));
    };

    for (const auto& model : model_class.models) {
        push_unique(optimal_planning(model, mdp).first);
    }
    for (int i = 0; i < num_random; ++i) {
        Policy policy(mdp.horizon, mdp.num_states);
        for (int h = 0; h < mdp.horizon; ++h) {
            for (int s = 0; s < mdp.num_states; ++s) {
                policy.action(h, s) = rng.uniform_int(mdp.num_actions);
            }
        }
        push_unique(std::move(policy));
    }
    return policies;
}

void scale_rewards(TabularMdp& mdp, double factor) {
    if (!(factor > 0.0)) throw ConfigError("scale_rewards: factor must be positive");
    for (double& r : mdp.rewards) r *= factor;
}

}  // namespace mbrl
