#include "mbrl/online.hpp"

#include <cmath>

#include "mbrl/io.hpp"

namespace mbrl {

OptimisticPlan optimistic_plan(const VersionSpace& vs, const ModelClass& model_class,
                               const TabularMdp& mdp) {
    if (vs.member_indices.empty()) {
        throw InvariantError("optimistic_plan: empty version space");
    }
    OptimisticPlan best;
    bool first = true;
    for (int i : vs.member_indices) {
        auto [policy, tables] = optimal_planning(model_class.models[i], mdp);
        const double value = tables.value(0, mdp.start_state);
        if (first || value > best.value) {
            best.policy = std::move(policy);
            best.model_index = i;
            best.value = value;
            first = false;
        }
    }
    return best;
}

RunRecord run_ombrl(const TabularMdp& mdp, const ModelClass& model_class, int K,
                    double delta, RngStream& rng, std::uint64_t seed_echo) {
    if (K < 1) throw ConfigError("run_ombrl: K must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ConfigError("run_ombrl: delta must lie in (0,1)");
    }
    mdp.validate();
    model_class.validate(mdp);
    if (!model_class.realizable(mdp)) {
        throw InvariantError("run_ombrl: model class must contain the truth");
    }

    RunRecord record;
    record.num_episodes = K;
    record.delta = delta;
    record.seed = seed_echo;
    record.beta = beta_threshold(BetaMode::online_finite, model_class.size(), K, delta);
    record.environment_fingerprint = environment_fingerprint(mdp);

    const auto [optimal_policy, optimal_tables] = optimal_planning(mdp.transition, mdp);
    record.optimal_value = optimal_tables.value(0, mdp.start_state);

    // Likelihoods accumulate tuple-by-tuple in dataset order, so the running
    // sums match a from-scratch rebuild bit-for-bit.
    TransitionDataset data;
    std::vector<LogLik> loglik(model_class.models.size());

    double cumulative = 0.0;
    for (int k = 0; k < K; ++k) {
        VersionSpace vs;
        vs.beta = record.beta;
        vs.max_loglik = *std::max_element(loglik.begin(), loglik.end());
        for (int i = 0; i < model_class.size(); ++i) {
            const bool member =
                vs.max_loglik.possible
                    ? (loglik[i].possible && loglik[i].value >= vs.max_loglik.value - vs.beta)
                    : true;
            if (member) vs.member_indices.push_back(i);
        }

        OptimisticPlan plan = optimistic_plan(vs, model_class, mdp);
        const Trajectory trajectory = sample_trajectory(mdp, plan.policy, rng);

        EpisodeLog log;
        log.episode = k;
        log.model_index = plan.model_index;
        log.optimistic_value = plan.value;
        log.true_value =
            policy_evaluation(mdp.transition, mdp, plan.policy).value(0, mdp.start_state);
        log.realized_return = trajectory_return(trajectory);
        log.instantaneous_regret = record.optimal_value - log.true_value;
        log.version_space_size = vs.size();
        log.truth_in_version_space = vs.contains(*model_class.truth_index);
        log.policy_variance = return_variance(mdp.transition, mdp, plan.policy);
        log.policy = std::move(plan.policy);

        cumulative += log.instantaneous_regret;
        record.cumulative_regret.push_back(cumulative);
        record.episodes.push_back(std::move(log));

        for (const auto& step : trajectory.steps) {
            for (int i = 0; i < model_class.size(); ++i) {
                if (!loglik[i].possible) continue;
                const double p =
                    model_class.models[i].prob(step.state, step.action, step.next_state);
                if (p <= 0.0) {
                    loglik[i] = LogLik::impossible();
                } else {
                    loglik[i].value += std::log(p);
                }
            }
        }
        data.append_trajectory(trajectory);
    }
    return record;
}

}  // namespace mbrl
