#include "mbrl/offline.hpp"

#include <cmath>
#include <limits>

namespace mbrl {

void PolicyClass::validate(const TabularMdp& mdp) const {
    if (policies.empty()) throw InvariantError("policy class: empty");
    for (const auto& policy : policies) policy.validate(mdp);
    if (comparator_index && (*comparator_index < 0 || *comparator_index >= size())) {
        throw InvariantError("policy class: comparator index out of range");
    }
}

TransitionDataset generate_offline_dataset(const TabularMdp& mdp, const Policy& behavior,
                                           int K, RngStream& rng) {
    behavior.validate(mdp);
    if (K < 1) throw ConfigError("generate_offline_dataset: K must be >= 1");
    TransitionDataset data;
    for (int k = 0; k < K; ++k) {
        data.append_trajectory(sample_trajectory(mdp, behavior, rng));
    }
    return data;
}

TransitionDataset generate_offline_dataset(const TabularMdp& mdp,
                                           const BehaviorRule& behavior, int K,
                                           RngStream& rng) {
    if (K < 1) throw ConfigError("generate_offline_dataset: K must be >= 1");
    TransitionDataset data;
    std::vector<TransitionTuple> steps(mdp.horizon);
    for (int k = 0; k < K; ++k) {
        int s = mdp.start_state;
        for (int h = 0; h < mdp.horizon; ++h) {
            const int a = behavior(BehaviorContext{k, h, s, data});
            if (a < 0 || a >= mdp.num_actions) {
                throw InvariantError("generate_offline_dataset: behavior rule returned "
                                     "an action out of range");
            }
            const int sp = rng.categorical(mdp.transition.row(s, a));
            steps[h] = {s, a, sp};
            s = sp;
        }
        data.append_trajectory(steps);
    }
    return data;
}

PessimisticPlan pessimistic_plan(const VersionSpace& vs, const ModelClass& model_class,
                                 const PolicyClass& policies, const TabularMdp& mdp) {
    if (vs.member_indices.empty()) {
        throw InvariantError("pessimistic_plan: empty version space");
    }
    policies.validate(mdp);

    PessimisticPlan plan;
    plan.per_policy_min.reserve(policies.policies.size());
    for (int p = 0; p < policies.size(); ++p) {
        double worst = 0.0;
        bool first = true;
        for (int i : vs.member_indices) {
            const double value =
                policy_evaluation(model_class.models[i], mdp, policies.policies[p])
                    .value(0, mdp.start_state);
            if (first || value < worst) {
                worst = value;
                first = false;
            }
        }
        plan.per_policy_min.push_back(worst);
        if (p == 0 || worst > plan.value) {
            plan.value = worst;
            plan.policy_index = p;
        }
    }
    return plan;
}

double concentrability(const TransitionDataset& data, const ModelClass& model_class,
                       const TabularMdp& mdp, const Policy& comparator) {
    model_class.validate(mdp);
    if (!model_class.realizable(mdp)) {
        throw InvariantError("concentrability: model class must contain the truth");
    }
    data.validate(mdp);
    const std::size_t K = data.num_trajectories();
    if (K == 0) throw InvariantError("concentrability: empty dataset");

    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    const OccupancyMeasure occ = occupancy(mdp.transition, mdp, comparator);

    // Empirical (s, a) frequencies of the h-th column of the dataset.
    std::vector<double> freq(static_cast<std::size_t>(H) * S * A, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const auto traj = data.trajectory(k);
        for (int h = 0; h < H; ++h) {
            freq[(static_cast<std::size_t>(h) * S + traj[h].state) * A + traj[h].action] +=
                1.0 / static_cast<double>(K);
        }
    }

    double worst = 0.0;
    bool any = false;
    for (int m = 0; m < model_class.size(); ++m) {
        if (m == *model_class.truth_index) continue;
        // Per-pair discrepancies are shared across h.
        std::vector<double> hsq(static_cast<std::size_t>(S) * A, 0.0);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                hsq[static_cast<std::size_t>(s) * A + a] = hellinger_sq(
                    model_class.models[m].row(s, a), mdp.transition.row(s, a));
            }
        }
        for (int h = 0; h < H; ++h) {
            double numerator = 0.0, denominator = 0.0;
            for (int s = 0; s < S; ++s) {
                for (int a = 0; a < A; ++a) {
                    const double d = hsq[static_cast<std::size_t>(s) * A + a];
                    numerator += occ.at(h, s, a) * d;
                    denominator += freq[(static_cast<std::size_t>(h) * S + s) * A + a] * d;
                }
            }
            if (numerator == 0.0 && denominator == 0.0) continue;
            if (denominator == 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            const double ratio = numerator / denominator;
            if (!any || ratio > worst) {
                worst = ratio;
                any = true;
            }
        }
    }
    return any ? worst : 0.0;
}

OfflineResult run_cppo(const TabularMdp& mdp, const ModelClass& model_class,
                       const PolicyClass& policies, const TransitionDataset& data,
                       double delta, const std::optional<Policy>& comparator) {
    mdp.validate();
    model_class.validate(mdp);
    policies.validate(mdp);
    data.validate(mdp);

    OfflineResult result;
    result.beta = beta_threshold(BetaMode::offline_finite, model_class.size(), 0, delta);
    const VersionSpace vs = build_version_space(model_class, data, result.beta);
    result.version_space_size = vs.size();

    PessimisticPlan plan = pessimistic_plan(vs, model_class, policies, mdp);
    result.chosen_policy = plan.policy_index;
    result.pessimistic_value = plan.value;
    result.per_policy_min_values = std::move(plan.per_policy_min);

    Policy reference;
    if (comparator) {
        reference = *comparator;
        reference.validate(mdp);
    } else if (policies.comparator_index) {
        reference = policies.policies[*policies.comparator_index];
    } else {
        reference = optimal_planning(mdp.transition, mdp).first;
    }

    result.chosen_true_value =
        policy_evaluation(mdp.transition, mdp, policies.policies[result.chosen_policy])
            .value(0, mdp.start_state);
    result.comparator_value =
        policy_evaluation(mdp.transition, mdp, reference).value(0, mdp.start_state);
    result.performance_gap = result.comparator_value - result.chosen_true_value;
    result.concentrability = concentrability(data, model_class, mdp, reference);
    return result;
}

}  // namespace mbrl
