#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mbrl/estimation.hpp"
#include "mbrl/mdp.hpp"

namespace mbrl {

/// Finite policy class for pessimistic planning.
struct PolicyClass {
    std::vector<Policy> policies;
    std::optional<int> comparator_index;  // declared comparator, when any

    int size() const { return static_cast<int>(policies.size()); }
    void validate(const TabularMdp& mdp) const;
};

/// Data-collection rule for offline datasets. The rule sees the episode
/// index, the step, the current state and everything collected so far, and
/// may act adversarially; only the transitions themselves must follow the
/// environment.
struct BehaviorContext {
    int episode = 0;
    int step = 0;
    int state = 0;
    const TransitionDataset& history;
};
using BehaviorRule = std::function<int(const BehaviorContext&)>;

TransitionDataset generate_offline_dataset(const TabularMdp& mdp, const Policy& behavior,
                                           int K, RngStream& rng);
TransitionDataset generate_offline_dataset(const TabularMdp& mdp,
                                           const BehaviorRule& behavior, int K,
                                           RngStream& rng);

struct PessimisticPlan {
    int policy_index = 0;
    double value = 0.0;                   // max-min objective at the chosen policy
    std::vector<double> per_policy_min;   // min over members, per policy
};

/// Exact max-min over the (policy, member) table: evaluate every pair by
/// dynamic programming, take the min over members per policy, then the argmax
/// over policies (ties toward the lowest policy index).
PessimisticPlan pessimistic_plan(const VersionSpace& vs, const ModelClass& model_class,
                                 const PolicyClass& policies, const TabularMdp& mdp);

/// Data-dependent single-policy concentrability: the max over steps h and
/// members P of the ratio between the comparator-occupancy expectation of
/// H^2(P || truth) and its empirical average over the dataset's h-th column.
/// (0, 0) ratios are skipped; a positive numerator over a zero denominator
/// reports +infinity, flagging non-coverage. No competing member at all
/// gives 0.
double concentrability(const TransitionDataset& data, const ModelClass& model_class,
                       const TabularMdp& mdp, const Policy& comparator);

struct OfflineResult {
    int chosen_policy = 0;
    double pessimistic_value = 0.0;
    std::vector<double> per_policy_min_values;
    double chosen_true_value = 0.0;
    double comparator_value = 0.0;
    double performance_gap = 0.0;   // comparator minus chosen, both under the truth
    double concentrability = 0.0;   // +inf when coverage is violated
    double beta = 0.0;
    int version_space_size = 0;
};

/// Offline pipeline: version space at beta = 4*ln(|class|/delta), pessimistic
/// max-min planning, exact gap against the comparator (the DP optimum under
/// the truth unless one is declared), and the concentrability coefficient.
OfflineResult run_cppo(const TabularMdp& mdp, const ModelClass& model_class,
                       const PolicyClass& policies, const TransitionDataset& data,
                       double delta, const std::optional<Policy>& comparator = {});

}  // namespace mbrl
