#pragma once

#include <cstdint>
#include <vector>

#include "mbrl/estimation.hpp"
#include "mbrl/mdp.hpp"

namespace mbrl {

struct OptimisticPlan {
    Policy policy;
    int model_index = 0;
    double value = 0.0;
};

/// Joint argmax over (policy, version-space member) of the planned value:
/// exact dynamic programming per member, ties toward the lowest model index.
OptimisticPlan optimistic_plan(const VersionSpace& vs, const ModelClass& model_class,
                               const TabularMdp& mdp);

struct EpisodeLog {
    int episode = 0;
    Policy policy;
    int model_index = 0;
    double optimistic_value = 0.0;
    double true_value = 0.0;        // exact value of the played policy under the truth
    double realized_return = 0.0;   // diagnostic only
    double instantaneous_regret = 0.0;
    int version_space_size = 0;
    bool truth_in_version_space = false;
    double policy_variance = 0.0;   // exact return variance of the played policy

    bool operator==(const EpisodeLog&) const = default;
};

struct RunRecord {
    std::vector<EpisodeLog> episodes;
    std::vector<double> cumulative_regret;  // prefix sums of instantaneous regret
    double beta = 0.0;
    double delta = 0.0;
    int num_episodes = 0;
    std::uint64_t seed = 0;
    std::uint64_t environment_fingerprint = 0;
    double optimal_value = 0.0;  // exact V* under the truth

    bool operator==(const RunRecord&) const = default;
};

/// Runs the optimistic episodic loop for K episodes: plan on the version
/// space of all data collected so far (the full class before any data),
/// execute the optimistic policy, append the trajectory, repeat. The
/// threshold beta = 4*ln(K*|class|/delta) is fixed once for the whole run.
/// Requires a realizable class and validated MDP.
RunRecord run_ombrl(const TabularMdp& mdp, const ModelClass& model_class, int K,
                    double delta, RngStream& rng, std::uint64_t seed_echo = 0);

}  // namespace mbrl
