#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mbrl/errors.hpp"
#include "mbrl/rng.hpp"

namespace mbrl {

/// Tolerance for probability-vector normalization checks.
inline constexpr double kDistributionTol = 1e-12;
/// Tolerance for exact algebraic identities (Bellman residuals, occupancy
/// pushforward, variance identities).
inline constexpr double kIdentityTol = 1e-10;

/// Throws InvariantError unless `weights` is a probability vector: entries
/// nonnegative and summing to 1 within kDistributionTol.
void validate_prob_vector(std::span<const double> weights, const char* context);

/// A transition kernel: one distribution over next states per (state, action).
/// Time-homogeneous by construction (a single kernel, no step index).
class TransitionModel {
  public:
    TransitionModel() = default;
    TransitionModel(int num_states, int num_actions)
        : num_states_(num_states),
          num_actions_(num_actions),
          probs_(static_cast<std::size_t>(num_states) * num_actions * num_states, 0.0) {}

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double prob(int s, int a, int next) const { return probs_[index(s, a, next)]; }
    double& prob(int s, int a, int next) { return probs_[index(s, a, next)]; }

    std::span<const double> row(int s, int a) const {
        return {probs_.data() + index(s, a, 0), static_cast<std::size_t>(num_states_)};
    }
    void set_row(int s, int a, std::span<const double> weights);

    /// Checks every row is a probability vector.
    void validate() const;

    bool operator==(const TransitionModel&) const = default;

  private:
    std::size_t index(int s, int a, int next) const {
        return (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next;
    }

    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> probs_;
};

/// Finite-horizon MDP with known deterministic reward, a fixed start state
/// and a time-homogeneous ground-truth transition kernel. Rewards are
/// normalized trajectory-wise: the best reachable path collects at most 1.
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int start_state = 0;
    TransitionModel transition;       // ground truth kernel
    std::vector<double> rewards;      // [s][a]

    double reward(int s, int a) const {
        return rewards[static_cast<std::size_t>(s) * num_actions + a];
    }
    double& reward(int s, int a) {
        return rewards[static_cast<std::size_t>(s) * num_actions + a];
    }

    /// Validates shapes, row distributions, nonnegative rewards and the
    /// trajectory-reward normalization (max reachable path reward <= 1).
    void validate() const;
};

/// Deterministic non-stationary policy: an action for every (step, state).
class Policy {
  public:
    Policy() = default;
    Policy(int horizon, int num_states)
        : horizon_(horizon),
          num_states_(num_states),
          actions_(static_cast<std::size_t>(horizon) * num_states, 0) {}

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }

    int action(int h, int s) const { return actions_[index(h, s)]; }
    int& action(int h, int s) { return actions_[index(h, s)]; }

    void validate(const TabularMdp& mdp) const;

    bool operator==(const Policy&) const = default;

  private:
    std::size_t index(int h, int s) const {
        return static_cast<std::size_t>(h) * num_states_ + s;
    }

    int horizon_ = 0;
    int num_states_ = 0;
    std::vector<int> actions_;
};

/// Backward-induction value and Q tables. V is defined for h in [0, H]
/// (V(H, .) = 0), Q for h in [0, H-1].
struct ValueTables {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> v;  // [(H+1)][s]
    std::vector<double> q;  // [h][s][a]

    double value(int h, int s) const {
        return v[static_cast<std::size_t>(h) * num_states + s];
    }
    double qvalue(int h, int s, int a) const {
        return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

/// Step-indexed state-action distribution d(h, s, a) induced by a policy.
struct OccupancyMeasure {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> d;  // [h][s][a]

    double at(int h, int s, int a) const {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double& at(int h, int s, int a) {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

struct TrajectoryStep {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;

    bool operator==(const TrajectoryStep&) const = default;
};

/// One rollout of length exactly H starting at the MDP's start state.
struct Trajectory {
    std::vector<TrajectoryStep> steps;

    bool operator==(const Trajectory&) const = default;
};

double trajectory_return(const Trajectory& trajectory);

/// Evaluates `policy` by backward induction under `model`, with rewards,
/// horizon and start state taken from `mdp`. Throws DimensionError when the
/// model's shape disagrees with the MDP.
ValueTables policy_evaluation(const TransitionModel& model, const TabularMdp& mdp,
                              const Policy& policy);

/// Exact dynamic programming: returns the optimal policy under `model`
/// (argmax ties broken toward the lowest action index) and its tables.
std::pair<Policy, ValueTables> optimal_planning(const TransitionModel& model,
                                                const TabularMdp& mdp);

/// Forward recursion from the point mass at the start state.
OccupancyMeasure occupancy(const TransitionModel& model, const TabularMdp& mdp,
                           const Policy& policy);

/// Samples one trajectory from the ground-truth kernel.
Trajectory sample_trajectory(const TabularMdp& mdp, const Policy& policy, RngStream& rng);

/// Variance of the trajectory return of `policy` under `model`, computed via
/// the step-wise variance decomposition (occupancy-weighted one-step
/// variances of the next-step value function).
double return_variance(const TransitionModel& model, const TabularMdp& mdp,
                       const Policy& policy);

/// Exact maximum of the path reward over positive-probability paths of the
/// ground-truth kernel (max-over-support dynamic program).
double max_trajectory_reward(const TabularMdp& mdp);

}  // namespace mbrl
