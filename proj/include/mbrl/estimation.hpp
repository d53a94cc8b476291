#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mbrl/divergence.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/rng.hpp"

namespace mbrl {

/// Log-likelihood value with an explicit "impossible" state standing in for
/// log 0. Impossible orders below every finite value and absorbs through
/// sums, avoiding -inf arithmetic.
struct LogLik {
    double value = 0.0;
    bool possible = true;

    static LogLik impossible() { return {0.0, false}; }

    LogLik& operator+=(const LogLik& other) {
        possible = possible && other.possible;
        if (possible) value += other.value;
        return *this;
    }

    friend bool operator<(const LogLik& a, const LogLik& b) {
        if (a.possible != b.possible) return !a.possible;
        if (!a.possible) return false;  // impossible values tie
        return a.value < b.value;
    }
    bool operator==(const LogLik&) const = default;
};

struct TransitionTuple {
    int state = 0;
    int action = 0;
    int next_state = 0;

    bool operator==(const TransitionTuple&) const = default;
};

/// Ordered (s, a, s') tuples partitioned into trajectories of equal length.
class TransitionDataset {
  public:
    TransitionDataset() = default;

    void append_trajectory(const Trajectory& trajectory);
    void append_trajectory(std::span<const TransitionTuple> steps);

    std::span<const TransitionTuple> tuples() const { return tuples_; }
    std::span<const TransitionTuple> trajectory(std::size_t k) const;
    std::size_t num_tuples() const { return tuples_.size(); }
    std::size_t num_trajectories() const { return starts_.size(); }

    /// Checks index ranges against an MDP and that every trajectory has
    /// length exactly mdp.horizon.
    void validate(const TabularMdp& mdp) const;

    bool operator==(const TransitionDataset&) const = default;

  private:
    std::vector<TransitionTuple> tuples_;
    std::vector<std::size_t> starts_;  // first tuple index of each trajectory
};

/// A finite indexed family of candidate kernels, optionally flagging which
/// member is the ground truth (realizability).
struct ModelClass {
    std::vector<TransitionModel> models;
    std::optional<int> truth_index;

    int size() const { return static_cast<int>(models.size()); }

    /// Nonempty; when truth_index is set, that member must equal the MDP's
    /// kernel row-for-row.
    void validate(const TabularMdp& mdp) const;
    bool realizable(const TabularMdp& mdp) const;
};

/// Indices of models whose log-likelihood is within beta of the maximum.
struct VersionSpace {
    std::vector<int> member_indices;  // ascending
    double beta = 0.0;
    LogLik max_loglik;

    int size() const { return static_cast<int>(member_indices.size()); }
    bool contains(int model_index) const;
};

/// Sum of log model(s' | s, a) over the dataset; impossible when any observed
/// transition has model probability zero. Empty dataset gives 0.
LogLik log_likelihood(const TransitionModel& model, const TransitionDataset& data);

/// Argmax of log_likelihood over the class, ties broken toward the lowest
/// index.
int mle(const ModelClass& model_class, const TransitionDataset& data);

/// Members with log-likelihood >= max - beta (non-strict, no epsilon). The
/// maximizer always qualifies, so the result is nonempty.
VersionSpace build_version_space(const ModelClass& model_class,
                                 const TransitionDataset& data, double beta);

enum class BetaMode { offline_finite, online_finite };

/// Likelihood-ratio threshold: 4*ln(|class|/delta) offline,
/// 4*ln(K*|class|/delta) online.
double beta_threshold(BetaMode mode, int class_size, int num_episodes, double delta);

struct MleGeneralizationReport {
    int trials = 0;
    int truth_escaped = 0;          // trials where the truth left the version space
    int hellinger_bound_failed = 0; // trials where some member broke the summed bound
    double beta = 0.0;              // ln(|class|/delta)
    double version_space_threshold = 0.0;  // 4*beta
    double hellinger_budget = 0.0;         // 22*beta
};

/// Monte Carlo check of the finite-class MLE generalization guarantee: over
/// `trials` independent K-trajectory datasets drawn with `behavior`, counts
/// how often (1) the truth leaves the version space built at threshold
/// 4*ln(|class|/delta) and (2) some member's summed squared Hellinger error
/// over the observed (s, a) pairs exceeds 22*ln(|class|/delta).
MleGeneralizationReport check_mle_generalization(const TabularMdp& mdp,
                                                 const ModelClass& model_class,
                                                 const Policy& behavior, int K,
                                                 double delta, int trials,
                                                 RngStream& rng);

/// Summed squared Hellinger distance between `model` and the truth kernel
/// along the (s, a) pairs observed in `data`.
double dataset_hellinger_sum(const TransitionModel& model, const TabularMdp& mdp,
                             const TransitionDataset& data);

}  // namespace mbrl
