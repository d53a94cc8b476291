#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mbrl/estimation.hpp"
#include "mbrl/mdp.hpp"

namespace mbrl {

/// A finite function class tabulated on a finite point set: values[g][x] >= 0.
struct FunctionClassTable {
    std::vector<std::string> point_labels;
    std::vector<std::vector<double>> values;  // [function][point]

    int num_functions() const { return static_cast<int>(values.size()); }
    int num_points() const {
        return values.empty() ? 0 : static_cast<int>(values.front().size());
    }
    void validate() const;
};

/// The squared-Hellinger discrepancy class of a model family: one row per
/// member (the truth row is identically zero), one column per (s, a).
FunctionClassTable build_psi(const ModelClass& model_class, const TabularMdp& mdp);

struct EluderResult {
    int dimension = 0;
    std::vector<int> witness_points;     // point index chosen at each step
    std::vector<int> witness_functions;  // a witnessing function per step
    double epsilon = 0.0;
    bool exact = false;  // exhaustive search vs greedy lower bound
};

enum class EluderMode { exhaustive, greedy };

/// Length of the longest epsilon-independent point sequence under
/// absolute-sum budgets: step t needs some g with sum_{l<t} |g(x_l)| <= eps
/// and |g(x_t)| > eps. Exhaustive mode is exact but limited to tables of at
/// most 12 points and 12 functions; greedy mode returns a valid witness and
/// hence a lower bound.
EluderResult eluder_dim_l1(const FunctionClassTable& table, double epsilon,
                           EluderMode mode);

/// Same search under squared-sum budgets (sum |g|^2 <= eps^2). Kept as a test
/// oracle for the l1 <= l2 comparison, not part of the primary surface.
EluderResult eluder_dim_l2(const FunctionClassTable& table, double epsilon,
                           EluderMode mode);

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Value-difference bound: V(0) under the truth minus V(0) under `model` is
/// at most the occupancy-weighted sum of one-step mean disagreements of the
/// model's own value function. Both sides exact by dynamic programming.
InequalityCheck check_simulation_lemma(const TabularMdp& mdp, const TransitionModel& model,
                                       const Policy& policy);

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
    bool exact = false;  // rhs from exhaustive enumeration (vs Monte Carlo)
};

/// Return-variance identity: the occupancy-weighted sum of one-step value
/// variances equals the trajectory-return variance. The right side comes from
/// exhaustive path enumeration when the support has at most `max_exact_paths`
/// paths, otherwise from Monte Carlo sampling with `mc_samples` rollouts.
IdentityCheck check_change_of_variance(const TabularMdp& mdp, const Policy& policy,
                                       std::uint64_t max_exact_paths = 100000,
                                       int mc_samples = 200000);

/// Number of positive-probability paths of `policy` under `model`, saturated
/// at `cap`.
std::uint64_t count_support_paths(const TransitionModel& model, const TabularMdp& mdp,
                                  const Policy& policy, std::uint64_t cap);

struct ReturnMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact return mean/variance by enumerating every positive-probability path.
/// Throws ConfigError when the path count exceeds `max_paths`.
ReturnMoments enumerate_return_moments(const TransitionModel& model, const TabularMdp& mdp,
                                       const Policy& policy,
                                       std::uint64_t max_paths = 100000);

/// Episodes whose cumulative discrepancy mass jumps by more than 4x:
/// (lambda + sum through k) / (lambda + sum through k-1) > 4, where
/// trace[k][h] holds the per-step discrepancy of episode k. Requires
/// lambda > 1.
std::vector<int> bad_episode_set(const std::vector<std::vector<double>>& trace,
                                 double lambda);

/// Variant taking one trace per candidate function and flagging an episode
/// when the ratio criterion fires for any of them.
std::vector<int> bad_episode_set_sup(
    const std::vector<std::vector<std::vector<double>>>& traces, double lambda);

/// Size budget for the bad-episode set: 13 * ln^2(4*lambda*K*H) * de1.
double bad_episode_budget(double lambda, int K, int H, int de1);

struct RecursionCheck {
    bool hypotheses_hold = false;   // a in (0, G/2), C_m <= K*H, recursion step
    bool conclusion_holds = false;  // C_0 <= 4*G
};

/// Verifies the geometric-recursion bound on a sequence C_0..C_N with
/// N = ceil(log2(K*H/G)): whenever C_m <= 2^m*G + sqrt(a*C_{m+1}) + a and
/// C_m <= K*H hold for all m, the conclusion C_0 <= 4*G must follow.
RecursionCheck check_recursion_lemma(double G, double a, std::span<const double> C,
                                     int K, int H);

}  // namespace mbrl
