#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mbrl/mdp.hpp"

namespace mbrl {

/// Squared Hellinger distance: 0.5 * sum_x (sqrt(p(x)) - sqrt(q(x)))^2.
/// Symmetric, in [0, 1], zero exactly on equal inputs.
double hellinger_sq(std::span<const double> p, std::span<const double> q);

/// Triangular discrimination: sum_x (p(x) - q(x))^2 / (p(x) + q(x)),
/// with 0/0 summands contributing 0. Symmetric, in [0, 2], and bounded by
/// four times the squared Hellinger distance.
double triangle_disc(std::span<const double> p, std::span<const double> q);

/// One-step variance of f(s') under model(s, a):
/// E[f(s')^2] - (E[f(s')])^2, clamped at 0 against rounding.
double variance_operator(const TransitionModel& model, std::span<const double> f,
                         int s, int a);

/// A distribution over a finite grid of real values.
struct ValueDistribution {
    std::vector<double> values;   // grid, strictly increasing
    std::vector<double> weights;  // probability of each grid point

    double mean() const;
    double variance() const;
};

/// Pushforward of the map s' -> f(s') under two rows sharing a state space.
/// Both outputs live on the common grid of exactly-attained f values
/// (no binning).
std::pair<ValueDistribution, ValueDistribution> pushforward_pair(
    std::span<const double> p, std::span<const double> q, std::span<const double> f);

struct MeanToVarianceCheck {
    double lhs = 0.0;   // |E_f[x] - E_g[x]|
    double rhs = 0.0;   // 4*sqrt(Var_f * D(f||g)) + 5*D(f||g)
    bool holds = false; // lhs <= rhs + 1e-12
};

/// Checks the mean-difference bound for two distributions over the same value
/// grid in [0, 1]. Rejects grids with values outside [0, 1].
MeanToVarianceCheck check_mean_to_variance(const ValueDistribution& f,
                                           const ValueDistribution& g);

}  // namespace mbrl
