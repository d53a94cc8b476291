#include "mbrl/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbrl {

namespace {

void check_same_length(std::span<const double> p, std::span<const double> q,
                       const char* op) {
    if (p.size() != q.size()) {
        std::ostringstream msg;
        msg << op << ": outcome sets differ, |p|=" << p.size() << " |q|=" << q.size();
        throw DimensionError(msg.str());
    }
}

}  // namespace

double hellinger_sq(std::span<const double> p, std::span<const double> q) {
    check_same_length(p, q, "hellinger_sq");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        sum += d * d;
    }
    return 0.5 * sum;
}

double triangle_disc(std::span<const double> p, std::span<const double> q) {
    check_same_length(p, q, "triangle_disc");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double denom = p[i] + q[i];
        if (denom == 0.0) continue;
        const double d = p[i] - q[i];
        sum += d * d / denom;
    }
    return sum;
}

double variance_operator(const TransitionModel& model, std::span<const double> f,
                         int s, int a) {
    const auto row = model.row(s, a);
    check_same_length(row, f, "variance_operator");
    double mean = 0.0, mean_sq = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        mean += row[i] * f[i];
        mean_sq += row[i] * f[i] * f[i];
    }
    return std::max(0.0, mean_sq - mean * mean);
}

double ValueDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * values[i];
    return m;
}

double ValueDistribution::variance() const {
    const double m = mean();
    double var = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - m;
        var += weights[i] * d * d;
    }
    return std::max(0.0, var);
}

std::pair<ValueDistribution, ValueDistribution> pushforward_pair(
    std::span<const double> p, std::span<const double> q, std::span<const double> f) {
    check_same_length(p, q, "pushforward_pair");
    check_same_length(p, f, "pushforward_pair");

    std::vector<double> grid(f.begin(), f.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    ValueDistribution fp, fq;
    fp.values = grid;
    fq.values = grid;
    fp.weights.assign(grid.size(), 0.0);
    fq.weights.assign(grid.size(), 0.0);
    for (std::size_t s = 0; s < f.size(); ++s) {
        const auto it = std::lower_bound(grid.begin(), grid.end(), f[s]);
        const std::size_t bucket = static_cast<std::size_t>(it - grid.begin());
        fp.weights[bucket] += p[s];
        fq.weights[bucket] += q[s];
    }
    return {std::move(fp), std::move(fq)};
}

MeanToVarianceCheck check_mean_to_variance(const ValueDistribution& f,
                                           const ValueDistribution& g) {
    if (f.values != g.values) {
        throw DimensionError("check_mean_to_variance: distributions must share a grid");
    }
    for (double x : f.values) {
        if (x < 0.0 || x > 1.0) {
            throw InvariantError("check_mean_to_variance: grid values must lie in [0,1]");
        }
    }
    validate_prob_vector(f.weights, "check_mean_to_variance: f");
    validate_prob_vector(g.weights, "check_mean_to_variance: g");

    const double disc = triangle_disc(f.weights, g.weights);
    MeanToVarianceCheck check;
    check.lhs = std::abs(f.mean() - g.mean());
    check.rhs = 4.0 * std::sqrt(f.variance() * disc) + 5.0 * disc;
    check.holds = check.lhs <= check.rhs + 1e-12;
    return check;
}

}  // namespace mbrl
