#include "mbrl/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace mbrl {

void FunctionClassTable::validate() const {
    const std::size_t width = point_labels.size();
    for (const auto& row : values) {
        if (row.size() != width) {
            throw DimensionError("function class table: ragged rows");
        }
        for (double v : row) {
            if (v < 0.0 || !std::isfinite(v)) {
                throw InvariantError("function class table: entries must be nonnegative");
            }
        }
    }
}

FunctionClassTable build_psi(const ModelClass& model_class, const TabularMdp& mdp) {
    model_class.validate(mdp);
    FunctionClassTable table;
    table.point_labels.reserve(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            std::ostringstream label;
            label << "s" << s << ":a" << a;
            table.point_labels.push_back(label.str());
        }
    }
    for (const auto& model : model_class.models) {
        std::vector<double> row;
        row.reserve(table.point_labels.size());
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                row.push_back(hellinger_sq(mdp.transition.row(s, a), model.row(s, a)));
            }
        }
        table.values.push_back(std::move(row));
    }
    return table;
}

namespace {

constexpr int kEluderExhaustiveLimit = 12;

// Shared search for both norms. Powers: p=1 compares plain sums against eps,
// p=2 compares squared sums against eps^2; the exceedance test is |g(x)| > eps
// in both cases. Any independent sequence visits distinct points (a witness
// for a repeated point would already have spent more than its budget on the
// first visit), so the exhaustive search walks the subset lattice: a subset is
// reachable if some insertion order justifies every step, and feasibility of
// one more insertion depends on the subset only.
EluderResult eluder_search(const FunctionClassTable& table, double epsilon, int p,
                           EluderMode mode) {
    table.validate();
    if (epsilon <= 0.0) throw ConfigError("eluder dimension: epsilon must be positive");

    const int num_points = table.num_points();
    const int num_funcs = table.num_functions();
    EluderResult result;
    result.epsilon = epsilon;

    const double budget = (p == 1) ? epsilon : epsilon * epsilon;
    auto term = [&](int g, int x) {
        const double v = table.values[g][x];
        return (p == 1) ? v : v * v;
    };

    if (mode == EluderMode::greedy) {
        std::vector<double> sums(num_funcs, 0.0);
        std::vector<char> used(num_points, 0);
        bool extended = true;
        while (extended) {
            extended = false;
            for (int x = 0; x < num_points && !extended; ++x) {
                if (used[x]) continue;
                for (int g = 0; g < num_funcs; ++g) {
                    if (sums[g] <= budget && table.values[g][x] > epsilon) {
                        result.witness_points.push_back(x);
                        result.witness_functions.push_back(g);
                        used[x] = 1;
                        for (int gg = 0; gg < num_funcs; ++gg) sums[gg] += term(gg, x);
                        extended = true;
                        break;
                    }
                }
            }
        }
        result.dimension = static_cast<int>(result.witness_points.size());
        result.exact = false;
        return result;
    }

    if (num_points > kEluderExhaustiveLimit || num_funcs > kEluderExhaustiveLimit) {
        std::ostringstream msg;
        msg << "eluder dimension: exhaustive mode limited to " << kEluderExhaustiveLimit
            << " points and " << kEluderExhaustiveLimit << " functions, got "
            << num_points << " points and " << num_funcs << " functions";
        throw ConfigError(msg.str());
    }

    const std::size_t num_masks = std::size_t{1} << num_points;
    std::vector<char> reachable(num_masks, 0);
    std::vector<std::uint32_t> prev_mask(num_masks, 0);
    std::vector<std::int8_t> added_point(num_masks, -1);
    std::vector<std::int8_t> witness_func(num_masks, -1);
    reachable[0] = 1;

    // Per-function sums over the subset, filled incrementally from the subset
    // without its lowest bit.
    std::vector<double> sums(num_masks * static_cast<std::size_t>(num_funcs), 0.0);
    std::size_t best_mask = 0;
    int best_size = 0;

    for (std::size_t mask = 1; mask < num_masks; ++mask) {
        const int low = std::countr_zero(mask);
        const std::size_t rest = mask & (mask - 1);
        for (int g = 0; g < num_funcs; ++g) {
            sums[mask * num_funcs + g] = sums[rest * num_funcs + g] + term(g, low);
        }
    }
    for (std::size_t mask = 0; mask < num_masks; ++mask) {
        if (!reachable[mask]) continue;
        const int size = std::popcount(mask);
        if (size > best_size) {
            best_size = size;
            best_mask = mask;
        }
        for (int x = 0; x < num_points; ++x) {
            const std::size_t bit = std::size_t{1} << x;
            if (mask & bit) continue;
            const std::size_t next = mask | bit;
            if (reachable[next]) continue;
            for (int g = 0; g < num_funcs; ++g) {
                if (sums[mask * num_funcs + g] <= budget && table.values[g][x] > epsilon) {
                    reachable[next] = 1;
                    prev_mask[next] = static_cast<std::uint32_t>(mask);
                    added_point[next] = static_cast<std::int8_t>(x);
                    witness_func[next] = static_cast<std::int8_t>(g);
                    break;
                }
            }
        }
    }

    std::size_t mask = best_mask;
    while (mask != 0) {
        result.witness_points.push_back(added_point[mask]);
        result.witness_functions.push_back(witness_func[mask]);
        mask = prev_mask[mask];
    }
    std::reverse(result.witness_points.begin(), result.witness_points.end());
    std::reverse(result.witness_functions.begin(), result.witness_functions.end());
    result.dimension = best_size;
    result.exact = true;
    return result;
}

}  // namespace

EluderResult eluder_dim_l1(const FunctionClassTable& table, double epsilon,
                           EluderMode mode) {
    return eluder_search(table, epsilon, 1, mode);
}

EluderResult eluder_dim_l2(const FunctionClassTable& table, double epsilon,
                           EluderMode mode) {
    return eluder_search(table, epsilon, 2, mode);
}

InequalityCheck check_simulation_lemma(const TabularMdp& mdp, const TransitionModel& model,
                                       const Policy& policy) {
    const ValueTables truth_tables = policy_evaluation(mdp.transition, mdp, policy);
    const ValueTables model_tables = policy_evaluation(model, mdp, policy);
    const OccupancyMeasure occ = occupancy(mdp.transition, mdp, policy);
    const int S = mdp.num_states, H = mdp.horizon;

    double rhs = 0.0;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            const int a = policy.action(h, s);
            const double mass = occ.at(h, s, a);
            if (mass == 0.0) continue;
            double gap = 0.0;
            const auto truth_row = mdp.transition.row(s, a);
            const auto model_row = model.row(s, a);
            for (int sp = 0; sp < S; ++sp) {
                gap += (truth_row[sp] - model_row[sp]) * model_tables.value(h + 1, sp);
            }
            rhs += mass * std::abs(gap);
        }
    }

    InequalityCheck check;
    check.lhs = truth_tables.value(0, mdp.start_state) -
                model_tables.value(0, mdp.start_state);
    check.rhs = rhs;
    check.holds = check.lhs <= check.rhs + kIdentityTol;
    return check;
}

std::uint64_t count_support_paths(const TransitionModel& model, const TabularMdp& mdp,
                                  const Policy& policy, std::uint64_t cap) {
    const int S = mdp.num_states, H = mdp.horizon;
    std::vector<std::uint64_t> counts(S, 1);
    for (int h = H - 1; h >= 0; --h) {
        std::vector<std::uint64_t> prev(S, 0);
        for (int s = 0; s < S; ++s) {
            const auto row = model.row(s, policy.action(h, s));
            std::uint64_t total = 0;
            for (int sp = 0; sp < S; ++sp) {
                if (row[sp] > 0.0) {
                    total += counts[sp];
                    if (total >= cap) {
                        total = cap;
                        break;
                    }
                }
            }
            prev[s] = total;
        }
        counts = std::move(prev);
    }
    return counts[mdp.start_state];
}

namespace {

struct MomentAccumulator {
    double mean = 0.0;
    double second = 0.0;

    void visit(double prob, double ret) {
        mean += prob * ret;
        second += prob * ret * ret;
    }
};

void enumerate_paths(const TransitionModel& model, const TabularMdp& mdp,
                     const Policy& policy, int h, int s, double prob, double ret,
                     MomentAccumulator& acc) {
    if (h == mdp.horizon) {
        acc.visit(prob, ret);
        return;
    }
    const int a = policy.action(h, s);
    const double r = mdp.reward(s, a);
    const auto row = model.row(s, a);
    for (int sp = 0; sp < mdp.num_states; ++sp) {
        if (row[sp] > 0.0) {
            enumerate_paths(model, mdp, policy, h + 1, sp, prob * row[sp], ret + r, acc);
        }
    }
}

}  // namespace

ReturnMoments enumerate_return_moments(const TransitionModel& model, const TabularMdp& mdp,
                                       const Policy& policy, std::uint64_t max_paths) {
    const std::uint64_t paths = count_support_paths(model, mdp, policy, max_paths + 1);
    if (paths > max_paths) {
        std::ostringstream msg;
        msg << "enumerate_return_moments: support has more than " << max_paths << " paths";
        throw ConfigError(msg.str());
    }
    MomentAccumulator acc;
    enumerate_paths(model, mdp, policy, 0, mdp.start_state, 1.0, 0.0, acc);
    ReturnMoments moments;
    moments.mean = acc.mean;
    moments.variance = std::max(0.0, acc.second - acc.mean * acc.mean);
    return moments;
}

IdentityCheck check_change_of_variance(const TabularMdp& mdp, const Policy& policy,
                                       std::uint64_t max_exact_paths, int mc_samples) {
    IdentityCheck check;
    check.lhs = return_variance(mdp.transition, mdp, policy);

    const std::uint64_t paths =
        count_support_paths(mdp.transition, mdp, policy, max_exact_paths + 1);
    if (paths <= max_exact_paths) {
        check.rhs =
            enumerate_return_moments(mdp.transition, mdp, policy, max_exact_paths).variance;
        check.exact = true;
    } else {
        RngStream rng(derive_stream_seed(0x9d2c5680u, "change-of-variance-mc"));
        double mean = 0.0, second = 0.0;
        for (int i = 0; i < mc_samples; ++i) {
            const double ret = trajectory_return(sample_trajectory(mdp, policy, rng));
            mean += ret;
            second += ret * ret;
        }
        mean /= mc_samples;
        second /= mc_samples;
        check.rhs = std::max(0.0, second - mean * mean);
        check.exact = false;
    }
    check.abs_diff = std::abs(check.lhs - check.rhs);
    return check;
}

std::vector<int> bad_episode_set(const std::vector<std::vector<double>>& trace,
                                 double lambda) {
    if (!(lambda > 1.0)) throw ConfigError("bad_episode_set: lambda must exceed 1");
    std::vector<int> bad;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        double episode_sum = 0.0;
        for (double v : trace[k]) episode_sum += std::abs(v);
        const double ratio = (lambda + cumulative + episode_sum) / (lambda + cumulative);
        if (ratio > 4.0) bad.push_back(static_cast<int>(k));
        cumulative += episode_sum;
    }
    return bad;
}

std::vector<int> bad_episode_set_sup(
    const std::vector<std::vector<std::vector<double>>>& traces, double lambda) {
    if (!(lambda > 1.0)) throw ConfigError("bad_episode_set_sup: lambda must exceed 1");
    std::vector<int> bad;
    if (traces.empty()) return bad;
    const std::size_t K = traces.front().size();
    std::vector<double> cumulative(traces.size(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        bool fired = false;
        for (std::size_t g = 0; g < traces.size(); ++g) {
            double episode_sum = 0.0;
            for (double v : traces[g][k]) episode_sum += std::abs(v);
            const double ratio =
                (lambda + cumulative[g] + episode_sum) / (lambda + cumulative[g]);
            if (ratio > 4.0) fired = true;
            cumulative[g] += episode_sum;
        }
        if (fired) bad.push_back(static_cast<int>(k));
    }
    return bad;
}

double bad_episode_budget(double lambda, int K, int H, int de1) {
    const double log_term = std::log(4.0 * lambda * K * H);
    return 13.0 * log_term * log_term * de1;
}

RecursionCheck check_recursion_lemma(double G, double a, std::span<const double> C,
                                     int K, int H) {
    if (!(G > 0.0) || K < 1 || H < 1) {
        throw ConfigError("check_recursion_lemma: need G > 0, K >= 1, H >= 1");
    }
    const double kh = static_cast<double>(K) * H;
    const int depth = static_cast<int>(std::ceil(std::log2(kh / G)));
    const int last = std::max(depth, 0);

    RecursionCheck check;
    check.hypotheses_hold = (a > 0.0 && a < G / 2.0) &&
                            static_cast<int>(C.size()) >= last + 1;
    if (check.hypotheses_hold) {
        for (int m = 0; m <= last && check.hypotheses_hold; ++m) {
            if (!(C[m] >= 0.0 && C[m] <= kh)) check.hypotheses_hold = false;
        }
        for (int m = 0; m < last && check.hypotheses_hold; ++m) {
            const double bound = std::ldexp(G, m) + std::sqrt(a * C[m + 1]) + a;
            if (C[m] > bound) check.hypotheses_hold = false;
        }
    }
    check.conclusion_holds = !C.empty() && C[0] <= 4.0 * G;
    return check;
}

}  // namespace mbrl
