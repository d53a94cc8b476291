#include "mbrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbrl {

void validate_prob_vector(std::span<const double> weights, const char* context) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            std::ostringstream msg;
            msg << context << ": entry " << w << " is not a valid probability";
            throw InvariantError(msg.str());
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > kDistributionTol) {
        std::ostringstream msg;
        msg << context << ": weights sum to " << sum << ", expected 1";
        throw InvariantError(msg.str());
    }
}

void TransitionModel::set_row(int s, int a, std::span<const double> weights) {
    if (static_cast<int>(weights.size()) != num_states_) {
        std::ostringstream msg;
        msg << "transition row (" << s << "," << a << "): expected " << num_states_
            << " entries, got " << weights.size();
        throw DimensionError(msg.str());
    }
    std::copy(weights.begin(), weights.end(), probs_.begin() + index(s, a, 0));
}

void TransitionModel::validate() const {
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            std::ostringstream ctx;
            ctx << "transition row (s=" << s << ", a=" << a << ")";
            validate_prob_vector(row(s, a), ctx.str().c_str());
        }
    }
}

void TabularMdp::validate() const {
    if (num_states < 1 || num_actions < 1 || horizon < 1) {
        throw InvariantError("mdp: S, A and H must all be positive");
    }
    if (start_state < 0 || start_state >= num_states) {
        throw InvariantError("mdp: start state out of range");
    }
    if (transition.num_states() != num_states || transition.num_actions() != num_actions) {
        std::ostringstream msg;
        msg << "mdp: kernel shape (" << transition.num_states() << ","
            << transition.num_actions() << ") does not match (S=" << num_states
            << ", A=" << num_actions << ")";
        throw DimensionError(msg.str());
    }
    if (rewards.size() != static_cast<std::size_t>(num_states) * num_actions) {
        throw DimensionError("mdp: reward table shape does not match S*A");
    }
    for (double r : rewards) {
        if (r < 0.0 || !std::isfinite(r)) {
            throw InvariantError("mdp: rewards must be finite and nonnegative");
        }
    }
    transition.validate();
    const double max_path = max_trajectory_reward(*this);
    if (max_path > 1.0 + 1e-9) {
        std::ostringstream msg;
        msg << "mdp: maximum reachable path reward " << max_path << " exceeds 1";
        throw InvariantError(msg.str());
    }
}

void Policy::validate(const TabularMdp& mdp) const {
    if (horizon_ != mdp.horizon || num_states_ != mdp.num_states) {
        std::ostringstream msg;
        msg << "policy shape (H=" << horizon_ << ", S=" << num_states_
            << ") does not match mdp (H=" << mdp.horizon << ", S=" << mdp.num_states << ")";
        throw DimensionError(msg.str());
    }
    for (int a : actions_) {
        if (a < 0 || a >= mdp.num_actions) {
            throw InvariantError("policy: action index out of range");
        }
    }
}

double trajectory_return(const Trajectory& trajectory) {
    double total = 0.0;
    for (const auto& step : trajectory.steps) total += step.reward;
    return total;
}

namespace {

void check_model_shape(const TransitionModel& model, const TabularMdp& mdp) {
    if (model.num_states() != mdp.num_states) {
        std::ostringstream msg;
        msg << "model num_states=" << model.num_states() << " but mdp num_states="
            << mdp.num_states;
        throw DimensionError(msg.str());
    }
    if (model.num_actions() != mdp.num_actions) {
        std::ostringstream msg;
        msg << "model num_actions=" << model.num_actions() << " but mdp num_actions="
            << mdp.num_actions;
        throw DimensionError(msg.str());
    }
}

}  // namespace

ValueTables policy_evaluation(const TransitionModel& model, const TabularMdp& mdp,
                              const Policy& policy) {
    check_model_shape(model, mdp);
    policy.validate(mdp);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;

    ValueTables tables;
    tables.horizon = H;
    tables.num_states = S;
    tables.num_actions = A;
    tables.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
    tables.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);

    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                double next = 0.0;
                const auto row = model.row(s, a);
                for (int sp = 0; sp < S; ++sp) next += row[sp] * tables.value(h + 1, sp);
                tables.q[(static_cast<std::size_t>(h) * S + s) * A + a] =
                    mdp.reward(s, a) + next;
            }
            tables.v[static_cast<std::size_t>(h) * S + s] =
                tables.qvalue(h, s, policy.action(h, s));
        }
    }
    return tables;
}

std::pair<Policy, ValueTables> optimal_planning(const TransitionModel& model,
                                                const TabularMdp& mdp) {
    check_model_shape(model, mdp);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;

    Policy policy(H, S);
    ValueTables tables;
    tables.horizon = H;
    tables.num_states = S;
    tables.num_actions = A;
    tables.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
    tables.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);

    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            int best_action = 0;
            double best_value = -1.0;
            for (int a = 0; a < A; ++a) {
                double next = 0.0;
                const auto row = model.row(s, a);
                for (int sp = 0; sp < S; ++sp) next += row[sp] * tables.value(h + 1, sp);
                const double qsa = mdp.reward(s, a) + next;
                tables.q[(static_cast<std::size_t>(h) * S + s) * A + a] = qsa;
                // strict improvement only: ties stay at the lowest index
                if (qsa > best_value) {
                    best_value = qsa;
                    best_action = a;
                }
            }
            policy.action(h, s) = best_action;
            tables.v[static_cast<std::size_t>(h) * S + s] = best_value;
        }
    }
    return {std::move(policy), std::move(tables)};
}

OccupancyMeasure occupancy(const TransitionModel& model, const TabularMdp& mdp,
                           const Policy& policy) {
    check_model_shape(model, mdp);
    policy.validate(mdp);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;

    OccupancyMeasure occ;
    occ.horizon = H;
    occ.num_states = S;
    occ.num_actions = A;
    occ.d.assign(static_cast<std::size_t>(H) * S * A, 0.0);

    std::vector<double> state_dist(S, 0.0);
    state_dist[mdp.start_state] = 1.0;
    for (int h = 0; h < H; ++h) {
        std::vector<double> next_dist(S, 0.0);
        for (int s = 0; s < S; ++s) {
            const double mass = state_dist[s];
            if (mass == 0.0) continue;
            const int a = policy.action(h, s);
            occ.at(h, s, a) = mass;
            const auto row = model.row(s, a);
            for (int sp = 0; sp < S; ++sp) next_dist[sp] += mass * row[sp];
        }
        state_dist = std::move(next_dist);
    }
    return occ;
}

Trajectory sample_trajectory(const TabularMdp& mdp, const Policy& policy, RngStream& rng) {
    policy.validate(mdp);
    Trajectory trajectory;
    trajectory.steps.reserve(mdp.horizon);
    int s = mdp.start_state;
    for (int h = 0; h < mdp.horizon; ++h) {
        const int a = policy.action(h, s);
        const int sp = rng.categorical(mdp.transition.row(s, a));
        trajectory.steps.push_back({s, a, mdp.reward(s, a), sp});
        s = sp;
    }
    return trajectory;
}

double return_variance(const TransitionModel& model, const TabularMdp& mdp,
                       const Policy& policy) {
    const ValueTables tables = policy_evaluation(model, mdp, policy);
    const OccupancyMeasure occ = occupancy(model, mdp, policy);
    const int S = mdp.num_states, H = mdp.horizon;

    double total = 0.0;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            const int a = policy.action(h, s);
            const double mass = occ.at(h, s, a);
            if (mass == 0.0) continue;
            double mean = 0.0, mean_sq = 0.0;
            const auto row = model.row(s, a);
            for (int sp = 0; sp < S; ++sp) {
                const double value = tables.value(h + 1, sp);
                mean += row[sp] * value;
                mean_sq += row[sp] * value * value;
            }
            total += mass * std::max(0.0, mean_sq - mean * mean);
        }
    }
    return total;
}

double max_trajectory_reward(const TabularMdp& mdp) {
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    std::vector<double> best(S, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        std::vector<double> prev(S, 0.0);
        for (int s = 0; s < S; ++s) {
            double best_here = 0.0;
            for (int a = 0; a < A; ++a) {
                double best_next = 0.0;
                bool any = false;
                const auto row = mdp.transition.row(s, a);
                for (int sp = 0; sp < S; ++sp) {
                    if (row[sp] > 0.0) {
                        best_next = any ? std::max(best_next, best[sp]) : best[sp];
                        any = true;
                    }
                }
                const double candidate = mdp.reward(s, a) + (any ? best_next : 0.0);
                if (a == 0 || candidate > best_here) best_here = candidate;
            }
            prev[s] = best_here;
        }
        best = std::move(prev);
    }
    return best[mdp.start_state];
}

}  // namespace mbrl
