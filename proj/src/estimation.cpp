#include "mbrl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbrl {

void TransitionDataset::append_trajectory(const Trajectory& trajectory) {
    starts_.push_back(tuples_.size());
    for (const auto& step : trajectory.steps) {
        tuples_.push_back({step.state, step.action, step.next_state});
    }
}

void TransitionDataset::append_trajectory(std::span<const TransitionTuple> steps) {
    starts_.push_back(tuples_.size());
    tuples_.insert(tuples_.end(), steps.begin(), steps.end());
}

std::span<const TransitionTuple> TransitionDataset::trajectory(std::size_t k) const {
    const std::size_t begin = starts_[k];
    const std::size_t end = (k + 1 < starts_.size()) ? starts_[k + 1] : tuples_.size();
    return {tuples_.data() + begin, end - begin};
}

void TransitionDataset::validate(const TabularMdp& mdp) const {
    for (const auto& t : tuples_) {
        if (t.state < 0 || t.state >= mdp.num_states || t.next_state < 0 ||
            t.next_state >= mdp.num_states) {
            throw InvariantError("dataset: state index out of range");
        }
        if (t.action < 0 || t.action >= mdp.num_actions) {
            throw InvariantError("dataset: action index out of range");
        }
    }
    for (std::size_t k = 0; k < num_trajectories(); ++k) {
        if (trajectory(k).size() != static_cast<std::size_t>(mdp.horizon)) {
            std::ostringstream msg;
            msg << "dataset: trajectory " << k << " has length " << trajectory(k).size()
                << ", expected horizon " << mdp.horizon;
            throw InvariantError(msg.str());
        }
    }
}

void ModelClass::validate(const TabularMdp& mdp) const {
    if (models.empty()) throw InvariantError("model class: empty");
    for (const auto& model : models) {
        if (model.num_states() != mdp.num_states ||
            model.num_actions() != mdp.num_actions) {
            throw DimensionError("model class: member shape does not match mdp");
        }
        model.validate();
    }
    if (truth_index) {
        if (*truth_index < 0 || *truth_index >= size()) {
            throw InvariantError("model class: truth index out of range");
        }
        if (!(models[*truth_index] == mdp.transition)) {
            throw InvariantError("model class: flagged truth member differs from the mdp kernel");
        }
    }
}

bool ModelClass::realizable(const TabularMdp& mdp) const {
    return truth_index && *truth_index >= 0 && *truth_index < size() &&
           models[*truth_index] == mdp.transition;
}

bool VersionSpace::contains(int model_index) const {
    return std::binary_search(member_indices.begin(), member_indices.end(), model_index);
}

LogLik log_likelihood(const TransitionModel& model, const TransitionDataset& data) {
    LogLik total;
    for (const auto& t : data.tuples()) {
        const double p = model.prob(t.state, t.action, t.next_state);
        if (p <= 0.0) return LogLik::impossible();
        total.value += std::log(p);
    }
    return total;
}

int mle(const ModelClass& model_class, const TransitionDataset& data) {
    if (model_class.models.empty()) throw InvariantError("mle: empty model class");
    int best = 0;
    LogLik best_ll = log_likelihood(model_class.models[0], data);
    for (int i = 1; i < model_class.size(); ++i) {
        const LogLik ll = log_likelihood(model_class.models[i], data);
        if (best_ll < ll) {
            best_ll = ll;
            best = i;
        }
    }
    return best;
}

VersionSpace build_version_space(const ModelClass& model_class,
                                 const TransitionDataset& data, double beta) {
    if (beta < 0.0) throw ConfigError("build_version_space: beta must be nonnegative");
    if (model_class.models.empty()) {
        throw InvariantError("build_version_space: empty model class");
    }

    std::vector<LogLik> lls(model_class.models.size());
    for (int i = 0; i < model_class.size(); ++i) {
        lls[i] = log_likelihood(model_class.models[i], data);
    }
    const LogLik max_ll = *std::max_element(lls.begin(), lls.end());

    VersionSpace vs;
    vs.beta = beta;
    vs.max_loglik = max_ll;
    for (int i = 0; i < model_class.size(); ++i) {
        // log 0 semantics: when even the maximizer is impossible, every
        // member ties and qualifies.
        const bool member = max_ll.possible
                                ? (lls[i].possible && lls[i].value >= max_ll.value - beta)
                                : true;
        if (member) vs.member_indices.push_back(i);
    }
    return vs;
}

double beta_threshold(BetaMode mode, int class_size, int num_episodes, double delta) {
    if (class_size < 1) throw ConfigError("beta_threshold: class size must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ConfigError("beta_threshold: delta must lie in (0,1)");
    }
    switch (mode) {
        case BetaMode::offline_finite:
            return 4.0 * std::log(class_size / delta);
        case BetaMode::online_finite:
            if (num_episodes < 1) throw ConfigError("beta_threshold: K must be >= 1");
            return 4.0 * std::log(static_cast<double>(num_episodes) * class_size / delta);
    }
    throw ConfigError("beta_threshold: unknown mode");
}

double dataset_hellinger_sum(const TransitionModel& model, const TabularMdp& mdp,
                             const TransitionDataset& data) {
    // Cache per (s, a): the dataset typically revisits few pairs.
    std::vector<double> cache(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions,
                              -1.0);
    double sum = 0.0;
    for (const auto& t : data.tuples()) {
        const std::size_t key =
            static_cast<std::size_t>(t.state) * mdp.num_actions + t.action;
        if (cache[key] < 0.0) {
            cache[key] = hellinger_sq(model.row(t.state, t.action),
                                      mdp.transition.row(t.state, t.action));
        }
        sum += cache[key];
    }
    return sum;
}

MleGeneralizationReport check_mle_generalization(const TabularMdp& mdp,
                                                 const ModelClass& model_class,
                                                 const Policy& behavior, int K,
                                                 double delta, int trials,
                                                 RngStream& rng) {
    model_class.validate(mdp);
    if (!model_class.realizable(mdp)) {
        throw InvariantError("check_mle_generalization: model class must contain the truth");
    }
    if (K < 1 || trials < 1) {
        throw ConfigError("check_mle_generalization: K and trials must be >= 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ConfigError("check_mle_generalization: delta must lie in (0,1)");
    }

    MleGeneralizationReport report;
    report.trials = trials;
    report.beta = std::log(model_class.size() / delta);
    report.version_space_threshold = 4.0 * report.beta;
    report.hellinger_budget = 22.0 * report.beta;

    for (int trial = 0; trial < trials; ++trial) {
        TransitionDataset data;
        for (int k = 0; k < K; ++k) {
            data.append_trajectory(sample_trajectory(mdp, behavior, rng));
        }
        const VersionSpace vs =
            build_version_space(model_class, data, report.version_space_threshold);
        if (!vs.contains(*model_class.truth_index)) report.truth_escaped += 1;

        bool bound_failed = false;
        for (int i : vs.member_indices) {
            if (dataset_hellinger_sum(model_class.models[i], mdp, data) >
                report.hellinger_budget) {
                bound_failed = true;
                break;
            }
        }
        if (bound_failed) report.hellinger_bound_failed += 1;
    }
    return report;
}

}  // namespace mbrl
