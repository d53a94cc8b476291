#include "mbrl/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mbrl {

using nlohmann::json;

namespace {

json kernel_to_json(const TransitionModel& model) {
    json p = json::array();
    for (int s = 0; s < model.num_states(); ++s) {
        json per_state = json::array();
        for (int a = 0; a < model.num_actions(); ++a) {
            const auto row = model.row(s, a);
            per_state.push_back(json(std::vector<double>(row.begin(), row.end())));
        }
        p.push_back(std::move(per_state));
    }
    return p;
}

TransitionModel kernel_from_json(const json& p, int S, int A) {
    if (!p.is_array() || static_cast<int>(p.size()) != S) {
        throw InvariantError("kernel: P must have one entry per state");
    }
    TransitionModel model(S, A);
    for (int s = 0; s < S; ++s) {
        if (!p[s].is_array() || static_cast<int>(p[s].size()) != A) {
            throw InvariantError("kernel: P[s] must have one row per action");
        }
        for (int a = 0; a < A; ++a) {
            const auto row = p[s][a].get<std::vector<double>>();
            model.set_row(s, a, row);
        }
    }
    return model;
}

json parse(const std::string& text, const char* what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw InvariantError(std::string(what) + ": malformed JSON");
    }
    return doc;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << text;
}

}  // namespace

std::string mdp_to_json(const TabularMdp& mdp) {
    json doc;
    doc["S"] = mdp.num_states;
    doc["A"] = mdp.num_actions;
    doc["H"] = mdp.horizon;
    doc["s0"] = mdp.start_state;
    doc["P"] = kernel_to_json(mdp.transition);
    json r = json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        json per_state = json::array();
        for (int a = 0; a < mdp.num_actions; ++a) per_state.push_back(mdp.reward(s, a));
        r.push_back(std::move(per_state));
    }
    doc["r"] = std::move(r);
    return doc.dump();
}

TabularMdp mdp_from_json(const std::string& text) {
    const json doc = parse(text, "mdp");
    TabularMdp mdp;
    try {
        mdp.num_states = doc.at("S").get<int>();
        mdp.num_actions = doc.at("A").get<int>();
        mdp.horizon = doc.at("H").get<int>();
        mdp.start_state = doc.at("s0").get<int>();
        if (mdp.num_states < 1 || mdp.num_actions < 1) {
            throw InvariantError("mdp: S and A must be positive");
        }
        mdp.transition = kernel_from_json(doc.at("P"), mdp.num_states, mdp.num_actions);
        const json& r = doc.at("r");
        if (!r.is_array() || static_cast<int>(r.size()) != mdp.num_states) {
            throw InvariantError("mdp: r must have one entry per state");
        }
        mdp.rewards.assign(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions, 0.0);
        for (int s = 0; s < mdp.num_states; ++s) {
            if (!r[s].is_array() || static_cast<int>(r[s].size()) != mdp.num_actions) {
                throw InvariantError("mdp: r[s] must have one entry per action");
            }
            for (int a = 0; a < mdp.num_actions; ++a) {
                mdp.reward(s, a) = r[s][a].get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw InvariantError(std::string("mdp: ") + e.what());
    }
    mdp.validate();
    return mdp;
}

TabularMdp load_mdp(const std::string& path) { return mdp_from_json(read_file(path)); }

void save_mdp(const TabularMdp& mdp, const std::string& path) {
    write_file(path, mdp_to_json(mdp) + "\n");
}

std::string model_class_to_json(const ModelClass& model_class, int num_states,
                                int num_actions) {
    json doc;
    doc["S"] = num_states;
    doc["A"] = num_actions;
    if (model_class.truth_index) {
        doc["truth_index"] = *model_class.truth_index;
    } else {
        doc["truth_index"] = nullptr;
    }
    json members = json::array();
    for (const auto& model : model_class.models) members.push_back(kernel_to_json(model));
    doc["models"] = std::move(members);
    return doc.dump();
}

ModelClass model_class_from_json(const std::string& text) {
    const json doc = parse(text, "model class");
    ModelClass model_class;
    try {
        const int S = doc.at("S").get<int>();
        const int A = doc.at("A").get<int>();
        if (doc.contains("truth_index") && !doc["truth_index"].is_null()) {
            model_class.truth_index = doc["truth_index"].get<int>();
        }
        for (const json& member : doc.at("models")) {
            model_class.models.push_back(kernel_from_json(member, S, A));
        }
    } catch (const json::exception& e) {
        throw InvariantError(std::string("model class: ") + e.what());
    }
    if (model_class.models.empty()) throw InvariantError("model class: empty");
    for (const auto& model : model_class.models) model.validate();
    if (model_class.truth_index &&
        (*model_class.truth_index < 0 || *model_class.truth_index >= model_class.size())) {
        throw InvariantError("model class: truth index out of range");
    }
    return model_class;
}

ModelClass load_model_class(const std::string& path) {
    return model_class_from_json(read_file(path));
}

void save_model_class(const ModelClass& model_class, const std::string& path) {
    if (model_class.models.empty()) throw InvariantError("model class: empty");
    write_file(path, model_class_to_json(model_class, model_class.models[0].num_states(),
                                         model_class.models[0].num_actions()) +
                         "\n");
}

void dataset_to_jsonl(const TransitionDataset& data, std::ostream& out) {
    for (std::size_t k = 0; k < data.num_trajectories(); ++k) {
        json steps = json::array();
        for (const auto& t : data.trajectory(k)) {
            steps.push_back(json::array({t.state, t.action, t.next_state}));
        }
        json line;
        line["steps"] = std::move(steps);
        out << line.dump() << "\n";
    }
}

TransitionDataset dataset_from_jsonl(std::istream& in) {
    TransitionDataset data;
    std::string line;
    std::vector<TransitionTuple> steps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json doc = parse(line, "dataset");
        steps.clear();
        try {
            for (const json& entry : doc.at("steps")) {
                if (!entry.is_array() || entry.size() != 3) {
                    throw InvariantError("dataset: each step must be [s, a, sp]");
                }
                steps.push_back({entry[0].get<int>(), entry[1].get<int>(),
                                 entry[2].get<int>()});
            }
        } catch (const json::exception& e) {
            throw InvariantError(std::string("dataset: ") + e.what());
        }
        data.append_trajectory(steps);
    }
    return data;
}

void save_dataset(const TransitionDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    dataset_to_jsonl(data, out);
}

TransitionDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    return dataset_from_jsonl(in);
}

std::string run_record_to_json(const RunRecord& record) {
    json doc;
    doc["schema_version"] = 1;
    doc["config"] = {{"beta", record.beta},
                     {"delta", record.delta},
                     {"K", record.num_episodes},
                     {"seed", record.seed}};
    doc["environment_fingerprint"] = record.environment_fingerprint;
    doc["optimal_value"] = record.optimal_value;
    doc["cumulative_regret"] = record.cumulative_regret;
    json episodes = json::array();
    for (const auto& log : record.episodes) {
        json actions = json::array();
        for (int h = 0; h < log.policy.horizon(); ++h) {
            json per_step = json::array();
            for (int s = 0; s < log.policy.num_states(); ++s) {
                per_step.push_back(log.policy.action(h, s));
            }
            actions.push_back(std::move(per_step));
        }
        episodes.push_back({{"k", log.episode},
                            {"model_index", log.model_index},
                            {"optimistic_value", log.optimistic_value},
                            {"true_value", log.true_value},
                            {"realized_return", log.realized_return},
                            {"regret", log.instantaneous_regret},
                            {"vs_size", log.version_space_size},
                            {"truth_in_vs", log.truth_in_version_space},
                            {"var_pik", log.policy_variance},
                            {"policy", std::move(actions)}});
    }
    doc["episodes"] = std::move(episodes);
    return doc.dump();
}

void episodes_to_csv(const RunRecord& record, std::ostream& out) {
    out << "# schema_version=1 kind=episodes\n";
    out << "k,regret,cum_regret,optimistic_value,true_value,realized_return,vs_size,"
           "var_pik\n";
    out.precision(17);
    for (std::size_t i = 0; i < record.episodes.size(); ++i) {
        const auto& log = record.episodes[i];
        out << log.episode << ',' << log.instantaneous_regret << ','
            << record.cumulative_regret[i] << ',' << log.optimistic_value << ','
            << log.true_value << ',' << log.realized_return << ','
            << log.version_space_size << ',' << log.policy_variance << '\n';
    }
}

std::string offline_result_to_json(const OfflineResult& result) {
    json doc;
    doc["schema_version"] = 1;
    doc["chosen_policy"] = result.chosen_policy;
    doc["pessimistic_value"] = result.pessimistic_value;
    doc["per_policy_min_values"] = result.per_policy_min_values;
    doc["chosen_true_value"] = result.chosen_true_value;
    doc["comparator_value"] = result.comparator_value;
    doc["performance_gap"] = result.performance_gap;
    if (std::isinf(result.concentrability)) {
        doc["concentrability"] = "inf";
    } else {
        doc["concentrability"] = result.concentrability;
    }
    doc["beta"] = result.beta;
    doc["version_space_size"] = result.version_space_size;
    return doc.dump();
}

std::uint64_t environment_fingerprint(const TabularMdp& mdp) {
    return fnv1a64(mdp_to_json(mdp));
}

}  // namespace mbrl
