#include "mbrl/harness.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace mbrl {

using nlohmann::json;

namespace {

EnvFamily family_from_string(const std::string& name) {
    if (name == "random_stochastic") return EnvFamily::random_stochastic;
    if (name == "deterministic") return EnvFamily::deterministic;
    if (name == "variance_dial") return EnvFamily::variance_dial;
    if (name == "chain") return EnvFamily::chain;
    throw ConfigError("config: unknown environment family '" + name + "'");
}

RunMode mode_from_string(const std::string& name) {
    if (name == "online") return RunMode::online;
    if (name == "offline") return RunMode::offline;
    if (name == "analyze") return RunMode::analyze;
    if (name == "gen") return RunMode::gen;
    throw ConfigError("config: unknown mode '" + name + "'");
}

BehaviorKind behavior_from_string(const std::string& name) {
    if (name == "uniform") return BehaviorKind::uniform;
    if (name == "optimal") return BehaviorKind::optimal;
    if (name == "policy_of_member") return BehaviorKind::policy_of_member;
    throw ConfigError("config: unknown behavior '" + name + "'");
}

void validate_config(const ExperimentConfig& config) {
    if (!(config.delta > 0.0 && config.delta < 1.0)) {
        throw ConfigError("config: delta must lie in (0,1)");
    }
    if (config.num_episodes < 1) throw ConfigError("config: K must be >= 1");
    if (config.num_seeds < 1) throw ConfigError("config: num_seeds must be >= 1");
    if (config.class_size < 1) throw ConfigError("config: class size must be >= 1");
    if (config.env.num_states < 1 || config.env.num_actions < 1 ||
        config.env.horizon < 1) {
        throw ConfigError("config: S, A and H must all be positive");
    }
    if (config.env.sigma < 0.0 || config.env.sigma > 1.0) {
        throw ConfigError("config: sigma must lie in [0,1]");
    }
    if (config.policy_class_random < 0) {
        throw ConfigError("config: policy_class_random must be >= 0");
    }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config: malformed JSON");

    ExperimentConfig config;
    try {
        config.mode = mode_from_string(doc.at("mode").get<std::string>());
        const json& env = doc.at("env");
        config.env.family = family_from_string(env.at("family").get<std::string>());
        config.env.num_states = env.at("S").get<int>();
        config.env.num_actions = env.at("A").get<int>();
        config.env.horizon = env.at("H").get<int>();
        config.env.sigma = env.value("sigma", 0.0);
        config.master_seed = doc.value("seed", std::uint64_t{0});

        if (doc.contains("model_class")) {
            const json& mc = doc["model_class"];
            config.class_size = mc.value("size", config.class_size);
            config.perturbation_scale = mc.value("perturbation", config.perturbation_scale);
            config.guarantee_realizable = mc.value("realizable", true);
        }
        config.num_episodes = doc.value("K", config.num_episodes);
        config.delta = doc.value("delta", config.delta);
        config.num_seeds = doc.value("num_seeds", config.num_seeds);
        config.policy_class_random = doc.value("policy_class_random", 4);
        if (doc.contains("behavior")) {
            config.behavior = behavior_from_string(doc["behavior"].get<std::string>());
        }
        if (doc.contains("axis_values")) {
            config.axis_values = doc["axis_values"].get<std::vector<double>>();
        }
        config.out_prefix = doc.value("out_prefix", std::string{});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate_config(config);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json(buffer.str());
}

TabularMdp config_environment(const ExperimentConfig& config, std::uint64_t seed_index,
                              std::optional<double> sigma_override,
                              std::optional<int> horizon_override) {
    EnvParams params = config.env;
    if (sigma_override) {
        params.family = EnvFamily::variance_dial;
        params.sigma = *sigma_override;
    }
    if (horizon_override) params.horizon = *horizon_override;
    RngStream rng = named_stream(config.master_seed, "env", seed_index);
    return gen_environment(params, rng);
}

ModelClass config_model_class(const ExperimentConfig& config, const TabularMdp& mdp,
                              std::uint64_t seed_index) {
    RngStream rng = named_stream(config.master_seed, "class", seed_index);
    ModelClass model_class =
        gen_model_class(mdp, config.class_size, config.perturbation_scale, rng);
    if (!config.guarantee_realizable && config.class_size > 1) {
        // Drop the realizability guarantee: replace the truth member with one
        // more perturbation and clear the flag.
        RngStream extra = named_stream(config.master_seed, "class-extra", seed_index);
        ModelClass fresh = gen_model_class(mdp, 2, config.perturbation_scale, extra);
        const int other = 1 - *fresh.truth_index;
        model_class.models[*model_class.truth_index] = fresh.models[other];
        model_class.truth_index.reset();
    }
    return model_class;
}

int worker_pool_width() {
    if (const char* env = std::getenv("MBRL_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

std::vector<double> default_axis_values(SweepAxis axis, const ExperimentConfig& config) {
    switch (axis) {
        case SweepAxis::K:
            return {25, 50, 100, 200};
        case SweepAxis::H:
            return {4, 8, 16, 32};
        case SweepAxis::sigma:
            return {0.0, 0.25, 0.5, 1.0};
        case SweepAxis::seeds:
            return {static_cast<double>(config.num_seeds)};
    }
    throw ConfigError("sweep: unknown axis");
}

SweepRow run_cell(const ExperimentConfig& config, SweepAxis axis, double axis_value,
                  std::uint64_t seed_index) {
    SweepRow row;
    row.axis_value = axis_value;
    row.seed_index = seed_index;

    std::optional<double> sigma;
    std::optional<int> horizon;
    int K = config.num_episodes;
    if (axis == SweepAxis::sigma) sigma = axis_value;
    if (axis == SweepAxis::H) horizon = static_cast<int>(axis_value);
    if (axis == SweepAxis::K) K = static_cast<int>(axis_value);

    const TabularMdp mdp = config_environment(config, seed_index, sigma, horizon);
    const ModelClass model_class = config_model_class(config, mdp, seed_index);

    if (config.mode == RunMode::online) {
        RngStream agent = named_stream(config.master_seed, "agent", seed_index);
        const RunRecord record =
            run_ombrl(mdp, model_class, K, config.delta, agent, config.master_seed);
        row.final_regret = record.cumulative_regret.back();
        row.optimal_value = record.optimal_value;
        for (const auto& log : record.episodes) row.variance_term += log.policy_variance;
        return row;
    }

    // Offline: draw a K-trajectory dataset with the configured behavior, then
    // run the pessimistic pipeline.
    RngStream data_rng = named_stream(config.master_seed, "data", seed_index);
    TransitionDataset data;
    switch (config.behavior) {
        case BehaviorKind::uniform: {
            const int A = mdp.num_actions;
            BehaviorRule uniform = [A, &data_rng](const BehaviorContext&) {
                return data_rng.uniform_int(A);
            };
            data = generate_offline_dataset(mdp, uniform, K, data_rng);
            break;
        }
        case BehaviorKind::optimal:
            data = generate_offline_dataset(
                mdp, optimal_planning(mdp.transition, mdp).first, K, data_rng);
            break;
        case BehaviorKind::policy_of_member:
            data = generate_offline_dataset(
                mdp, optimal_planning(model_class.models[0], mdp).first, K, data_rng);
            break;
    }

    RngStream policy_rng = named_stream(config.master_seed, "policies", seed_index);
    const PolicyClass policies =
        gen_policy_class(mdp, model_class, config.policy_class_random, policy_rng);
    const OfflineResult result =
        run_cppo(mdp, model_class, policies, data, config.delta);
    row.performance_gap = result.performance_gap;
    row.optimal_value = result.comparator_value;
    row.concentrability = result.concentrability;
    row.variance_term = return_variance(
        mdp.transition, mdp, policies.policies[*policies.comparator_index]);
    return row;
}

}  // namespace

SweepTable sweep(const ExperimentConfig& config, SweepAxis axis) {
    if (config.mode != RunMode::online && config.mode != RunMode::offline) {
        throw ConfigError("sweep: mode must be online or offline");
    }
    std::vector<double> values = config.axis_values;
    if (values.empty()) values = default_axis_values(axis, config);

    struct Cell {
        double value;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    if (axis == SweepAxis::seeds) {
        for (int seed = 0; seed < config.num_seeds; ++seed) {
            cells.push_back({0.0, static_cast<std::uint64_t>(seed)});
        }
    } else {
        for (double value : values) {
            for (int seed = 0; seed < config.num_seeds; ++seed) {
                cells.push_back({value, static_cast<std::uint64_t>(seed)});
            }
        }
    }

    SweepTable table;
    table.axis = axis;
    table.mode = config.mode;
    table.rows.resize(cells.size());

    std::atomic<std::size_t> next{0};
    const int width = std::min<int>(worker_pool_width(), static_cast<int>(cells.size()));
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            table.rows[i] = run_cell(config, axis, cells[i].value, cells[i].seed);
        }
    };
    if (width <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(width);
        for (int t = 0; t < width; ++t) workers.emplace_back(work);
        for (auto& worker : workers) worker.join();
    }
    return table;
}

void sweep_to_csv(const SweepTable& table, std::ostream& out) {
    const char* axis_name = table.axis == SweepAxis::K        ? "K"
                            : table.axis == SweepAxis::H     ? "H"
                            : table.axis == SweepAxis::sigma ? "sigma"
                                                             : "seeds";
    out << "# schema_version=1 kind=sweep axis=" << axis_name << "\n";
    out << "axis,value,seed,final_regret,performance_gap,optimal_value,variance_term,"
           "concentrability\n";
    out.precision(17);
    for (const auto& row : table.rows) {
        out << axis_name << ',' << row.axis_value << ',' << row.seed_index << ','
            << row.final_regret << ',' << row.performance_gap << ',' << row.optimal_value
            << ',' << row.variance_term << ',' << row.concentrability << '\n';
    }
}

}  // namespace mbrl
