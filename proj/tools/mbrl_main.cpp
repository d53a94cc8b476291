// Command-line front end: environment/class generation, online and offline
// runs, structural analysis and parameter sweeps. Exit codes: 0 success,
// 2 configuration problem, 3 violated data invariant.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbrl/analysis.hpp"
#include "mbrl/harness.hpp"
#include "mbrl/io.hpp"

namespace {

using namespace mbrl;
using nlohmann::json;

constexpr int kConfigExit = 2;
constexpr int kInvariantExit = 3;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    return out;
}

EnvParams env_params_from_flags(const std::string& family, int S, int A, int H,
                                double sigma) {
    ExperimentConfig probe;  // reuse config validation for the family name
    json doc = {{"mode", "gen"},
                {"env", {{"family", family}, {"S", S}, {"A", A}, {"H", H}, {"sigma", sigma}}}};
    probe = config_from_json(doc.dump());
    return probe.env;
}

int cmd_gen_env(const std::string& family, int S, int A, int H, double sigma,
                std::uint64_t seed, const std::string& out) {
    const EnvParams params = env_params_from_flags(family, S, A, H, sigma);
    RngStream rng = named_stream(seed, "env");
    save_mdp(gen_environment(params, rng), out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_gen_class(const std::string& mdp_path, int size, double scale,
                  std::uint64_t seed, const std::string& out) {
    const TabularMdp mdp = load_mdp(mdp_path);
    RngStream rng = named_stream(seed, "class");
    save_model_class(gen_model_class(mdp, size, scale, rng), out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_gen_data(const std::string& mdp_path, int K, const std::string& behavior,
                 std::uint64_t seed, const std::string& out) {
    const TabularMdp mdp = load_mdp(mdp_path);
    RngStream rng = named_stream(seed, "data");
    TransitionDataset data;
    if (behavior == "uniform") {
        const int A = mdp.num_actions;
        BehaviorRule uniform = [A, &rng](const BehaviorContext&) {
            return rng.uniform_int(A);
        };
        data = generate_offline_dataset(mdp, uniform, K, rng);
    } else if (behavior == "optimal") {
        data = generate_offline_dataset(mdp, optimal_planning(mdp.transition, mdp).first,
                                        K, rng);
    } else {
        throw ConfigError("gen data: behavior must be uniform or optimal");
    }
    save_dataset(data, out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_online(const std::string& config_path) {
    const ExperimentConfig config = load_config(config_path);
    const TabularMdp mdp = config_environment(config, 0);
    const ModelClass model_class = config_model_class(config, mdp, 0);
    RngStream agent = named_stream(config.master_seed, "agent");
    const RunRecord record = run_ombrl(mdp, model_class, config.num_episodes,
                                       config.delta, agent, config.master_seed);

    const std::string prefix =
        config.out_prefix.empty() ? "ombrl_run" : config.out_prefix;
    open_output(prefix + ".json") << run_record_to_json(record) << "\n";
    auto csv = open_output(prefix + ".csv");
    episodes_to_csv(record, csv);
    std::cout << "episodes=" << record.num_episodes
              << " final_regret=" << record.cumulative_regret.back() << " wrote "
              << prefix << ".json, " << prefix << ".csv\n";
    return 0;
}

int cmd_offline(const std::string& config_path, const std::string& data_path) {
    const ExperimentConfig config = load_config(config_path);
    const TabularMdp mdp = config_environment(config, 0);
    const ModelClass model_class = config_model_class(config, mdp, 0);
    const TransitionDataset data = load_dataset(data_path);
    data.validate(mdp);
    // Ingested trajectories must be realizable under the environment kernel.
    for (const auto& t : data.tuples()) {
        if (mdp.transition.prob(t.state, t.action, t.next_state) <= 0.0) {
            throw InvariantError("dataset: observed transition has zero probability "
                                 "under the environment");
        }
    }

    RngStream policy_rng = named_stream(config.master_seed, "policies");
    const PolicyClass policies =
        gen_policy_class(mdp, model_class, config.policy_class_random, policy_rng);
    const OfflineResult result = run_cppo(mdp, model_class, policies, data, config.delta);

    const std::string prefix =
        config.out_prefix.empty() ? "cppo_run" : config.out_prefix;
    open_output(prefix + ".json") << offline_result_to_json(result) << "\n";
    std::cout << "gap=" << result.performance_gap
              << " chosen_policy=" << result.chosen_policy << " wrote " << prefix
              << ".json\n";
    return 0;
}

int cmd_analyze(const std::string& mdp_path, const std::string& class_path,
                const std::string& out) {
    const TabularMdp mdp = load_mdp(mdp_path);
    ModelClass model_class = load_model_class(class_path);
    model_class.validate(mdp);

    const FunctionClassTable psi = build_psi(model_class, mdp);
    double envelope = 0.0;
    for (const auto& row : psi.values) {
        for (double v : row) envelope = std::max(envelope, v);
    }

    json report;
    report["schema_version"] = 1;
    report["psi_envelope"] = envelope;

    const bool exhaustive_ok = psi.num_points() <= 12 && psi.num_functions() <= 12;
    json de1 = json::array();
    for (double eps : {0.5, 0.25, 0.1, 0.05, 0.01}) {
        const EluderResult r = eluder_dim_l1(
            psi, eps, exhaustive_ok ? EluderMode::exhaustive : EluderMode::greedy);
        de1.push_back({{"epsilon", eps}, {"de1", r.dimension}, {"exact", r.exact}});
    }
    report["de1_by_epsilon"] = std::move(de1);

    const Policy optimal = optimal_planning(mdp.transition, mdp).first;
    json sims = json::array();
    for (int i = 0; i < model_class.size(); ++i) {
        const InequalityCheck check =
            check_simulation_lemma(mdp, model_class.models[i], optimal);
        sims.push_back({{"model", i},
                        {"lhs", check.lhs},
                        {"rhs", check.rhs},
                        {"holds", check.holds}});
    }
    report["simulation_checks"] = std::move(sims);

    json vars = json::array();
    {
        const IdentityCheck check = check_change_of_variance(mdp, optimal);
        vars.push_back({{"policy", "optimal"},
                        {"lhs", check.lhs},
                        {"rhs", check.rhs},
                        {"abs_diff", check.abs_diff},
                        {"exact", check.exact}});
    }
    for (int i = 0; i < model_class.size(); ++i) {
        const Policy policy = optimal_planning(model_class.models[i], mdp).first;
        const IdentityCheck check = check_change_of_variance(mdp, policy);
        vars.push_back({{"policy", "model_" + std::to_string(i) + "_optimum"},
                        {"lhs", check.lhs},
                        {"rhs", check.rhs},
                        {"abs_diff", check.abs_diff},
                        {"exact", check.exact}});
    }
    report["variance_checks"] = std::move(vars);

    if (out.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        open_output(out) << report.dump(2) << "\n";
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name) {
    const ExperimentConfig config = load_config(config_path);
    SweepAxis axis;
    if (axis_name == "K") {
        axis = SweepAxis::K;
    } else if (axis_name == "H") {
        axis = SweepAxis::H;
    } else if (axis_name == "sigma") {
        axis = SweepAxis::sigma;
    } else if (axis_name == "seeds") {
        axis = SweepAxis::seeds;
    } else {
        throw ConfigError("sweep: axis must be one of K, H, sigma, seeds");
    }
    const SweepTable table = sweep(config, axis);
    const std::string prefix = config.out_prefix.empty() ? "sweep" : config.out_prefix;
    const std::string path = prefix + "_" + axis_name + ".csv";
    auto out = open_output(path);
    sweep_to_csv(table, out);
    std::cout << "rows=" << table.rows.size() << " wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MLE-based model-based RL laboratory"};
    app.require_subcommand(1);

    std::string config_path, data_path, mdp_path, class_path, out_path, axis = "K";
    std::string family = "random_stochastic", behavior = "uniform";
    int S = 4, A = 2, H = 5, size = 8, K = 100;
    double sigma = 0.0, scale = 0.25;
    std::uint64_t seed = 0;

    auto* online = app.add_subcommand("online", "run the optimistic episodic loop");
    online->add_option("--config", config_path, "experiment config JSON")->required();

    auto* offline = app.add_subcommand("offline", "run the pessimistic offline pipeline");
    offline->add_option("--config", config_path, "experiment config JSON")->required();
    offline->add_option("--data", data_path, "trajectory dataset (JSON lines)")->required();

    auto* gen = app.add_subcommand("gen", "generate environments, classes, datasets");
    gen->require_subcommand(1);
    auto* gen_env = gen->add_subcommand("env", "generate an environment");
    gen_env->add_option("--family", family, "random_stochastic|deterministic|variance_dial|chain");
    gen_env->add_option("--S", S, "number of states");
    gen_env->add_option("--A", A, "number of actions");
    gen_env->add_option("--H", H, "horizon");
    gen_env->add_option("--sigma", sigma, "variance dial in [0,1]");
    gen_env->add_option("--seed", seed, "master seed");
    gen_env->add_option("--out", out_path, "output path")->required();
    auto* gen_class = gen->add_subcommand("class", "generate a model class");
    gen_class->add_option("--mdp", mdp_path, "environment JSON")->required();
    gen_class->add_option("--size", size, "number of members");
    gen_class->add_option("--scale", scale, "perturbation scale");
    gen_class->add_option("--seed", seed, "master seed");
    gen_class->add_option("--out", out_path, "output path")->required();
    auto* gen_data = gen->add_subcommand("data", "generate an offline dataset");
    gen_data->add_option("--mdp", mdp_path, "environment JSON")->required();
    gen_data->add_option("--K", K, "number of trajectories");
    gen_data->add_option("--behavior", behavior, "uniform|optimal");
    gen_data->add_option("--seed", seed, "master seed");
    gen_data->add_option("--out", out_path, "output path")->required();

    auto* analyze = app.add_subcommand("analyze", "structural report for a class");
    analyze->add_option("--mdp", mdp_path, "environment JSON")->required();
    analyze->add_option("--class", class_path, "model class JSON")->required();
    analyze->add_option("--out", out_path, "report path (stdout when omitted)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a seeded parameter sweep");
    sweep_cmd->add_option("--config", config_path, "experiment config JSON")->required();
    sweep_cmd->add_option("--axis", axis, "K|H|sigma|seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        if (*online) return cmd_online(config_path);
        if (*offline) return cmd_offline(config_path, data_path);
        if (*gen_env) return cmd_gen_env(family, S, A, H, sigma, seed, out_path);
        if (*gen_class) return cmd_gen_class(mdp_path, size, scale, seed, out_path);
        if (*gen_data) return cmd_gen_data(mdp_path, K, behavior, seed, out_path);
        if (*analyze) return cmd_analyze(mdp_path, class_path, out_path);
        if (*sweep_cmd) return cmd_sweep(config_path, axis);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kInvariantExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
