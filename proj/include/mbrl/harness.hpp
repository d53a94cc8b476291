#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mbrl/generators.hpp"
#include "mbrl/offline.hpp"
#include "mbrl/online.hpp"

namespace mbrl {

enum class RunMode { online, offline, analyze, gen };
enum class SweepAxis { K, H, sigma, seeds };
enum class BehaviorKind { uniform, optimal, policy_of_member };

/// Validated experiment description. All randomness derives from the single
/// master seed via named streams ("env", "class", "agent", "data"), with the
/// replica index mixed in per seed-sweep cell.
struct ExperimentConfig {
    RunMode mode = RunMode::online;
    EnvParams env;
    std::uint64_t master_seed = 0;

    int class_size = 8;
    double perturbation_scale = 0.25;
    bool guarantee_realizable = true;

    int num_episodes = 100;    // K: episodes online, trajectories offline
    double delta = 0.05;
    int num_seeds = 1;

    int policy_class_random = 4;               // extra random members of Pi
    BehaviorKind behavior = BehaviorKind::uniform;

    std::vector<double> axis_values;  // sweep positions; empty = defaults
    std::string out_prefix;
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// One sweep cell result; fields not applicable to the mode stay at 0.
struct SweepRow {
    double axis_value = 0.0;
    std::uint64_t seed_index = 0;
    double final_regret = 0.0;      // online
    double performance_gap = 0.0;   // offline
    double optimal_value = 0.0;
    double variance_term = 0.0;     // sum of Var_{pi_k} online, Var_{pi*} offline
    double concentrability = 0.0;   // offline
};

struct SweepTable {
    SweepAxis axis = SweepAxis::seeds;
    RunMode mode = RunMode::online;
    std::vector<SweepRow> rows;  // ordered by (axis value, seed)
};

/// Runs every (axis value, seed) cell on a worker pool bounded by the
/// MBRL_THREADS environment variable. Output order is by (axis value, seed)
/// regardless of completion order; results are deterministic given the
/// master seed.
SweepTable sweep(const ExperimentConfig& config, SweepAxis axis);

void sweep_to_csv(const SweepTable& table, std::ostream& out);

/// Materializes the environment/model-class pair of one sweep cell.
TabularMdp config_environment(const ExperimentConfig& config, std::uint64_t seed_index,
                              std::optional<double> sigma_override = {},
                              std::optional<int> horizon_override = {});
ModelClass config_model_class(const ExperimentConfig& config, const TabularMdp& mdp,
                              std::uint64_t seed_index);

/// Worker pool width: MBRL_THREADS when set (>= 1), else hardware concurrency.
int worker_pool_width();

}  // namespace mbrl
