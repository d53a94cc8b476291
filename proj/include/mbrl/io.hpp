#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mbrl/estimation.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/offline.hpp"
#include "mbrl/online.hpp"

namespace mbrl {

/// MDP document: {"S":int,"A":int,"H":int,"s0":int,"P":[[[p...]]],"r":[[...]]}
/// with P indexed [s][a][s'] and r indexed [s][a]. Loading validates every
/// invariant and rejects violations.
std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const std::string& text);
TabularMdp load_mdp(const std::string& path);
void save_mdp(const TabularMdp& mdp, const std::string& path);

/// Model class document mirrors the MDP transition block, one kernel per
/// array entry: {"S":int,"A":int,"truth_index":int|null,"models":[[[[p...]]]]}.
std::string model_class_to_json(const ModelClass& model_class, int num_states,
                                int num_actions);
ModelClass model_class_from_json(const std::string& text);
ModelClass load_model_class(const std::string& path);
void save_model_class(const ModelClass& model_class, const std::string& path);

/// Dataset: JSON lines, one trajectory per line as {"steps":[[s,a,sp],...]}.
void save_dataset(const TransitionDataset& data, const std::string& path);
TransitionDataset load_dataset(const std::string& path);
TransitionDataset dataset_from_jsonl(std::istream& in);
void dataset_to_jsonl(const TransitionDataset& data, std::ostream& out);

std::string run_record_to_json(const RunRecord& record);
/// Per-episode table: k, regret, cum_regret, optimistic_value, true_value,
/// realized_return, vs_size, var_pik.
void episodes_to_csv(const RunRecord& record, std::ostream& out);

std::string offline_result_to_json(const OfflineResult& result);

/// FNV-1a hash of the canonical MDP serialization; echoed into run records so
/// results can be tied back to the exact environment.
std::uint64_t environment_fingerprint(const TabularMdp& mdp);

}  // namespace mbrl
