#pragma once

#include "mbrl/estimation.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/offline.hpp"
#include "mbrl/rng.hpp"

namespace mbrl {

enum class EnvFamily { random_stochastic, deterministic, variance_dial, chain };

struct EnvParams {
    EnvFamily family = EnvFamily::random_stochastic;
    int num_states = 4;
    int num_actions = 2;
    int horizon = 5;
    double sigma = 0.0;  // variance_dial only: deterministic-to-uniform mixing
};

/// Builds an environment from one of the stock families. Every output passes
/// TabularMdp::validate(), with rewards scaled so the best reachable path
/// collects exactly 1. The variance_dial family mixes a seeded deterministic
/// kernel with the uniform kernel; sigma = 0 reproduces the deterministic
/// family bit-for-bit on the same seed, and the return variance of the
/// optimal policy grows with sigma.
TabularMdp gen_environment(const EnvParams& params, RngStream& rng);

/// Finite realizable class: the truth sits at a uniformly random index, the
/// other members are row-wise perturbations of the truth re-normalized to
/// distributions, pairwise distinct. Rejects a zero perturbation scale.
ModelClass gen_model_class(const TabularMdp& mdp, int size, double perturbation_scale,
                           RngStream& rng);

/// Policy class for pessimistic planning: the DP optimum under the truth
/// (declared comparator), the DP optimum under every class member, plus
/// `num_random` random policies. Deduplicated, comparator first.
PolicyClass gen_policy_class(const TabularMdp& mdp, const ModelClass& model_class,
                             int num_random, RngStream& rng);

/// Multiplies every reward by `factor` (> 0); values scale linearly with it.
void scale_rewards(TabularMdp& mdp, double factor);

}  // namespace mbrl
