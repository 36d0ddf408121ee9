#pragma once

#include <functional>
#include <span>

#include "tabsynth/gan.hpp"
#include "tabsynth/qlearn.hpp"

namespace tabsynth {

// One member of the evolving generator population with cached objectives.
struct Individual {
    Generator gen;
    AdamState adam;
    double f_u = 0.0;
    double f_r = 0.0;
    int rank = 0;       // set after survivor selection
    double crowd = 0.0; // set after survivor selection
};

// Shared per-iteration context for producing one child: the frozen
// discriminator, the training batch, and the shared-subsample evaluator.
struct SmartVariationContext {
    const Discriminator* disc = nullptr;
    const Matrix* z = nullptr;    // n x noise_dim
    const Matrix* c1 = nullptr;   // n x cond_dim
    std::span<const ChosenCondition> chosen;
    const AdamConfig* gen_adam = nullptr;
    std::function<std::pair<double, double>(const Generator&)> evaluate;  // -> (f_u, f_r)
};

// Q-learning operator selection: pick a loss epsilon-greedily from the
// parent's (risk, utility) state, train a cloned child for one step, evaluate
// it, emit the reward transition. The parent is never mutated.
Individual smart_variation(const SmartVariationContext& ctx, const Individual& parent, QFunction& q,
                           ReplayBuffer& buffer, double epsilon, RngStream& rl_rng,
                           RngStream& gumbel_rng, int* chosen_action = nullptr,
                           GeneratorStepResult* step_out = nullptr);

}  // namespace tabsynth
