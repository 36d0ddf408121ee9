#pragma once

#include <filesystem>
#include <optional>

#include "tabsynth/trainer.hpp"

namespace tabsynth {

// Self-describing training checkpoint: schema, encoders, condition-sampling
// frequencies, parameter arrays with shapes, RNG stream states and counters.
// Incumbent-only checkpoints omit the population (and discriminator/Q state).
struct LoadedCheckpoint {
    TrainConfig config;
    TableEncoder encoder;
    CondvecSampler sampler;
    std::optional<Incumbent> incumbent;
    std::vector<Individual> population;  // empty for incumbent-only checkpoints
    std::size_t step = 0;
    std::size_t epoch = 0;

    Table synthesize(const SynthesisRequest& req) const;
};

void save_checkpoint(const RunState& state, bool include_population,
                     const std::filesystem::path& path);

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tabsynth
