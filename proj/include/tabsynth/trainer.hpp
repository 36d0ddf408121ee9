#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabsynth/csv.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/nsga2.hpp"
#include "tabsynth/variation.hpp"

namespace tabsynth {

struct QLearnConfig {
    double gamma = 0.9;
    std::size_t replay_capacity = 1000;
    std::size_t batch_size = 32;
    std::vector<std::size_t> hidden = {64, 64};
    AdamConfig adam = {.learning_rate = 1e-2, .beta1 = 0.9, .beta2 = 0.999, .weight_decay = 0.0};
};

struct TrainConfig {
    std::uint64_t seed = 1;
    std::size_t mu = 4;           // population size
    std::size_t select_every = 8; // H: steps between survivor selections
    std::size_t epochs = 300;
    std::size_t batch_size = 500; // n
    std::size_t disc_steps = 1;   // N_d
    double epsilon = 0.1;         // exploration probability
    double lambda = 2.0;          // improvement-score weight
    double risk_floor = 0.0;
    std::size_t n_eval = 500;
    int max_modes = 10;
    AdamConfig gen_adam = {.learning_rate = 2e-4, .beta1 = 0.5, .beta2 = 0.9, .weight_decay = 1e-6};
    AdamConfig disc_adam = {.learning_rate = 2e-4, .beta1 = 0.5, .beta2 = 0.9, .weight_decay = 1e-6};
    GanArchitecture arch;
    QLearnConfig qlearn;
    MetricSpec metrics;

    void validate(const TableSchema& schema) const;
    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
    static TrainConfig from_json_file(const std::filesystem::path& path);
};

struct Incumbent {
    Generator gen;
    double f_u = 0.0;
    double f_r = 0.0;
    std::size_t epoch = 0;
};

struct CurveRow {
    std::size_t epoch = 0;
    double f_u = 0.0;
    double f_r = 0.0;
    double improvement = 0.0;
};

struct RunState {
    TrainConfig config;
    TableEncoder encoder;
    CondvecSampler sampler;
    std::vector<Individual> population;
    Discriminator disc;
    AdamState disc_adam;
    QFunction q;
    ReplayBuffer buffer{1000};
    std::optional<Incumbent> incumbent;
    std::vector<CurveRow> curves;
    std::size_t step = 0;
    std::size_t epoch = 0;
    // Independent streams so toggling one stochastic component leaves the rest
    // unshifted: data sampling, generator noise, gumbel noise, RL, evaluation.
    RngStream data_rng{0}, noise_rng{0}, gumbel_rng{0}, rl_rng{0}, eval_rng{0};
};

// Fixed-seed generation: conditions by training-by-sampling, hard decode.
Table synthesize_rows(const Generator& gen, const TableEncoder& encoder,
                      const CondvecSampler& sampler, std::size_t n_rows, std::uint64_t seed);

// Full training loop. When `out_dir` is non-empty, writes config.json,
// curves.csv, population.json, report.json and checkpoints/.
RunState train(const Table& original, const TrainConfig& cfg,
               const std::filesystem::path& out_dir = {});

enum class SelectionPolicy { improvement, max_utility, index };

struct SynthesisRequest {
    SelectionPolicy policy = SelectionPolicy::improvement;
    std::size_t index = 0;  // used when policy == index
    std::size_t rows = 0;
    std::uint64_t seed = 1;
};

Table synthesize_from_state(const RunState& state, const SynthesisRequest& req);

std::string curves_to_csv(const std::vector<CurveRow>& curves);

}  // namespace tabsynth
