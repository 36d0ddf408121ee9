#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tabsynth/adam.hpp"
#include "tabsynth/nets.hpp"
#include "tabsynth/transform.hpp"

namespace tabsynth {

struct GanArchitecture {
    std::size_t noise_dim = 128;
    std::vector<std::size_t> generator_hidden = {256, 256};
    std::vector<std::size_t> discriminator_hidden = {256, 256};
    std::size_t pac = 10;
    double gumbel_tau = 0.2;
    double gp_coef = 10.0;
};

// Generator: (z ++ c1) -> soft-encoded row. Continuous scalar slots use tanh,
// every one-hot block uses Gumbel-softmax.
struct Generator {
    Mlp net;
    EncodedLayout layout;
    CondLayout cond_layout;
    std::size_t noise_dim = 0;
    std::size_t cond_dim = 0;
    double gumbel_tau = 0.2;
};

Generator make_generator(const EncodedLayout& layout, const CondLayout& cond_layout,
                         const GanArchitecture& arch, RngStream& rng);
Generator clone_generator(const Generator& gen);

struct GeneratorForward {
    Matrix soft;    // n x D_enc (after output activations)
    MlpCache cache; // net cache for backward
};

// Soft outputs for noise z (n x noise_dim) and conditions c1 (n x cond_dim).
// Gumbel noise is drawn from `gumbel_rng`, one draw per one-hot slot.
Matrix generate(const Generator& gen, const Matrix& z, const Matrix& c1, RngStream& gumbel_rng);
GeneratorForward generator_forward(const Generator& gen, const Matrix& z, const Matrix& c1,
                                   RngStream& gumbel_rng);

// Backward through output activations and the net; accumulates into `grads`.
void generator_backward(const Generator& gen, const GeneratorForward& fwd, const Matrix& dsoft,
                        MlpGrads* grads);

// Discriminator scores packs of `pac` samples jointly; classification uses a
// sigmoid on the raw score, the gradient penalty differentiates the raw score.
struct Discriminator {
    Mlp net;            // leaky-relu hidden
    std::size_t pac = 10;
    std::size_t unit_dim = 0;  // D_enc + D_cond per sample
};

Discriminator make_discriminator(std::size_t unit_dim, const GanArchitecture& arch, RngStream& rng);

// Group n rows (n divisible by pac) into n/pac packed discriminator inputs.
Matrix pack_rows(const Matrix& rows, std::size_t pac);

// Raw (pre-sigmoid) scores for packed inputs.
std::vector<double> discriminator_scores(const Discriminator& disc, const Matrix& packed);

double sigmoid(double x);

struct DiscriminatorLoss {
    double total = 0.0;
    double classification = 0.0;
    double penalty = 0.0;  // before the gp coefficient
};

// Cross-entropy classification plus gradient penalty over interpolates
// x_hat = u*real + (1-u)*fake (one u per pac group). `real_rows`/`fake_rows`
// are per-sample rows (encoded ++ cond); both row counts must be equal and
// divisible by pac. Gradients accumulate into `grads` when non-null.
DiscriminatorLoss discriminator_loss(const Discriminator& disc, const Matrix& real_rows,
                                     const Matrix& fake_rows, std::span<const double> u,
                                     double gp_coef, MlpGrads* grads = nullptr);

enum class GenLossKind { minimax = 0, heuristic = 1, least_square = 2 };

GenLossKind gen_loss_from_index(int index);
const char* gen_loss_name(GenLossKind kind);

// Adversarial component M^a from discriminator probabilities in (0, 1).
double generator_adversarial_loss(GenLossKind kind, std::span<const double> d_probs);

// Cross-entropy between each row's soft block for the chosen categorical
// column and the conditioned category.
double condition_loss(const Matrix& soft, const EncodedLayout& layout, const CondLayout& cond,
                      std::span<const ChosenCondition> chosen);

// Full generator loss M^a + L_condition (value only).
double generator_loss(GenLossKind kind, std::span<const double> d_probs, const Matrix& soft,
                      const EncodedLayout& layout, const CondLayout& cond,
                      std::span<const ChosenCondition> chosen);

struct GeneratorStepResult {
    double adversarial = 0.0;
    double condition = 0.0;
    double total = 0.0;
};

// Loss M^a + L_condition and (optionally) its gradient w.r.t. the generator
// parameters, backpropagated through the frozen discriminator.
GeneratorStepResult generator_loss_and_grads(const Generator& gen, const Discriminator& disc,
                                             const Matrix& z, const Matrix& c1,
                                             std::span<const ChosenCondition> chosen,
                                             GenLossKind kind, RngStream& gumbel_rng,
                                             MlpGrads* grads = nullptr);

// One generator training step: forward, loss, backward through the (frozen)
// discriminator into the generator, Adam update.
GeneratorStepResult generator_train_step(Generator& gen, AdamState& state, const Discriminator& disc,
                                         const Matrix& z, const Matrix& c1,
                                         std::span<const ChosenCondition> chosen, GenLossKind kind,
                                         const AdamConfig& cfg, RngStream& gumbel_rng);

struct DiscriminatorStepResult {
    double total = 0.0;
    double classification = 0.0;
    double penalty = 0.0;
};

DiscriminatorStepResult discriminator_train_step(Discriminator& disc, AdamState& state,
                                                 const Matrix& real_rows, const Matrix& fake_rows,
                                                 double gp_coef, const AdamConfig& cfg,
                                                 RngStream& u_rng);

}  // namespace tabsynth
