#include "tabsynth/gan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tabsynth {

namespace {

constexpr double kProbEps = 1e-8;

double softplus(double x) {  // log(1 + e^x), overflow-safe
    return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row mismatch");
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        auto ra = a.row(i);
        auto rb = b.row(i);
        std::copy(ra.begin(), ra.end(), dst.begin());
        std::copy(rb.begin(), rb.end(), dst.begin() + a.cols());
    }
    return out;
}

}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Generator make_generator(const EncodedLayout& layout, const CondLayout& cond_layout,
                         const GanArchitecture& arch, RngStream& rng) {
    Generator gen;
    gen.layout = layout;
    gen.cond_layout = cond_layout;
    gen.noise_dim = arch.noise_dim;
    gen.cond_dim = cond_layout.total;
    gen.gumbel_tau = arch.gumbel_tau;
    gen.net = make_mlp(arch.noise_dim + cond_layout.total, arch.generator_hidden, layout.width,
                       HiddenActivation::relu, rng);
    return gen;
}

Generator clone_generator(const Generator& gen) { return gen; }

Discriminator make_discriminator(std::size_t unit_dim, const GanArchitecture& arch, RngStream& rng) {
    Discriminator disc;
    disc.pac = arch.pac;
    disc.unit_dim = unit_dim;
    disc.net = make_mlp(arch.pac * unit_dim, arch.discriminator_hidden, 1,
                        HiddenActivation::leaky_relu, rng);
    return disc;
}

Matrix pack_rows(const Matrix& rows, std::size_t pac) {
    if (pac == 0 || rows.rows() % pac != 0)
        throw std::invalid_argument("pack_rows: row count " + std::to_string(rows.rows()) +
                                    " not divisible by pac " + std::to_string(pac));
    const std::size_t groups = rows.rows() / pac;
    Matrix out(groups, pac * rows.cols());
    for (std::size_t g = 0; g < groups; ++g) {
        auto dst = out.row(g);
        for (std::size_t p = 0; p < pac; ++p) {
            auto src = rows.row(g * pac + p);
            std::copy(src.begin(), src.end(), dst.begin() + p * rows.cols());
        }
    }
    return out;
}

static Matrix unpack_rows(const Matrix& packed, std::size_t pac, std::size_t unit_dim) {
    Matrix out(packed.rows() * pac, unit_dim);
    for (std::size_t g = 0; g < packed.rows(); ++g) {
        auto src = packed.row(g);
        for (std::size_t p = 0; p < pac; ++p) {
            auto dst = out.row(g * pac + p);
            std::copy(src.begin() + p * unit_dim, src.begin() + (p + 1) * unit_dim, dst.begin());
        }
    }
    return out;
}

GeneratorForward generator_forward(const Generator& gen, const Matrix& z, const Matrix& c1,
                                   RngStream& gumbel_rng) {
    if (z.cols() != gen.noise_dim) throw std::invalid_argument("generate: noise width mismatch");
    if (c1.cols() != gen.cond_dim) throw std::invalid_argument("generate: cond width mismatch");
    GeneratorForward fwd;
    const Matrix input = concat_cols(z, c1);
    Matrix raw = mlp_forward(gen.net, input, &fwd.cache);
    // Output activations: tanh on scalar slots, Gumbel-softmax per one-hot block.
    const double tau = gen.gumbel_tau;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        auto row = raw.row(i);
        for (const auto& block : gen.layout.blocks) {
            std::size_t off = block.offset;
            if (block.continuous) {
                row[off] = std::tanh(row[off]);
                off += 1;
            }
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < block.width; ++j) {
                row[off + j] = (row[off + j] + gumbel_rng.gumbel()) / tau;
                mx = std::max(mx, row[off + j]);
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < block.width; ++j) {
                row[off + j] = std::exp(row[off + j] - mx);
                sum += row[off + j];
            }
            for (std::size_t j = 0; j < block.width; ++j) row[off + j] /= sum;
        }
    }
    fwd.soft = std::move(raw);
    return fwd;
}

Matrix generate(const Generator& gen, const Matrix& z, const Matrix& c1, RngStream& gumbel_rng) {
    return generator_forward(gen, z, c1, gumbel_rng).soft;
}

void generator_backward(const Generator& gen, const GeneratorForward& fwd, const Matrix& dsoft,
                        MlpGrads* grads) {
    const Matrix& y = fwd.soft;
    Matrix dz(dsoft.rows(), dsoft.cols());
    const double tau = gen.gumbel_tau;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        auto yr = y.row(i);
        auto dy = dsoft.row(i);
        auto dzr = dz.row(i);
        for (const auto& block : gen.layout.blocks) {
            std::size_t off = block.offset;
            if (block.continuous) {
                dzr[off] = dy[off] * (1.0 - yr[off] * yr[off]);
                off += 1;
            }
            double dot = 0.0;
            for (std::size_t j = 0; j < block.width; ++j) dot += dy[off + j] * yr[off + j];
            for (std::size_t j = 0; j < block.width; ++j)
                dzr[off + j] = yr[off + j] * (dy[off + j] - dot) / tau;
        }
    }
    mlp_backward(gen.net, fwd.cache, dz, grads);
}

std::vector<double> discriminator_scores(const Discriminator& disc, const Matrix& packed) {
    Matrix s = mlp_forward(disc.net, packed, nullptr);
    std::vector<double> out(s.rows());
    for (std::size_t i = 0; i < s.rows(); ++i) out[i] = s(i, 0);
    return out;
}

DiscriminatorLoss discriminator_loss(const Discriminator& disc, const Matrix& real_rows,
                                     const Matrix& fake_rows, std::span<const double> u,
                                     double gp_coef, MlpGrads* grads) {
    if (!real_rows.same_shape(fake_rows))
        throw std::invalid_argument("discriminator_loss: real/fake shape mismatch");
    if (real_rows.cols() != disc.unit_dim)
        throw std::invalid_argument("discriminator_loss: row width != discriminator unit width");
    if (real_rows.rows() % disc.pac != 0)
        throw std::invalid_argument("discriminator_loss: batch not divisible by pac");
    const Matrix real = pack_rows(real_rows, disc.pac);
    const Matrix fake = pack_rows(fake_rows, disc.pac);
    const std::size_t m = real.rows();
    if (u.size() != m)
        throw std::invalid_argument("discriminator_loss: need one interpolation u per pac group");

    DiscriminatorLoss out;
    const double inv_m = 1.0 / static_cast<double>(m);

    // -mean log D(real): backprop only when grads are wanted.
    {
        MlpCache cache;
        Matrix s = mlp_forward(disc.net, real, grads ? &cache : nullptr);
        Matrix ds(m, 1);
        for (std::size_t i = 0; i < m; ++i) {
            out.classification += softplus(-s(i, 0)) * inv_m;
            ds(i, 0) = -(1.0 - sigmoid(s(i, 0))) * inv_m;
        }
        if (grads) mlp_backward(disc.net, cache, ds, grads);
    }
    // -mean log(1 - D(fake)).
    {
        MlpCache cache;
        Matrix s = mlp_forward(disc.net, fake, grads ? &cache : nullptr);
        Matrix ds(m, 1);
        for (std::size_t i = 0; i < m; ++i) {
            out.classification += softplus(s(i, 0)) * inv_m;
            ds(i, 0) = sigmoid(s(i, 0)) * inv_m;
        }
        if (grads) mlp_backward(disc.net, cache, ds, grads);
    }
    // Gradient penalty on interpolates, one u per pac group; the penalty
    // differentiates the raw score, not the sigmoid output.
    {
        Matrix interp(m, real.cols());
        for (std::size_t i = 0; i < m; ++i) {
            auto r = real.row(i);
            auto f = fake.row(i);
            auto x = interp.row(i);
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = u[i] * r[j] + (1.0 - u[i]) * f[j];
        }
        MlpCache cache;
        mlp_forward(disc.net, interp, &cache);
        std::vector<Matrix> pre_grads;
        Matrix ones(m, 1, 1.0);
        Matrix g = mlp_backward(disc.net, cache, ones, nullptr, &pre_grads);
        Matrix ghat(m, g.cols(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double norm2 = 0.0;
            auto gi = g.row(i);
            for (double v : gi) norm2 += v * v;
            const double norm = std::sqrt(norm2);
            out.penalty += (norm - 1.0) * (norm - 1.0) * inv_m;
            if (grads && norm > 1e-12) {
                const double c = gp_coef * 2.0 * (norm - 1.0) / norm * inv_m;
                auto gh = ghat.row(i);
                for (std::size_t j = 0; j < gi.size(); ++j) gh[j] = c * gi[j];
            }
        }
        if (grads) mlp_penalty_backward(disc.net, cache, pre_grads, ghat, grads);
    }
    out.total = out.classification + gp_coef * out.penalty;
    return out;
}

GenLossKind gen_loss_from_index(int index) {
    switch (index) {
        case 0: return GenLossKind::minimax;
        case 1: return GenLossKind::heuristic;
        case 2: return GenLossKind::least_square;
        default: throw std::invalid_argument("unknown generator loss index " + std::to_string(index));
    }
}

const char* gen_loss_name(GenLossKind kind) {
    switch (kind) {
        case GenLossKind::minimax: return "minimax";
        case GenLossKind::heuristic: return "heuristic";
        case GenLossKind::least_square: return "least_square";
    }
    return "?";
}

double generator_adversarial_loss(GenLossKind kind, std::span<const double> d_probs) {
    if (d_probs.empty()) throw std::invalid_argument("generator_adversarial_loss: empty scores");
    double acc = 0.0;
    for (double p : d_probs) {
        const double pc = std::clamp(p, kProbEps, 1.0 - kProbEps);
        switch (kind) {
            case GenLossKind::minimax: acc += 0.5 * std::log(1.0 - pc); break;
            case GenLossKind::heuristic: acc += -0.5 * std::log(pc); break;
            case GenLossKind::least_square: acc += (pc - 1.0) * (pc - 1.0); break;
        }
    }
    return acc / static_cast<double>(d_probs.size());
}

double condition_loss(const Matrix& soft, const EncodedLayout& layout, const CondLayout& cond,
                      std::span<const ChosenCondition> chosen) {
    if (soft.rows() != chosen.size())
        throw std::invalid_argument("condition_loss: one chosen condition per row required");
    // cond block index -> offset of that column's block in the encoded row
    std::vector<std::size_t> enc_offset(cond.block_count());
    for (std::size_t b = 0; b < cond.block_count(); ++b) {
        for (const auto& eb : layout.blocks)
            if (!eb.continuous && eb.column == cond.column[b]) enc_offset[b] = eb.offset;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const double p = soft(i, enc_offset[chosen[i].block] + static_cast<std::size_t>(chosen[i].category));
        acc += -std::log(std::max(p, kProbEps));
    }
    return acc / static_cast<double>(chosen.size());
}

double generator_loss(GenLossKind kind, std::span<const double> d_probs, const Matrix& soft,
                      const EncodedLayout& layout, const CondLayout& cond,
                      std::span<const ChosenCondition> chosen) {
    return generator_adversarial_loss(kind, d_probs) + condition_loss(soft, layout, cond, chosen);
}

GeneratorStepResult generator_loss_and_grads(const Generator& gen, const Discriminator& disc,
                                             const Matrix& z, const Matrix& c1,
                                             std::span<const ChosenCondition> chosen,
                                             GenLossKind kind, RngStream& gumbel_rng,
                                             MlpGrads* grads) {
    GeneratorForward fwd = generator_forward(gen, z, c1, gumbel_rng);
    const std::size_t n = fwd.soft.rows();
    const Matrix rows = concat_cols(fwd.soft, c1);
    const Matrix packed = pack_rows(rows, disc.pac);
    const std::size_t m = packed.rows();
    const double inv_m = 1.0 / static_cast<double>(m);

    MlpCache dcache;
    Matrix s = mlp_forward(disc.net, packed, &dcache);

    GeneratorStepResult res;
    Matrix ds(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        const double si = s(i, 0);
        const double p = sigmoid(si);
        switch (kind) {
            case GenLossKind::minimax:
                res.adversarial += -0.5 * softplus(si) * inv_m;  // 0.5*log(1-p)
                ds(i, 0) = -0.5 * p * inv_m;
                break;
            case GenLossKind::heuristic:
                res.adversarial += 0.5 * softplus(-si) * inv_m;  // -0.5*log(p)
                ds(i, 0) = -0.5 * (1.0 - p) * inv_m;
                break;
            case GenLossKind::least_square:
                res.adversarial += (p - 1.0) * (p - 1.0) * inv_m;
                ds(i, 0) = 2.0 * (p - 1.0) * p * (1.0 - p) * inv_m;
                break;
        }
    }
    Matrix dpacked = mlp_backward(disc.net, dcache, ds, nullptr);
    Matrix drows = unpack_rows(dpacked, disc.pac, disc.unit_dim);

    // Slice off the conditional part; add the condition-loss gradient.
    Matrix dsoft(n, gen.layout.width);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = drows.row(i);
        auto dst = dsoft.row(i);
        std::copy(src.begin(), src.begin() + gen.layout.width, dst.begin());
    }
    res.condition = condition_loss(fwd.soft, gen.layout, gen.cond_layout, chosen);
    {
        std::vector<std::size_t> enc_offset(gen.cond_layout.block_count());
        for (std::size_t b = 0; b < gen.cond_layout.block_count(); ++b)
            for (const auto& eb : gen.layout.blocks)
                if (!eb.continuous && eb.column == gen.cond_layout.column[b]) enc_offset[b] = eb.offset;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            const std::size_t col = enc_offset[chosen[i].block] + static_cast<std::size_t>(chosen[i].category);
            const double p = fwd.soft(i, col);
            if (p > kProbEps) dsoft(i, col) += -inv_n / p;
        }
    }
    res.total = res.adversarial + res.condition;
    if (grads) generator_backward(gen, fwd, dsoft, grads);
    return res;
}

GeneratorStepResult generator_train_step(Generator& gen, AdamState& state, const Discriminator& disc,
                                         const Matrix& z, const Matrix& c1,
                                         std::span<const ChosenCondition> chosen, GenLossKind kind,
                                         const AdamConfig& cfg, RngStream& gumbel_rng) {
    MlpGrads grads = MlpGrads::zeros_like(gen.net);
    const GeneratorStepResult res =
        generator_loss_and_grads(gen, disc, z, c1, chosen, kind, gumbel_rng, &grads);
    adam_step(gen.net, grads, cfg, state);
    return res;
}

DiscriminatorStepResult discriminator_train_step(Discriminator& disc, AdamState& state,
                                                 const Matrix& real_rows, const Matrix& fake_rows,
                                                 double gp_coef, const AdamConfig& cfg,
                                                 RngStream& u_rng) {
    const std::size_t m = real_rows.rows() / disc.pac;
    std::vector<double> u(m);
    for (auto& v : u) v = u_rng.uniform();
    MlpGrads grads = MlpGrads::zeros_like(disc.net);
    DiscriminatorLoss loss = discriminator_loss(disc, real_rows, fake_rows, u, gp_coef, &grads);
    adam_step(disc.net, grads, cfg, state);
    return {loss.total, loss.classification, loss.penalty};
}

}  // namespace tabsynth
