#include "tabsynth/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tabsynth/checkpoint.hpp"

namespace tabsynth {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json adam_to_json(const AdamConfig& a) {
    return json{{"learning_rate", a.learning_rate},
                {"beta1", a.beta1},
                {"beta2", a.beta2},
                {"weight_decay", a.weight_decay}};
}

AdamConfig adam_from_json(const json& j, AdamConfig base) {
    base.learning_rate = j.value("learning_rate", base.learning_rate);
    base.beta1 = j.value("beta1", base.beta1);
    base.beta2 = j.value("beta2", base.beta2);
    base.weight_decay = j.value("weight_decay", base.weight_decay);
    return base;
}

double mlp_param_norm(const Mlp& net) {
    double mx = 0.0;
    for (const auto& l : net.layers) {
        for (std::size_t i = 0; i < l.w.size(); ++i) mx = std::max(mx, std::abs(l.w.data()[i]));
        for (double b : l.b) mx = std::max(mx, std::abs(b));
    }
    return mx;
}

}  // namespace

void TrainConfig::validate(const TableSchema& schema) const {
    if (mu < 1) throw std::invalid_argument("config: mu must be >= 1");
    if (select_every < 1) throw std::invalid_argument("config: select_every (H) must be >= 1");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (batch_size % arch.pac != 0)
        throw std::invalid_argument("config: batch_size must be divisible by pac");
    if (batch_size % mu != 0)
        throw std::invalid_argument("config: batch_size must be divisible by mu");
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("config: epsilon must lie in [0, 1]");
    if (!(lambda > 0.0)) throw std::invalid_argument("config: lambda must be > 0");
    if (n_eval < 100) throw std::invalid_argument("config: n_eval must be >= 100");
    if (max_modes < 1) throw std::invalid_argument("config: max_modes must be >= 1");
    gen_adam.validate();
    disc_adam.validate();
    qlearn.adam.validate();
    schema.validate();
    metrics.validate(schema);
}

std::string TrainConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["mu"] = mu;
    j["select_every"] = select_every;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["disc_steps"] = disc_steps;
    j["epsilon"] = epsilon;
    j["lambda"] = lambda;
    j["risk_floor"] = risk_floor;
    j["n_eval"] = n_eval;
    j["max_modes"] = max_modes;
    j["generator_adam"] = adam_to_json(gen_adam);
    j["discriminator_adam"] = adam_to_json(disc_adam);
    j["architecture"] = {{"noise_dim", arch.noise_dim},
                         {"generator_hidden", arch.generator_hidden},
                         {"discriminator_hidden", arch.discriminator_hidden},
                         {"pac", arch.pac},
                         {"gumbel_tau", arch.gumbel_tau},
                         {"gp_coef", arch.gp_coef}};
    j["q_learning"] = {{"gamma", qlearn.gamma},
                       {"replay_capacity", qlearn.replay_capacity},
                       {"batch_size", qlearn.batch_size},
                       {"hidden", qlearn.hidden},
                       {"adam", adam_to_json(qlearn.adam)}};
    json regs = json::array();
    for (const auto& r : metrics.cio_regressions)
        regs.push_back({{"target", r.target}, {"predictors", r.predictors}});
    j["metrics"] = {{"cio_regressions", regs},
                    {"roc_columns", metrics.roc_columns},
                    {"tcap_keys", metrics.tcap_keys},
                    {"tcap_target", metrics.tcap_target}};
    return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config json: ") + e.what());
    }
    TrainConfig c;
    c.seed = j.value("seed", c.seed);
    c.mu = j.value("mu", c.mu);
    c.select_every = j.value("select_every", c.select_every);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.disc_steps = j.value("disc_steps", c.disc_steps);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.lambda = j.value("lambda", c.lambda);
    c.risk_floor = j.value("risk_floor", c.risk_floor);
    c.n_eval = j.value("n_eval", c.n_eval);
    c.max_modes = j.value("max_modes", c.max_modes);
    if (j.contains("generator_adam")) c.gen_adam = adam_from_json(j["generator_adam"], c.gen_adam);
    if (j.contains("discriminator_adam"))
        c.disc_adam = adam_from_json(j["discriminator_adam"], c.disc_adam);
    if (j.contains("architecture")) {
        const auto& a = j["architecture"];
        c.arch.noise_dim = a.value("noise_dim", c.arch.noise_dim);
        c.arch.generator_hidden = a.value("generator_hidden", c.arch.generator_hidden);
        c.arch.discriminator_hidden = a.value("discriminator_hidden", c.arch.discriminator_hidden);
        c.arch.pac = a.value("pac", c.arch.pac);
        c.arch.gumbel_tau = a.value("gumbel_tau", c.arch.gumbel_tau);
        c.arch.gp_coef = a.value("gp_coef", c.arch.gp_coef);
    }
    if (j.contains("q_learning")) {
        const auto& q = j["q_learning"];
        c.qlearn.gamma = q.value("gamma", c.qlearn.gamma);
        c.qlearn.replay_capacity = q.value("replay_capacity", c.qlearn.replay_capacity);
        c.qlearn.batch_size = q.value("batch_size", c.qlearn.batch_size);
        c.qlearn.hidden = q.value("hidden", c.qlearn.hidden);
        if (q.contains("adam")) c.qlearn.adam = adam_from_json(q["adam"], c.qlearn.adam);
    }
    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        c.metrics.cio_regressions.clear();
        for (const auto& r : m.value("cio_regressions", json::array())) {
            RegressionSpec rs;
            rs.target = r.at("target").get<std::string>();
            rs.predictors = r.at("predictors").get<std::vector<std::string>>();
            c.metrics.cio_regressions.push_back(std::move(rs));
        }
        c.metrics.roc_columns = m.value("roc_columns", std::vector<std::string>{});
        c.metrics.tcap_keys = m.value("tcap_keys", std::vector<std::string>{});
        c.metrics.tcap_target = m.value("tcap_target", std::string{});
    }
    return c;
}

TrainConfig TrainConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

Table synthesize_rows(const Generator& gen, const TableEncoder& encoder,
                      const CondvecSampler& sampler, std::size_t n_rows, std::uint64_t seed) {
    if (n_rows == 0) throw std::invalid_argument("synthesize_rows: n_rows must be >= 1");
    RngStream cond_rng(splitmix64(seed ^ 0xC0D1ULL));
    RngStream noise_rng(splitmix64(seed ^ 0xC0D2ULL));
    RngStream gumbel_rng(splitmix64(seed ^ 0xC0D3ULL));

    Table out;
    out.schema = encoder.schema();
    out.columns.resize(encoder.schema().columns.size());
    for (std::size_t c = 0; c < out.columns.size(); ++c)
        out.columns[c].kind = encoder.schema().columns[c].kind;

    constexpr std::size_t kChunk = 1024;
    std::size_t remaining = n_rows;
    while (remaining > 0) {
        const std::size_t n = std::min(remaining, kChunk);
        Matrix cond;
        std::vector<ChosenCondition> chosen;
        sampler.sample_condvec(n, cond_rng, cond, chosen);
        Matrix z(n, gen.noise_dim);
        for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = noise_rng.normal();
        const Matrix soft = generate(gen, z, cond, gumbel_rng);
        const Table chunk = encoder.decode_rows(soft);
        for (std::size_t c = 0; c < out.columns.size(); ++c) {
            if (out.columns[c].kind == ColumnKind::continuous)
                out.columns[c].reals.insert(out.columns[c].reals.end(), chunk.columns[c].reals.begin(),
                                            chunk.columns[c].reals.end());
            else
                out.columns[c].cats.insert(out.columns[c].cats.end(), chunk.columns[c].cats.begin(),
                                           chunk.columns[c].cats.end());
        }
        remaining -= n;
    }
    return out;
}

std::string curves_to_csv(const std::vector<CurveRow>& curves) {
    std::string out = "epoch,f_u,f_r,improvement\n";
    for (const auto& row : curves) {
        out += std::to_string(row.epoch);
        out.push_back(',');
        out += fmt_double(row.f_u);
        out.push_back(',');
        out += fmt_double(row.f_r);
        out.push_back(',');
        out += fmt_double(row.improvement);
        out.push_back('\n');
    }
    return out;
}

namespace {

RowSynthesizer make_synth_fn(const Generator& gen, const TableEncoder& encoder,
                             const CondvecSampler& sampler) {
    return [&gen, &encoder, &sampler](std::size_t n, std::uint64_t seed) {
        return synthesize_rows(gen, encoder, sampler, n, seed);
    };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
    out << text;
}

json report_entry(const Table& original, const Table& synthetic, const MetricSpec& spec) {
    return json::parse(evaluate_tables(original, synthetic, spec).to_json());
}

}  // namespace

RunState train(const Table& original, const TrainConfig& cfg, const std::filesystem::path& out_dir) {
    original.validate();
    cfg.validate(original.schema);

    const bool emit = !out_dir.empty();
    if (emit) {
        std::filesystem::create_directories(out_dir);
        std::filesystem::create_directories(out_dir / "checkpoints");
        write_text(out_dir / "config.json", cfg.to_json());
    }

    RunState st;
    st.config = cfg;
    st.data_rng = RngStream(splitmix64(cfg.seed ^ 0x01ULL));
    st.noise_rng = RngStream(splitmix64(cfg.seed ^ 0x02ULL));
    st.gumbel_rng = RngStream(splitmix64(cfg.seed ^ 0x03ULL));
    st.rl_rng = RngStream(splitmix64(cfg.seed ^ 0x04ULL));
    st.eval_rng = RngStream(splitmix64(cfg.seed ^ 0x05ULL));
    RngStream init_rng(splitmix64(cfg.seed ^ 0x06ULL));

    st.encoder = TableEncoder::fit(original, cfg.max_modes, 0.005, splitmix64(cfg.seed ^ 0x07ULL));
    st.sampler = CondvecSampler::build(original);
    const std::size_t unit_dim = st.encoder.encoded_width() + st.encoder.cond_width();

    st.disc = make_discriminator(unit_dim, cfg.arch, init_rng);
    st.disc_adam = AdamState::zeros_like(st.disc.net);
    st.q = make_qfunction(init_rng, cfg.qlearn.hidden, cfg.qlearn.adam);
    st.buffer = ReplayBuffer(cfg.qlearn.replay_capacity);

    st.population.resize(cfg.mu);
    for (auto& ind : st.population) {
        ind.gen = make_generator(st.encoder.layout(), st.encoder.cond_layout(), cfg.arch, init_rng);
        ind.adam = AdamState::zeros_like(ind.gen.net);
    }
    // Initial objective evaluation on a shared subsample.
    {
        const std::uint64_t seed0 = st.eval_rng.derive(0);
        for (auto& ind : st.population) {
            auto [f_u, f_r] = fast_objectives(make_synth_fn(ind.gen, st.encoder, st.sampler), original,
                                              cfg.metrics, cfg.n_eval, seed0);
            ind.f_u = f_u;
            ind.f_r = f_r;
        }
    }

    const std::size_t n = cfg.batch_size;
    const std::size_t per_gen = n / cfg.mu;
    const std::size_t iters_per_epoch =
        (original.row_count() + n - 1) / n;
    const std::size_t total_iters = cfg.epochs * iters_per_epoch;

    std::vector<std::size_t> real_rows;
    for (std::size_t iter = 1; iter <= total_iters; ++iter) {
        st.step = iter;
        // --- discriminator updates -------------------------------------
        for (std::size_t k = 0; k < cfg.disc_steps; ++k) {
            Matrix c1;
            std::vector<ChosenCondition> chosen;
            st.sampler.sample_condvec(n, st.data_rng, c1, chosen);
            // Re-pair conditions against real data: real rows satisfy a
            // permuted copy of the fake-side conditions.
            std::vector<ChosenCondition> chosen_real = chosen;
            for (std::size_t i = chosen_real.size(); i > 1; --i)
                std::swap(chosen_real[i - 1], chosen_real[st.data_rng.index(i)]);
            Matrix c2;
            st.sampler.sample_real_matching(chosen_real, st.data_rng, real_rows, c2);
            const Matrix real_enc = st.encoder.encode_rows(original, real_rows, st.data_rng);

            Matrix real_full(n, unit_dim);
            for (std::size_t i = 0; i < n; ++i) {
                auto dst = real_full.row(i);
                auto e = real_enc.row(i);
                auto c = c2.row(i);
                std::copy(e.begin(), e.end(), dst.begin());
                std::copy(c.begin(), c.end(), dst.begin() + e.size());
            }
            // Pooled fakes: n/mu rows from each generator, conditions sliced
            // from c1 in population order.
            Matrix fake_full(n, unit_dim);
            for (std::size_t j = 0; j < cfg.mu; ++j) {
                Matrix zj(per_gen, cfg.arch.noise_dim);
                for (std::size_t i = 0; i < zj.size(); ++i) zj.data()[i] = st.noise_rng.normal();
                Matrix c1j(per_gen, st.encoder.cond_width());
                for (std::size_t i = 0; i < per_gen; ++i) {
                    auto src = c1.row(j * per_gen + i);
                    std::copy(src.begin(), src.end(), c1j.row(i).begin());
                }
                const Matrix soft = generate(st.population[j].gen, zj, c1j, st.gumbel_rng);
                for (std::size_t i = 0; i < per_gen; ++i) {
                    auto dst = fake_full.row(j * per_gen + i);
                    auto s = soft.row(i);
                    auto c = c1j.row(i);
                    std::copy(s.begin(), s.end(), dst.begin());
                    std::copy(c.begin(), c.end(), dst.begin() + s.size());
                }
            }
            const auto dres = discriminator_train_step(st.disc, st.disc_adam, real_full, fake_full,
                                                       cfg.arch.gp_coef, cfg.disc_adam, st.noise_rng);
            if (!std::isfinite(dres.total))
                throw TrainingDiverged(
                    "discriminator loss is not finite at step " + std::to_string(iter) +
                    " (classification=" + std::to_string(dres.classification) +
                    ", penalty=" + std::to_string(dres.penalty) +
                    ", |disc|max=" + std::to_string(mlp_param_norm(st.disc.net)) + ")");
        }

        // --- smart variation: one child per generator --------------------
        const std::uint64_t eval_seed = st.eval_rng.derive(iter);
        std::vector<Individual> children;
        children.reserve(cfg.mu);
        for (std::size_t j = 0; j < cfg.mu; ++j) {
            Matrix c1;
            std::vector<ChosenCondition> chosen;
            st.sampler.sample_condvec(n, st.data_rng, c1, chosen);
            Matrix z(n, cfg.arch.noise_dim);
            for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = st.noise_rng.normal();

            SmartVariationContext ctx;
            ctx.disc = &st.disc;
            ctx.z = &z;
            ctx.c1 = &c1;
            ctx.chosen = chosen;
            ctx.gen_adam = &cfg.gen_adam;
            ctx.evaluate = [&](const Generator& g) {
                return fast_objectives(make_synth_fn(g, st.encoder, st.sampler), original, cfg.metrics,
                                       cfg.n_eval, eval_seed);
            };
            GeneratorStepResult gres;
            Individual child = smart_variation(ctx, st.population[j], st.q, st.buffer, cfg.epsilon,
                                               st.rl_rng, st.gumbel_rng, nullptr, &gres);
            if (!std::isfinite(gres.total) || !std::isfinite(child.f_u) || !std::isfinite(child.f_r))
                throw TrainingDiverged(
                    "generator " + std::to_string(j) + " diverged at step " + std::to_string(iter) +
                    " (loss=" + std::to_string(gres.total) + ", f_u=" + std::to_string(child.f_u) +
                    ", f_r=" + std::to_string(child.f_r) +
                    ", |gen|max=" + std::to_string(mlp_param_norm(child.gen.net)) + ")");
            children.push_back(std::move(child));
        }

        // --- survivor selection every H steps, replacement otherwise -----
        if (iter % cfg.select_every == 0) {
            std::vector<ObjectiveVector> pool;
            pool.reserve(2 * cfg.mu);
            for (const auto& p : st.population) pool.push_back(objectives_of(p.f_u, p.f_r, cfg.risk_floor));
            for (const auto& c : children) pool.push_back(objectives_of(c.f_u, c.f_r, cfg.risk_floor));
            const SelectionResult sel = select_survivors(pool, cfg.mu);
            std::vector<Individual> next;
            next.reserve(cfg.mu);
            for (std::size_t idx : sel.survivors) {
                Individual ind = idx < cfg.mu ? std::move(st.population[idx])
                                              : std::move(children[idx - cfg.mu]);
                ind.rank = sel.rank[idx];
                ind.crowd = sel.crowd[idx];
                next.push_back(std::move(ind));
            }
            st.population = std::move(next);
        } else {
            st.population = std::move(children);
        }

        // --- one Q-function regression step when the buffer permits ------
        train_q(st.q, st.buffer, cfg.qlearn.batch_size, cfg.qlearn.gamma, st.rl_rng);

        // --- epoch boundary ----------------------------------------------
        if (iter % iters_per_epoch == 0) {
            ++st.epoch;
            std::size_t best = 0;
            for (std::size_t j = 1; j < st.population.size(); ++j)
                if (st.population[j].f_u > st.population[best].f_u) best = j;
            const auto [f_u, f_r] =
                fast_objectives(make_synth_fn(st.population[best].gen, st.encoder, st.sampler),
                                original, cfg.metrics, cfg.n_eval, st.eval_rng.derive(0xE00 + iter));
            double improvement = 0.0;
            bool adopt = false;
            if (!st.incumbent) {
                adopt = true;
            } else {
                improvement = improvement_score({f_u, f_r}, {st.incumbent->f_u, st.incumbent->f_r},
                                                cfg.lambda);
                adopt = improvement > 0.0;
            }
            if (adopt) {
                st.incumbent = Incumbent{clone_generator(st.population[best].gen), f_u, f_r, st.epoch};
                if (emit)
                    save_checkpoint(st, /*include_population=*/false,
                                    out_dir / "checkpoints" /
                                        ("incumbent_epoch_" + std::to_string(st.epoch) + ".json"));
            }
            st.curves.push_back({st.epoch, f_u, f_r, improvement});
        }
    }

    if (emit) {
        write_text(out_dir / "curves.csv", curves_to_csv(st.curves));
        save_checkpoint(st, /*include_population=*/true, out_dir / "checkpoints" / "final.json");

        // Final population summary for the objective-space scatter.
        json pop = json::array();
        for (std::size_t j = 0; j < st.population.size(); ++j) {
            const auto& ind = st.population[j];
            const double imp = st.incumbent
                                   ? improvement_score({ind.f_u, ind.f_r},
                                                       {st.incumbent->f_u, st.incumbent->f_r}, cfg.lambda)
                                   : 0.0;
            pop.push_back({{"index", j},
                           {"f_u", ind.f_u},
                           {"f_r", ind.f_r},
                           {"rank", ind.rank},
                           {"crowd", std::isfinite(ind.crowd) ? json(ind.crowd) : json("inf")},
                           {"improvement_score", imp},
                           {"checkpoint", "checkpoints/final.json"}});
        }
        write_text(out_dir / "population.json", json(pop).dump(2));

        // Full-size evaluation report: incumbent, max-utility survivor, and
        // the independence-shuffle baseline.
        const std::size_t n_rows = original.row_count();
        json report;
        if (st.incumbent) {
            const Table synth = synthesize_rows(st.incumbent->gen, st.encoder, st.sampler, n_rows,
                                                splitmix64(cfg.seed ^ 0xF1ULL));
            report["incumbent"] = report_entry(original, synth, cfg.metrics);
            report["incumbent"]["epoch"] = st.incumbent->epoch;
        }
        {
            std::size_t best = 0;
            for (std::size_t j = 1; j < st.population.size(); ++j)
                if (st.population[j].f_u > st.population[best].f_u) best = j;
            const Table synth = synthesize_rows(st.population[best].gen, st.encoder, st.sampler,
                                                n_rows, splitmix64(cfg.seed ^ 0xF2ULL));
            report["max_utility"] = report_entry(original, synth, cfg.metrics);
            report["max_utility"]["index"] = best;
        }
        {
            const Table baseline = independence_shuffle(original, splitmix64(cfg.seed ^ 0xF3ULL));
            report["independence_baseline"] = report_entry(original, baseline, cfg.metrics);
        }
        write_text(out_dir / "report.json", report.dump(2));
    }
    return st;
}

Table synthesize_from_state(const RunState& state, const SynthesisRequest& req) {
    const Generator* gen = nullptr;
    switch (req.policy) {
        case SelectionPolicy::improvement:
            if (!state.incumbent) throw std::invalid_argument("no incumbent generator in state");
            gen = &state.incumbent->gen;
            break;
        case SelectionPolicy::max_utility: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < state.population.size(); ++i)
                if (state.population[i].f_u > state.population[best].f_u) best = i;
            gen = &state.population[best].gen;
            break;
        }
        case SelectionPolicy::index:
            if (req.index >= state.population.size())
                throw std::invalid_argument("generator index out of range");
            gen = &state.population[req.index].gen;
            break;
    }
    return synthesize_rows(*gen, state.encoder, state.sampler, req.rows, req.seed);
}

}  // namespace tabsynth
