#include "tabsynth/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tabsynth {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.storage()}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.size()) throw ParseError("checkpoint: matrix payload size mismatch");
    m.storage() = data;
    return m;
}

json mlp_to_json(const Mlp& net) {
    json layers = json::array();
    for (const auto& l : net.layers) layers.push_back({{"w", matrix_to_json(l.w)}, {"b", l.b}});
    return json{{"activation", net.activation == HiddenActivation::relu ? "relu" : "leaky_relu"},
                {"layers", layers}};
}

Mlp mlp_from_json(const json& j) {
    Mlp net;
    net.activation = j.at("activation").get<std::string>() == "relu" ? HiddenActivation::relu
                                                                     : HiddenActivation::leaky_relu;
    for (const auto& lj : j.at("layers")) {
        DenseLayer l;
        l.w = matrix_from_json(lj.at("w"));
        l.b = lj.at("b").get<std::vector<double>>();
        net.layers.push_back(std::move(l));
    }
    return net;
}

json adam_state_to_json(const AdamState& st) {
    json mw = json::array(), vw = json::array();
    for (const auto& m : st.mw) mw.push_back(matrix_to_json(m));
    for (const auto& m : st.vw) vw.push_back(matrix_to_json(m));
    return json{{"mw", mw}, {"vw", vw}, {"mb", st.mb}, {"vb", st.vb}, {"step", st.step}};
}

AdamState adam_state_from_json(const json& j) {
    AdamState st;
    for (const auto& m : j.at("mw")) st.mw.push_back(matrix_from_json(m));
    for (const auto& m : j.at("vw")) st.vw.push_back(matrix_from_json(m));
    st.mb = j.at("mb").get<std::vector<std::vector<double>>>();
    st.vb = j.at("vb").get<std::vector<std::vector<double>>>();
    st.step = j.at("step").get<long>();
    return st;
}

json encoder_to_json(const ContinuousEncoder& e) {
    return json{{"column", e.column},
                {"means", e.mode_means},
                {"stds", e.mode_stds},
                {"weights", e.mode_weights}};
}

ContinuousEncoder encoder_from_json(const json& j) {
    ContinuousEncoder e;
    e.column = j.at("column").get<std::string>();
    e.mode_means = j.at("means").get<std::vector<double>>();
    e.mode_stds = j.at("stds").get<std::vector<double>>();
    e.mode_weights = j.at("weights").get<std::vector<double>>();
    return e;
}

json generator_to_json(const Generator& g) {
    return json{{"net", mlp_to_json(g.net)},
                {"noise_dim", g.noise_dim},
                {"gumbel_tau", g.gumbel_tau}};
}

Generator generator_from_json(const json& j, const TableEncoder& encoder) {
    Generator g;
    g.net = mlp_from_json(j.at("net"));
    g.noise_dim = j.at("noise_dim").get<std::size_t>();
    g.gumbel_tau = j.at("gumbel_tau").get<double>();
    g.layout = encoder.layout();
    g.cond_layout = encoder.cond_layout();
    g.cond_dim = encoder.cond_width();
    return g;
}

}  // namespace

void save_checkpoint(const RunState& state, bool include_population,
                     const std::filesystem::path& path) {
    json j;
    j["format"] = "tabsynth-checkpoint-v1";
    j["config"] = json::parse(state.config.to_json());
    j["schema"] = json::parse(schema_to_json(state.encoder.schema()));
    json encs = json::array();
    for (const auto& e : state.encoder.continuous_encoders()) encs.push_back(encoder_to_json(e));
    j["continuous_encoders"] = encs;
    j["condition_frequencies"] = state.sampler.frequencies();
    j["counters"] = {{"step", state.step}, {"epoch", state.epoch}};
    j["rng"] = {{"data", state.data_rng.serialize_state()},
                {"noise", state.noise_rng.serialize_state()},
                {"gumbel", state.gumbel_rng.serialize_state()},
                {"rl", state.rl_rng.serialize_state()},
                {"eval", state.eval_rng.serialize_state()}};
    if (state.incumbent) {
        j["incumbent"] = {{"generator", generator_to_json(state.incumbent->gen)},
                          {"f_u", state.incumbent->f_u},
                          {"f_r", state.incumbent->f_r},
                          {"epoch", state.incumbent->epoch}};
    }
    if (include_population) {
        json pop = json::array();
        for (const auto& ind : state.population) {
            pop.push_back({{"generator", generator_to_json(ind.gen)},
                           {"adam", adam_state_to_json(ind.adam)},
                           {"f_u", ind.f_u},
                           {"f_r", ind.f_r},
                           {"rank", ind.rank},
                           {"crowd", ind.crowd}});
        }
        j["population"] = std::move(pop);
        j["discriminator"] = {{"net", mlp_to_json(state.disc.net)},
                              {"pac", state.disc.pac},
                              {"unit_dim", state.disc.unit_dim},
                              {"adam", adam_state_to_json(state.disc_adam)}};
        j["q_function"] = {{"net", mlp_to_json(state.q.net)},
                           {"adam_state", adam_state_to_json(state.q.state)},
                           {"buffer_size", state.buffer.size()}};
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open checkpoint file '" + path.string() + "' for writing");
    out << j.dump();
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("checkpoint '" + path.string() + "': " + e.what());
    }
    if (j.value("format", "") != "tabsynth-checkpoint-v1")
        throw ParseError("checkpoint '" + path.string() + "': unknown format");

    LoadedCheckpoint cp;
    cp.config = TrainConfig::from_json(j.at("config").dump());
    TableSchema schema = schema_from_json(j.at("schema").dump());
    std::vector<ContinuousEncoder> encoders;
    for (const auto& e : j.at("continuous_encoders")) encoders.push_back(encoder_from_json(e));
    cp.encoder = TableEncoder::from_parts(schema, std::move(encoders));
    cp.sampler = CondvecSampler::from_frequencies(
        schema, j.at("condition_frequencies").get<std::vector<std::vector<double>>>());
    cp.step = j.at("counters").at("step").get<std::size_t>();
    cp.epoch = j.at("counters").at("epoch").get<std::size_t>();
    if (j.contains("incumbent")) {
        Incumbent inc;
        inc.gen = generator_from_json(j.at("incumbent").at("generator"), cp.encoder);
        inc.f_u = j.at("incumbent").at("f_u").get<double>();
        inc.f_r = j.at("incumbent").at("f_r").get<double>();
        inc.epoch = j.at("incumbent").at("epoch").get<std::size_t>();
        cp.incumbent = std::move(inc);
    }
    if (j.contains("population")) {
        for (const auto& pj : j.at("population")) {
            Individual ind;
            ind.gen = generator_from_json(pj.at("generator"), cp.encoder);
            ind.adam = adam_state_from_json(pj.at("adam"));
            ind.f_u = pj.at("f_u").get<double>();
            ind.f_r = pj.at("f_r").get<double>();
            ind.rank = pj.at("rank").get<int>();
            ind.crowd = pj.at("crowd").get<double>();
            cp.population.push_back(std::move(ind));
        }
    }
    return cp;
}

Table LoadedCheckpoint::synthesize(const SynthesisRequest& req) const {
    const Generator* gen = nullptr;
    switch (req.policy) {
        case SelectionPolicy::improvement:
            if (!incumbent) throw std::invalid_argument("checkpoint has no incumbent generator");
            gen = &incumbent->gen;
            break;
        case SelectionPolicy::max_utility: {
            if (population.empty())
                throw std::invalid_argument("checkpoint has no population (incumbent-only)");
            std::size_t best = 0;
            for (std::size_t i = 1; i < population.size(); ++i)
                if (population[i].f_u > population[best].f_u) best = i;
            gen = &population[best].gen;
            break;
        }
        case SelectionPolicy::index:
            if (req.index >= population.size())
                throw std::invalid_argument("generator index " + std::to_string(req.index) +
                                            " out of range (population size " +
                                            std::to_string(population.size()) + ")");
            gen = &population[req.index].gen;
            break;
    }
    return synthesize_rows(*gen, encoder, sampler, req.rows, req.seed);
}

}  // namespace tabsynth
