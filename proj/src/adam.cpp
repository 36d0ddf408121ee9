#include "tabsynth/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace tabsynth {

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("AdamConfig: learning_rate must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("AdamConfig: betas must lie in [0, 1)");
    if (weight_decay < 0.0) throw std::invalid_argument("AdamConfig: weight_decay must be >= 0");
}

AdamState AdamState::zeros_like(const Mlp& net) {
    AdamState st;
    for (const auto& l : net.layers) {
        st.mw.emplace_back(l.w.rows(), l.w.cols(), 0.0);
        st.vw.emplace_back(l.w.rows(), l.w.cols(), 0.0);
        st.mb.emplace_back(l.b.size(), 0.0);
        st.vb.emplace_back(l.b.size(), 0.0);
    }
    return st;
}

double adam_update_scalar(double param, double grad, double& m, double& v, long step,
                          const AdamConfig& cfg) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    const double m_hat = m / (1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
    const double v_hat = v / (1.0 - std::pow(cfg.beta2, static_cast<double>(step)));
    return param - cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) +
                                        cfg.weight_decay * param);
}

void adam_step(Mlp& net, const MlpGrads& grads, const AdamConfig& cfg, AdamState& state) {
    ++state.step;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        auto& w = net.layers[k].w;
        for (std::size_t i = 0; i < w.size(); ++i)
            w.data()[i] = adam_update_scalar(w.data()[i], grads.w[k].data()[i], state.mw[k].data()[i],
                                             state.vw[k].data()[i], state.step, cfg);
        auto& b = net.layers[k].b;
        for (std::size_t i = 0; i < b.size(); ++i)
            b[i] = adam_update_scalar(b[i], grads.b[k][i], state.mb[k][i], state.vb[k][i], state.step,
                                      cfg);
    }
}

}  // namespace tabsynth
