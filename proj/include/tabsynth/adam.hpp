#pragma once

#include <vector>

#include "tabsynth/nets.hpp"

namespace tabsynth {

struct AdamConfig {
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double weight_decay = 1e-6;
    double epsilon = 1e-8;

    void validate() const;
};

struct AdamState {
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
    long step = 0;

    static AdamState zeros_like(const Mlp& net);
};

// One bias-corrected Adam update with decoupled weight decay:
//   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)
void adam_step(Mlp& net, const MlpGrads& grads, const AdamConfig& cfg, AdamState& state);

// Scalar form of the same recurrence (exposed for tests).
double adam_update_scalar(double param, double grad, double& m, double& v, long step,
                          const AdamConfig& cfg);

}  // namespace tabsynth
