#pragma once

#include <cstdint>
#include <vector>

#include "tabsynth/kernels.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

enum class HiddenActivation { relu, leaky_relu };  // leaky slope fixed at 0.2

struct DenseLayer {
    Matrix w;               // out x in
    std::vector<double> b;  // out
};

// Plain fully-connected net; the last layer emits raw pre-activations.
struct Mlp {
    std::vector<DenseLayer> layers;
    HiddenActivation activation = HiddenActivation::relu;

    std::size_t input_dim() const { return layers.front().w.cols(); }
    std::size_t output_dim() const { return layers.back().w.rows(); }
    std::size_t parameter_count() const;
};

Mlp make_mlp(std::size_t in_dim, const std::vector<std::size_t>& hidden, std::size_t out_dim,
             HiddenActivation act, RngStream& rng);

// Per-batch forward cache: inputs[k] feeds layer k, pre[k] = its raw output.
struct MlpCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> pre;
};

struct MlpGrads {
    std::vector<Matrix> w;
    std::vector<std::vector<double>> b;

    static MlpGrads zeros_like(const Mlp& net);
    void scale(double s);
    double max_abs() const;
};

// Returns raw final-layer outputs (n x out_dim).
Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpCache* cache = nullptr);

// Backpropagate d(loss)/d(output); accumulates into `grads` when non-null.
// Returns d(loss)/d(input). When `pre_grads` is non-null it receives the
// gradient w.r.t. each layer's pre-activation (needed for double backward).
Matrix mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& dout, MlpGrads* grads,
                    std::vector<Matrix>* pre_grads = nullptr);

// Second-order pass for gradient-penalty terms. Given the input-gradient
// chain of a scalar-output net (pre_grads from mlp_backward with dout = 1)
// and dP/d(input gradient) rows `ghat`, accumulates dP/d(weights). Piecewise
// linear activations: the activation masks are treated as locally constant.
void mlp_penalty_backward(const Mlp& net, const MlpCache& cache,
                          const std::vector<Matrix>& pre_grads, const Matrix& ghat,
                          MlpGrads* grads);

}  // namespace tabsynth
