#include "tabsynth/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace tabsynth {

namespace {

constexpr double kLeakySlope = 0.2;

inline double act_forward(double z, HiddenActivation a) {
    if (a == HiddenActivation::relu) return z > 0.0 ? z : 0.0;
    return z > 0.0 ? z : kLeakySlope * z;
}

inline double act_slope(double z, HiddenActivation a) {
    if (a == HiddenActivation::relu) return z > 0.0 ? 1.0 : 0.0;
    return z > 0.0 ? 1.0 : kLeakySlope;
}

}  // namespace

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

Mlp make_mlp(std::size_t in_dim, const std::vector<std::size_t>& hidden, std::size_t out_dim,
             HiddenActivation act, RngStream& rng) {
    Mlp net;
    net.activation = act;
    std::size_t prev = in_dim;
    auto add_layer = [&](std::size_t out) {
        DenseLayer l;
        l.w = Matrix(out, prev);
        const double scale = std::sqrt(2.0 / static_cast<double>(prev));  // He init
        for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = scale * rng.normal();
        l.b.assign(out, 0.0);
        net.layers.push_back(std::move(l));
        prev = out;
    };
    for (std::size_t h : hidden) add_layer(h);
    add_layer(out_dim);
    return net;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
    MlpGrads g;
    for (const auto& l : net.layers) {
        g.w.emplace_back(l.w.rows(), l.w.cols(), 0.0);
        g.b.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

void MlpGrads::scale(double s) {
    for (auto& m : w)
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= s;
    for (auto& v : b)
        for (auto& x : v) x *= s;
}

double MlpGrads::max_abs() const {
    double mx = 0.0;
    for (const auto& m : w)
        for (std::size_t i = 0; i < m.size(); ++i) mx = std::max(mx, std::abs(m.data()[i]));
    for (const auto& v : b)
        for (double x : v) mx = std::max(mx, std::abs(x));
    return mx;
}

Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpCache* cache) {
    if (x.cols() != net.input_dim())
        throw std::invalid_argument("mlp_forward: input width " + std::to_string(x.cols()) +
                                    " != expected " + std::to_string(net.input_dim()));
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
    }
    Matrix cur = x;
    const std::size_t last = net.layers.size() - 1;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& layer = net.layers[k];
        Matrix z(cur.rows(), layer.w.rows());
        kernels::matmul_nt(cur, layer.w, z);
        for (std::size_t i = 0; i < z.rows(); ++i) {
            auto row = z.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.b[j];
        }
        if (cache) {
            cache->inputs.push_back(std::move(cur));
            cache->pre.push_back(z);
        }
        if (k != last) {
            for (std::size_t i = 0; i < z.size(); ++i)
                z.data()[i] = act_forward(z.data()[i], net.activation);
        }
        cur = std::move(z);
    }
    return cur;
}

Matrix mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& dout, MlpGrads* grads,
                    std::vector<Matrix>* pre_grads) {
    const std::size_t nl = net.layers.size();
    if (cache.pre.size() != nl) throw std::invalid_argument("mlp_backward: cache/net layer mismatch");
    if (pre_grads) pre_grads->assign(nl, Matrix());

    Matrix dz = dout;  // gradient w.r.t. layer pre-activation, starting at the top
    for (std::size_t k = nl; k-- > 0;) {
        if (k != nl - 1) {
            // dz currently holds d(h_k); apply the activation mask.
            const Matrix& z = cache.pre[k];
            for (std::size_t i = 0; i < dz.size(); ++i)
                dz.data()[i] *= act_slope(z.data()[i], net.activation);
        }
        if (pre_grads) (*pre_grads)[k] = dz;
        if (grads) {
            Matrix dw(net.layers[k].w.rows(), net.layers[k].w.cols());
            kernels::matmul_tn(dz, cache.inputs[k], dw);
            for (std::size_t i = 0; i < dw.size(); ++i) grads->w[k].data()[i] += dw.data()[i];
            auto& db = grads->b[k];
            for (std::size_t i = 0; i < dz.rows(); ++i) {
                auto row = dz.row(i);
                for (std::size_t j = 0; j < row.size(); ++j) db[j] += row[j];
            }
        }
        Matrix dx(dz.rows(), net.layers[k].w.cols());
        kernels::matmul_nn(dz, net.layers[k].w, dx);
        dz = std::move(dx);
    }
    return dz;  // d(loss)/d(input)
}

void mlp_penalty_backward(const Mlp& net, const MlpCache& cache,
                          const std::vector<Matrix>& pre_grads, const Matrix& ghat,
                          MlpGrads* grads) {
    // Input gradient of a scalar-output MLP with piecewise-linear activations:
    //   g = W_1^T D_1 W_2^T D_2 ... W_L^T
    // with D_k the activation masks; pre_grads[k] holds T_k = dZ_k from the
    // first backward. Holding the masks fixed, dP/dW_k = T_k^T Q_{k-1} where
    // Q_0 = ghat and Q_k = (Q_{k-1} W_k^T) .* mask_k. Bias gradients vanish.
    const std::size_t nl = net.layers.size();
    Matrix q = ghat;
    for (std::size_t k = 0; k < nl; ++k) {
        Matrix dw(net.layers[k].w.rows(), net.layers[k].w.cols());
        kernels::matmul_tn(pre_grads[k], q, dw);
        for (std::size_t i = 0; i < dw.size(); ++i) grads->w[k].data()[i] += dw.data()[i];
        if (k + 1 < nl) {
            Matrix next(q.rows(), net.layers[k].w.rows());
            kernels::matmul_nt(q, net.layers[k].w, next);
            const Matrix& z = cache.pre[k];
            for (std::size_t i = 0; i < next.size(); ++i)
                next.data()[i] *= act_slope(z.data()[i], net.activation);
            q = std::move(next);
        }
    }
}

}  // namespace tabsynth
