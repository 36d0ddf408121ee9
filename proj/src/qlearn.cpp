#include "tabsynth/qlearn.hpp"

#include <algorithm>
#include <stdexcept>

namespace tabsynth {

QState make_q_state(double f_r, double f_u) {
    return {std::clamp(f_r, -1.0, 1.0), std::clamp(f_u, -1.0, 1.0)};
}

QFunction make_qfunction(RngStream& rng, const std::vector<std::size_t>& hidden, AdamConfig adam) {
    adam.validate();
    QFunction q;
    q.net = make_mlp(2, hidden, kActionCount, HiddenActivation::relu, rng);
    q.adam = adam;
    q.state = AdamState::zeros_like(q.net);
    return q;
}

std::array<double, kActionCount> q_values(const QFunction& q, const QState& s) {
    Matrix x(1, 2);
    x(0, 0) = s.risk;
    x(0, 1) = s.utility;
    Matrix y = mlp_forward(q.net, x);
    return {y(0, 0), y(0, 1), y(0, 2)};
}

int greedy_action(const QFunction& q, const QState& s) {
    const auto v = q_values(q, s);
    int best = 0;
    for (int a = 1; a < kActionCount; ++a)
        if (v[a] > v[best]) best = a;
    return best;
}

int select_action(const QFunction& q, const QState& s, double epsilon, RngStream& rng) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("select_action: epsilon must lie in [0, 1]");
    if (rng.uniform() < epsilon) return static_cast<int>(rng.index(kActionCount));
    return greedy_action(q, s);
}

int reward(double parent_utility, double child_utility) {
    return child_utility > parent_utility ? 1 : 0;
}

void ReplayBuffer::push(const Transition& t) {
    items_.push_back(t);
    if (items_.size() > capacity_) items_.pop_front();
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, RngStream& rng) const {
    if (n > items_.size()) throw std::invalid_argument("ReplayBuffer::sample: not enough items");
    // Partial Fisher-Yates over indices.
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<Transition> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng.index(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out.push_back(items_[idx[i]]);
    }
    return out;
}

TrainQResult train_q(QFunction& q, const ReplayBuffer& buffer, std::size_t batch_size, double gamma,
                     RngStream& rng) {
    if (buffer.size() < batch_size || batch_size == 0) return {false, 0.0};
    const auto batch = buffer.sample(batch_size, rng);
    const std::size_t n = batch.size();

    // Targets use the current net; treated as constants (semi-gradient).
    Matrix xc(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        xc(i, 0) = batch[i].s_child.risk;
        xc(i, 1) = batch[i].s_child.utility;
    }
    Matrix qc = mlp_forward(q.net, xc);

    Matrix x(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = batch[i].s.risk;
        x(i, 1) = batch[i].s.utility;
    }
    MlpCache cache;
    Matrix pred = mlp_forward(q.net, x, &cache);

    Matrix dout(n, kActionCount, 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = batch[i].r + gamma * qc(i, batch[i].action_next);
        const double err = pred(i, batch[i].action) - target;
        loss += err * err;
        dout(i, batch[i].action) = 2.0 * err / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);

    MlpGrads grads = MlpGrads::zeros_like(q.net);
    mlp_backward(q.net, cache, dout, &grads);
    adam_step(q.net, grads, q.adam, q.state);
    return {true, loss};
}

}  // namespace tabsynth
