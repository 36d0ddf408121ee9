#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "tabsynth/adam.hpp"
#include "tabsynth/nets.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

inline constexpr int kActionCount = 3;  // one per generator loss

// (risk, utility) pair fed to the Q-function, clamped into [-1, 1].
struct QState {
    double risk = 0.0;
    double utility = 0.0;
};

QState make_q_state(double f_r, double f_u);

struct QFunction {
    Mlp net;  // 2 -> hidden -> kActionCount
    AdamConfig adam;
    AdamState state;
};

QFunction make_qfunction(RngStream& rng, const std::vector<std::size_t>& hidden = {64, 64},
                         AdamConfig adam = {.learning_rate = 1e-2,
                                            .beta1 = 0.9,
                                            .beta2 = 0.999,
                                            .weight_decay = 0.0});

std::array<double, kActionCount> q_values(const QFunction& q, const QState& s);

// Epsilon-greedy with lowest-index tie break on the greedy branch.
int select_action(const QFunction& q, const QState& s, double epsilon, RngStream& rng);
int greedy_action(const QFunction& q, const QState& s);

// 1 when the child strictly improves utility, else 0.
int reward(double parent_utility, double child_utility);

struct Transition {
    QState s;
    int action = 0;
    double r = 0.0;
    QState s_child;
    int action_next = 0;
};

// Bounded FIFO with uniform sampling without replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(const Transition& t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& back() const { return items_.back(); }
    const Transition& at(std::size_t i) const { return items_[i]; }

    std::vector<Transition> sample(std::size_t n, RngStream& rng) const;

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

struct TrainQResult {
    bool performed = false;  // false when the buffer is too small (no-op)
    double loss = 0.0;
};

// One SARSA-style regression step: target = r + gamma * Q(s_child, a_next),
// squared error on Q(s, a) over a sampled minibatch.
TrainQResult train_q(QFunction& q, const ReplayBuffer& buffer, std::size_t batch_size, double gamma,
                     RngStream& rng);

}  // namespace tabsynth
