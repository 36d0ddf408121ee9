#include "tabsynth/variation.hpp"

#include <stdexcept>

namespace tabsynth {

Individual smart_variation(const SmartVariationContext& ctx, const Individual& parent, QFunction& q,
                           ReplayBuffer& buffer, double epsilon, RngStream& rl_rng,
                           RngStream& gumbel_rng, int* chosen_action,
                           GeneratorStepResult* step_out) {
    if (!ctx.disc || !ctx.z || !ctx.c1 || !ctx.gen_adam || !ctx.evaluate)
        throw std::invalid_argument("smart_variation: incomplete context");

    const QState state = make_q_state(parent.f_r, parent.f_u);
    const int action = select_action(q, state, epsilon, rl_rng);
    if (chosen_action) *chosen_action = action;

    Individual child;
    child.gen = clone_generator(parent.gen);
    child.adam = parent.adam;  // deep copy; moments continue independently
    const GeneratorStepResult step =
        generator_train_step(child.gen, child.adam, *ctx.disc, *ctx.z, *ctx.c1, ctx.chosen,
                             gen_loss_from_index(action), *ctx.gen_adam, gumbel_rng);
    if (step_out) *step_out = step;

    const auto [f_u, f_r] = ctx.evaluate(child.gen);
    child.f_u = f_u;
    child.f_r = f_r;

    Transition t;
    t.s = state;
    t.action = action;
    t.r = static_cast<double>(reward(parent.f_u, child.f_u));
    t.s_child = make_q_state(child.f_r, child.f_u);
    t.action_next = greedy_action(q, t.s_child);
    buffer.push(t);
    return child;
}

}  // namespace tabsynth
