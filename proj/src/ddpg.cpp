#include "raftmig/ddpg.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "raftmig/error.hpp"

namespace raftmig {

namespace {

constexpr int kHiddenWidths[3] = {8, 16, 8};
// Probability that a perturbation candidate rounds one coordinate to its
// second-nearest integer instead of the nearest.
constexpr double kSecondNearestFlipProb = 0.15;

void join_state_action(const std::vector<double>& state_vec, const std::vector<double>& action,
                       std::vector<double>& out) {
    out.resize(state_vec.size() + action.size());
    std::copy(state_vec.begin(), state_vec.end(), out.begin());
    std::copy(action.begin(), action.end(),
              out.begin() + static_cast<std::ptrdiff_t>(state_vec.size()));
}

// Shared per-sample work of the critic kernel: target value, TD error, and the
// critic gradient contribution already scaled by 1/batch.
void critic_sample(const NetParams& critic, const NetParams& target_actor,
                   const NetParams& target_critic, const Experience& exp, double discount,
                   double inv_batch, SampleSlot& slot) {
    const std::vector<double>& next_action =
        forward(target_actor, exp.next_state_vec, slot.trace_a);
    join_state_action(exp.next_state_vec, next_action, slot.joined);
    // The deployed policy is discrete: what the target policy would actually
    // execute at the next state is the nearest destination grid point, so the
    // bootstrap reads critic values only on the action lattice the replay
    // buffer populates, never at fractional actions no execution can produce.
    const long long k_max = static_cast<long long>(target_actor.act_scales.back());
    for (std::size_t i = exp.next_state_vec.size(); i < slot.joined.size(); ++i) {
        const long long j = std::clamp<long long>(std::llround(slot.joined[i]), 1, k_max);
        slot.joined[i] = static_cast<double>(j) - 0.5;
    }
    // Rewards are negative latencies, so every true value is negative; a
    // bootstrap estimate above zero can only be extrapolation error. Clip it
    // to the feasible range so optimistic phantoms cannot reinforce
    // themselves through the targets.
    const double next_q = std::min(forward(target_critic, slot.joined, slot.trace_a)[0], 0.0);
    const double y = exp.reward + discount * next_q;

    join_state_action(exp.state_vec, exp.action_flat, slot.joined);
    const double q = forward(critic, slot.joined, slot.trace_b)[0];
    const double err = q - y;
    slot.loss = err * err;
    slot.og.assign(1, 2.0 * err * inv_batch);
    backward(critic, slot.trace_b, slot.og, slot.grads);
}

// Shared per-sample work of the actor kernel: dQ/dA through the critic, then
// the actor gradient contribution, scaled by 1/batch.
void actor_sample(const NetParams& actor, const NetParams& critic, const Experience& exp,
                  double inv_batch, SampleSlot& slot) {
    const std::vector<double>& action = forward(actor, exp.state_vec, slot.trace_a);
    join_state_action(exp.state_vec, action, slot.joined);
    // Read the critic at the destination grid point the policy would actually
    // execute, not at the fractional output. Replay data only ever lands on
    // the grid, so between grid points the critic is free to invent value
    // that no experience can refute; climbing it detaches the policy from
    // the rewards. The rounding is a straight-through estimator: the slope
    // is taken at the executed action and applied to the continuous output.
    const long long k_max = static_cast<long long>(actor.act_scales.back());
    for (std::size_t i = exp.state_vec.size(); i < slot.joined.size(); ++i) {
        const long long j = std::clamp<long long>(std::llround(slot.joined[i]), 1, k_max);
        slot.joined[i] = static_cast<double>(j) - 0.5;
    }
    slot.value = forward(critic, slot.joined, slot.trace_b)[0];
    slot.og.assign(1, inv_batch);
    backward_input_only(critic, slot.trace_b, slot.og, slot.input_grad);
    const std::size_t state_width = exp.state_vec.size();
    slot.og.assign(slot.input_grad.begin() + static_cast<std::ptrdiff_t>(state_width),
                   slot.input_grad.end());
    backward(actor, slot.trace_a, slot.og, slot.grads);
}

void reduce_slots(const NetParams& net, const std::vector<SampleSlot>& slots, int batch,
                  GradientSet& grad_out) {
    resize_gradients(net, grad_out);
    zero_gradients(grad_out);
    for (int i = 0; i < batch; ++i) accumulate_gradients(grad_out, slots[static_cast<std::size_t>(i)].grads, 1.0);
}

void check_batch(const AgentState& agent, const std::vector<const Experience*>& batch) {
    if (batch.empty()) fail("validation-error", "update requires a nonempty batch");
    const auto state_w = static_cast<std::size_t>(agent.state_width);
    const auto action_w = static_cast<std::size_t>(agent.clusters * agent.action_budget);
    for (const Experience* exp : batch)
        if (exp->state_vec.size() != state_w || exp->next_state_vec.size() != state_w ||
            exp->action_flat.size() != action_w)
            fail("dimension-mismatch", "experience shapes do not match the agent");
}

void optimizer_step(NetParams& net, const GradientSet& grads, AdamState& adam,
                    const Hyperparams& hyper, double lr, StepDirection direction) {
    if (hyper.optimizer == OptimizerKind::Adam)
        adam_step(net, grads, adam, lr, hyper.adam_beta1, hyper.adam_beta2, hyper.adam_eps,
                  direction);
    else
        sgd_step(net, grads, lr, direction);
}

} // namespace

void validate_hyperparams(const Hyperparams& hyper) {
    if (!(hyper.discount >= 0.0 && hyper.discount < 1.0))
        fail("validation-error", "discount must lie in [0, 1)");
    if (!(hyper.ema_kappa >= 0.0 && hyper.ema_kappa <= 1.0))
        fail("validation-error", "ema_kappa must lie in [0, 1]");
    if (hyper.buffer_capacity < 1) fail("validation-error", "buffer_capacity must be >= 1");
    if (hyper.batch_size < 1) fail("validation-error", "batch_size must be >= 1");
    if (hyper.batch_size > hyper.buffer_capacity)
        fail("validation-error", "batch_size must not exceed buffer_capacity");
    if (hyper.warmup_chi < hyper.batch_size)
        fail("validation-error", "warmup_chi must be >= batch_size");
    if (!(hyper.noise_std >= 0.0)) fail("validation-error", "noise_std must be nonnegative");
    if (!(hyper.noise_decay > 0.0 && hyper.noise_decay <= 1.0))
        fail("validation-error", "noise_decay must lie in (0, 1]");
    if (!(hyper.noise_floor >= 0.0)) fail("validation-error", "noise_floor must be nonnegative");
    if (!(hyper.refine_delta >= 0.0)) fail("validation-error", "refine_delta must be nonnegative");
    if (hyper.refine_budget < 1) fail("validation-error", "refine_budget must be >= 1");
    if (hyper.total_epochs < 0) fail("validation-error", "total_epochs must be nonnegative");
    if (!(hyper.eps_clip > 0.0)) fail("validation-error", "eps_clip must be positive");
    if (!(hyper.lr_actor >= 0.0) || !(hyper.lr_critic >= 0.0))
        fail("validation-error", "learning rates must be nonnegative");
    if (!(hyper.init_scale >= 0.0)) fail("validation-error", "init_scale must be nonnegative");
    if (hyper.threads < 0) fail("validation-error", "threads must be nonnegative");
}

void apply_thread_count(const Hyperparams& hyper) {
    if (hyper.threads > 1) omp_set_num_threads(hyper.threads);
}

double effective_refine_delta(const Hyperparams& hyper, int clusters, int budget) {
    if (hyper.refine_delta > 0.0) return hyper.refine_delta;
    return 0.5 * std::sqrt(static_cast<double>(clusters) * static_cast<double>(budget));
}

ReplayBuffer::ReplayBuffer(std::int64_t capacity) : capacity_(capacity) {
    if (capacity_ > 0) storage_.reserve(static_cast<std::size_t>(capacity_));
}

void ReplayBuffer::push(Experience exp) {
    if (capacity_ < 1) fail("validation-error", "replay buffer has no capacity");
    if (size() < capacity_) {
        storage_.push_back(std::move(exp));
    } else {
        storage_[static_cast<std::size_t>(head_)] = std::move(exp);
        head_ = (head_ + 1) % capacity_;
    }
}

const Experience& ReplayBuffer::chronological(std::int64_t i) const {
    if (i < 0 || i >= size()) fail("validation-error", "replay buffer index out of range");
    return storage_[static_cast<std::size_t>((head_ + i) % size())];
}

void buffer_push(ReplayBuffer& buffer, Experience exp) { buffer.push(std::move(exp)); }

std::vector<std::int64_t> sample_indices(const ReplayBuffer& buffer, int batch_size, Rng& rng) {
    if (buffer.size() < batch_size) fail("underfull-buffer", "not enough experiences to sample");
    std::vector<std::int64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(batch_size));
    while (static_cast<int>(chosen.size()) < batch_size) {
        const std::int64_t candidate = rng.uniform_int(0, buffer.size() - 1);
        bool seen = false;
        for (std::int64_t c : chosen)
            if (c == candidate) {
                seen = true;
                break;
            }
        if (!seen) chosen.push_back(candidate);
    }
    return chosen;
}

std::vector<Experience> buffer_sample(const ReplayBuffer& buffer, int batch_size, Rng& rng) {
    std::vector<Experience> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (std::int64_t i : sample_indices(buffer, batch_size, rng))
        batch.push_back(buffer.chronological(i));
    return batch;
}

AgentState make_agent(const EnvConfig& env_config, const Hyperparams& hyper, Rng& rng) {
    validate_env_config(env_config);
    validate_hyperparams(hyper);
    AgentState agent;
    agent.clusters = env_config.topology.cluster_count;
    agent.action_budget = env_config.action_budget;
    agent.state_width = encoded_state_width(env_config);
    const int action_width = agent.clusters * agent.action_budget;
    const double k_scale = static_cast<double>(agent.clusters);

    std::vector<LayerSpec> actor_specs{{agent.state_width, Activation::None, 1.0}};
    for (int w : kHiddenWidths) actor_specs.push_back({w, Activation::Rectifier, 1.0});
    actor_specs.push_back({action_width, Activation::ScaledSigmoid, k_scale});

    std::vector<LayerSpec> critic_specs{{agent.state_width + action_width, Activation::None, 1.0}};
    for (int w : kHiddenWidths) critic_specs.push_back({w, Activation::Rectifier, 1.0});
    critic_specs.push_back({1, Activation::None, 1.0});

    agent.actor = init_params(actor_specs, rng, hyper.init_scale);
    agent.critic = init_params(critic_specs, rng, hyper.init_scale);
    // Shape the output layers instead of leaving them random. The critic head
    // starts at zero so it is exactly calibrated from the first update (the
    // initial bootstrap targets equal the observed rewards); a random head
    // makes the early bootstrap chase init-scale noise instead of rewards.
    // The actor head starts at the identity policy — every transaction stays
    // on its own cluster — by zeroing the weights and setting each output bias
    // so the scaled sigmoid lands inside that cluster's rounding cell. This
    // makes the warmup buffer sample near-baseline dynamics plus exploration
    // noise, so the critic first learns the marginal value of small
    // migrations rather than the dynamics of a flooded system.
    std::fill(agent.actor.weights.back().begin(), agent.actor.weights.back().end(), 0.0);
    std::fill(agent.critic.weights.back().begin(), agent.critic.weights.back().end(), 0.0);
    std::fill(agent.critic.biases.back().begin(), agent.critic.biases.back().end(), 0.0);
    for (int k = 0; k < agent.clusters; ++k) {
        const double target = (static_cast<double>(k) + 0.75) / k_scale; // (k+1)-0.25 over K
        const double bias = std::log(target / (1.0 - target));
        for (int n = 0; n < agent.action_budget; ++n)
            agent.actor.biases.back()[static_cast<std::size_t>(k * agent.action_budget + n)] =
                bias;
    }
    agent.target_actor = agent.actor;
    agent.target_critic = agent.critic;
    agent.adam_actor = make_adam_state(agent.actor);
    agent.adam_critic = make_adam_state(agent.critic);
    agent.buffer = ReplayBuffer(hyper.buffer_capacity);
    agent.noise_level = hyper.noise_std;
    agent.epoch = 0;
    return agent;
}

std::vector<double> action_to_repr(const ActionMatrix& action) {
    std::vector<double> repr(action.entries.size());
    for (std::size_t i = 0; i < repr.size(); ++i)
        repr[i] = static_cast<double>(action.entries[i]) - 0.5;
    return repr;
}

std::vector<double> select_action(AgentState& agent, const Hyperparams& hyper,
                                  const std::vector<double>& state_vec, Rng& rng) {
    std::vector<double> action = forward(agent.actor, state_vec);
    const double k_max = static_cast<double>(agent.clusters);
    for (double& a : action) {
        a += rng.gaussian(0.0, agent.noise_level);
        a = std::clamp(a, hyper.eps_clip, k_max);
    }
    agent.noise_level = std::max(hyper.noise_floor, agent.noise_level * hyper.noise_decay);
    return action;
}

std::vector<double> actor_action(const NetParams& actor, const std::vector<double>& state_vec) {
    return forward(actor, state_vec);
}

double critic_value(const NetParams& critic, const std::vector<double>& state_vec,
                    const std::vector<int>& destinations) {
    std::vector<double> joined(state_vec.size() + destinations.size());
    std::copy(state_vec.begin(), state_vec.end(), joined.begin());
    for (std::size_t i = 0; i < destinations.size(); ++i)
        joined[state_vec.size() + i] = static_cast<double>(destinations[i]) - 0.5;
    return forward(critic, joined)[0];
}

void score_candidates_serial(const NetParams& critic, const std::vector<double>& state_vec,
                             const std::vector<std::vector<int>>& candidates,
                             std::vector<double>& values_out) {
    values_out.resize(candidates.size());
    ForwardTrace trace;
    std::vector<double> joined;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        joined.resize(state_vec.size() + candidates[c].size());
        std::copy(state_vec.begin(), state_vec.end(), joined.begin());
        for (std::size_t i = 0; i < candidates[c].size(); ++i)
            joined[state_vec.size() + i] = static_cast<double>(candidates[c][i]) - 0.5;
        values_out[c] = forward(critic, joined, trace)[0];
    }
}

void score_candidates_parallel(const NetParams& critic, const std::vector<double>& state_vec,
                               const std::vector<std::vector<int>>& candidates,
                               std::vector<double>& values_out) {
    values_out.resize(candidates.size());
    const auto count = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < count; ++c) {
        ForwardTrace trace;
        std::vector<double> joined(state_vec.size() + candidates[static_cast<std::size_t>(c)].size());
        std::copy(state_vec.begin(), state_vec.end(), joined.begin());
        const std::vector<int>& cand = candidates[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < cand.size(); ++i)
            joined[state_vec.size() + i] = static_cast<double>(cand[i]) - 0.5;
        values_out[static_cast<std::size_t>(c)] = forward(critic, joined, trace)[0];
    }
}

ActionMatrix refine_action(const std::vector<double>& cont_action,
                           const std::vector<double>& state_vec, const NetParams& critic,
                           int clusters, int budget, double delta, int candidate_budget, Rng& rng,
                           bool parallel) {
    const std::size_t dim = static_cast<std::size_t>(clusters) * static_cast<std::size_t>(budget);
    if (cont_action.size() != dim)
        fail("dimension-mismatch", "continuous action length does not match K*N");
    if (candidate_budget < 1) fail("validation-error", "candidate budget must be >= 1");

    // Nearest rounding and, per coordinate, the integer on the far side of the
    // continuous value (used by the perturbation candidates).
    std::vector<int> nearest(dim), second(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const int r = static_cast<int>(
            std::clamp<long long>(std::llround(cont_action[i]), 1, clusters));
        nearest[i] = r;
        int s;
        if (cont_action[i] > static_cast<double>(r))
            s = r + 1;
        else if (cont_action[i] < static_cast<double>(r))
            s = r - 1;
        else
            s = r + 1;
        if (s < 1 || s > clusters) s = (s < 1) ? r + 1 : r - 1;
        second[i] = std::clamp(s, 1, clusters);
    }

    std::vector<std::vector<int>> candidates{nearest};
    std::set<std::vector<int>> dedup{nearest};
    const double delta_sq = delta * delta;
    std::vector<int> cand(dim);
    for (int attempt = 1; attempt < candidate_budget; ++attempt) {
        // Draw the full flip mask unconditionally so the stream advances the
        // same way regardless of which candidates survive.
        for (std::size_t i = 0; i < dim; ++i)
            cand[i] = rng.uniform01() < kSecondNearestFlipProb ? second[i] : nearest[i];
        double dist_sq = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = static_cast<double>(cand[i]) - cont_action[i];
            dist_sq += d * d;
        }
        if (dist_sq <= delta_sq && dedup.insert(cand).second) candidates.push_back(cand);
    }

    std::vector<double> values;
    if (parallel)
        score_candidates_parallel(critic, state_vec, candidates, values);
    else
        score_candidates_serial(critic, state_vec, candidates, values);

    std::size_t best = 0;
    for (std::size_t c = 1; c < values.size(); ++c)
        if (values[c] > values[best]) best = c;

    ActionMatrix action;
    action.clusters = clusters;
    action.budget = budget;
    action.entries = candidates[best];
    return action;
}

void critic_batch_gradient_serial(const NetParams& critic, const NetParams& target_actor,
                                  const NetParams& target_critic,
                                  const std::vector<const Experience*>& batch, double discount,
                                  std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                  double& loss_out) {
    const int n = static_cast<int>(batch.size());
    if (static_cast<int>(slots.size()) < n) slots.resize(static_cast<std::size_t>(n));
    const double inv_batch = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
        critic_sample(critic, target_actor, target_critic, *batch[static_cast<std::size_t>(i)],
                      discount, inv_batch, slots[static_cast<std::size_t>(i)]);
    reduce_slots(critic, slots, n, grad_out);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) loss += slots[static_cast<std::size_t>(i)].loss;
    loss_out = loss * inv_batch;
}

void critic_batch_gradient_parallel(const NetParams& critic, const NetParams& target_actor,
                                    const NetParams& target_critic,
                                    const std::vector<const Experience*>& batch, double discount,
                                    std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                    double& loss_out) {
    const int n = static_cast<int>(batch.size());
    if (static_cast<int>(slots.size()) < n) slots.resize(static_cast<std::size_t>(n));
    const double inv_batch = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
        critic_sample(critic, target_actor, target_critic, *batch[static_cast<std::size_t>(i)],
                      discount, inv_batch, slots[static_cast<std::size_t>(i)]);
    // Reduction stays in sample order; results are bit-identical to the
    // serial reference for any thread count.
    reduce_slots(critic, slots, n, grad_out);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) loss += slots[static_cast<std::size_t>(i)].loss;
    loss_out = loss * inv_batch;
}

void actor_batch_gradient_serial(const NetParams& actor, const NetParams& critic,
                                 const std::vector<const Experience*>& batch,
                                 std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                 double& mean_q_out) {
    const int n = static_cast<int>(batch.size());
    if (static_cast<int>(slots.size()) < n) slots.resize(static_cast<std::size_t>(n));
    const double inv_batch = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
        actor_sample(actor, critic, *batch[static_cast<std::size_t>(i)], inv_batch,
                     slots[static_cast<std::size_t>(i)]);
    reduce_slots(actor, slots, n, grad_out);
    double q = 0.0;
    for (int i = 0; i < n; ++i) q += slots[static_cast<std::size_t>(i)].value;
    mean_q_out = q * inv_batch;
}

void actor_batch_gradient_parallel(const NetParams& actor, const NetParams& critic,
                                   const std::vector<const Experience*>& batch,
                                   std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                   double& mean_q_out) {
    const int n = static_cast<int>(batch.size());
    if (static_cast<int>(slots.size()) < n) slots.resize(static_cast<std::size_t>(n));
    const double inv_batch = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
        actor_sample(actor, critic, *batch[static_cast<std::size_t>(i)], inv_batch,
                     slots[static_cast<std::size_t>(i)]);
    reduce_slots(actor, slots, n, grad_out);
    double q = 0.0;
    for (int i = 0; i < n; ++i) q += slots[static_cast<std::size_t>(i)].value;
    mean_q_out = q * inv_batch;
}

double critic_update(AgentState& agent, const std::vector<const Experience*>& batch,
                     const Hyperparams& hyper) {
    check_batch(agent, batch);
    GradientSet grads;
    double loss = 0.0;
    if (hyper.threads != 1)
        critic_batch_gradient_parallel(agent.critic, agent.target_actor, agent.target_critic,
                                       batch, hyper.discount, agent.critic_slots, grads, loss);
    else
        critic_batch_gradient_serial(agent.critic, agent.target_actor, agent.target_critic, batch,
                                     hyper.discount, agent.critic_slots, grads, loss);
    optimizer_step(agent.critic, grads, agent.adam_critic, hyper, hyper.lr_critic,
                   StepDirection::Descent);
    // Decoupled L2 decay on the critic's weights (biases untouched): value
    // structure the replay data keeps re-supporting is replenished every
    // batch, while spurious slopes in never-sampled action regions decay
    // away instead of accumulating and misleading the actor.
    if (hyper.critic_weight_decay > 0.0) {
        const double keep = 1.0 - hyper.lr_critic * hyper.critic_weight_decay;
        for (std::vector<double>& layer : agent.critic.weights)
            for (double& w : layer) w *= keep;
    }
    return loss;
}

double actor_update(AgentState& agent, const std::vector<const Experience*>& batch,
                    const Hyperparams& hyper) {
    check_batch(agent, batch);
    GradientSet grads;
    double mean_q = 0.0;
    if (hyper.threads != 1)
        actor_batch_gradient_parallel(agent.actor, agent.critic, batch, agent.actor_slots, grads,
                                      mean_q);
    else
        actor_batch_gradient_serial(agent.actor, agent.critic, batch, agent.actor_slots, grads,
                                    mean_q);
    optimizer_step(agent.actor, grads, agent.adam_actor, hyper, hyper.lr_actor,
                   StepDirection::Ascent);
    return mean_q;
}

void soft_update(NetParams& target, const NetParams& online, double kappa) {
    if (target.widths != online.widths) fail("shape-mismatch", "target and online shapes differ");
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        if (target.weights[l].size() != online.weights[l].size())
            fail("shape-mismatch", "target and online shapes differ");
        for (std::size_t i = 0; i < target.weights[l].size(); ++i)
            target.weights[l][i] =
                kappa * target.weights[l][i] + (1.0 - kappa) * online.weights[l][i];
        for (std::size_t i = 0; i < target.biases[l].size(); ++i)
            target.biases[l][i] =
                kappa * target.biases[l][i] + (1.0 - kappa) * online.biases[l][i];
    }
}

TrainResult train(const EnvConfig& env_config, const Hyperparams& hyper, std::uint64_t seed) {
    validate_env_config(env_config);
    validate_hyperparams(hyper);
    apply_thread_count(hyper);

    Rng env_rng(derive_seed(seed, StreamTag::Environment));
    Rng init_rng(derive_seed(seed, StreamTag::NetInit));
    Rng explore_rng(derive_seed(seed, StreamTag::Exploration));
    Rng buffer_rng(derive_seed(seed, StreamTag::BufferSampling));
    Rng refine_rng(derive_seed(seed, StreamTag::Refinement));

    TrainResult result;
    result.agent = make_agent(env_config, hyper, init_rng);
    AgentState& agent = result.agent;
    const bool parallel = hyper.threads != 1;
    const double delta = effective_refine_delta(hyper, agent.clusters, agent.action_budget);

    State state = reset(env_config, env_rng);
    std::vector<double> state_vec = encode_state(state, env_config);
    result.metrics.reserve(static_cast<std::size_t>(hyper.total_epochs));
    std::vector<const Experience*> batch;
    batch.reserve(static_cast<std::size_t>(hyper.batch_size));

    for (std::int64_t tau = 0; tau < hyper.total_epochs; ++tau) {
        const double noise_used = agent.noise_level;
        const std::vector<double> cont =
            select_action(agent, hyper, state_vec, explore_rng);
        const ActionMatrix action =
            refine_action(cont, state_vec, agent.critic, agent.clusters, agent.action_budget,
                          delta, hyper.refine_budget, refine_rng, parallel);
        StepOutcome outcome = step(state, action, env_config, env_rng);
        std::vector<double> next_vec = encode_state(outcome.next_state, env_config);

        buffer_push(agent.buffer, Experience{state_vec, action_to_repr(outcome.canonical_action),
                                             outcome.reward, next_vec});

        double critic_loss = 0.0;
        double actor_loss = 0.0;
        if (tau + 1 > hyper.warmup_chi) {
            batch.clear();
            for (std::int64_t i : sample_indices(agent.buffer, hyper.batch_size, buffer_rng))
                batch.push_back(&agent.buffer.chronological(i));
            critic_loss = critic_update(agent, batch, hyper);
            actor_loss = actor_update(agent, batch, hyper);
            soft_update(agent.target_critic, agent.critic, hyper.ema_kappa);
            soft_update(agent.target_actor, agent.actor, hyper.ema_kappa);
        }

        result.metrics.push_back({tau, actor_loss, critic_loss, outcome.reward, noise_used});
        state = std::move(outcome.next_state);
        state_vec = std::move(next_vec);
        agent.epoch = tau + 1;
    }
    return result;
}

void save_checkpoint(const std::string& path, const AgentState& agent) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open checkpoint file '" + path + "' for writing");
    out << "raftmig-checkpoint v1\nnets 4\n";
    write_net(out, "actor", agent.actor);
    write_net(out, "critic", agent.critic);
    write_net(out, "target_actor", agent.target_actor);
    write_net(out, "target_critic", agent.target_critic);
    out.flush();
    if (!out) fail("io-error", "failed writing checkpoint file '" + path + "'");
}

AgentNets load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("missing-checkpoint", "cannot open checkpoint file '" + path + "'");
    std::string magic, version, nets_token;
    int net_count = 0;
    if (!(in >> magic >> version >> nets_token >> net_count) || magic != "raftmig-checkpoint" ||
        version != "v1" || nets_token != "nets" || net_count != 4)
        fail("parse-error", "unrecognized checkpoint header in '" + path + "'");
    AgentNets nets;
    nets.actor = read_net(in, "actor");
    nets.critic = read_net(in, "critic");
    nets.target_actor = read_net(in, "target_actor");
    nets.target_critic = read_net(in, "target_critic");
    if (nets.target_actor.widths != nets.actor.widths ||
        nets.target_critic.widths != nets.critic.widths)
        fail("parse-error", "checkpoint networks have inconsistent shapes");
    return nets;
}

} // namespace raftmig
