#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raftmig/env.hpp"
#include "raftmig/nn.hpp"
#include "raftmig/rng.hpp"

namespace raftmig {

enum class OptimizerKind { Sgd, Adam };

struct Hyperparams {
    double lr_actor = 1e-5;
    double lr_critic = 1e-5;
    double discount = 0.95;      // lambda
    double ema_kappa = 0.995;    // target <- kappa*target + (1-kappa)*online
    std::int64_t buffer_capacity = 100000;
    int batch_size = 64;
    std::int64_t warmup_chi = 10000; // updates start once epoch count exceeds this
    double noise_std = 0.5;          // exploration sigma in action units
    double noise_decay = 0.9999;     // multiplicative per epoch
    double noise_floor = 0.05;
    double refine_delta = 0.0;       // 0 means the default 0.5*sqrt(K*N)
    int refine_budget = 64;
    std::int64_t total_epochs = 200000; // tau_max
    double eps_clip = 1e-3;             // lower clip of the continuous action
    double init_scale = 1.0;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double critic_weight_decay = 0.0; // decoupled L2 on critic weights per update
    // Initial critic output everywhere (the head starts as this constant).
    // Set below the reachable value range to make unexplored actions look
    // worse than proven ones; 0 keeps a neutral start.
    double critic_init_bias = 0.0;
    int threads = 1; // >1 enables the OpenMP kernel variants
};

void validate_hyperparams(const Hyperparams& hyper);

// Sizes the OpenMP pool to hyper.threads when > 1; 0 keeps the runtime
// default, 1 selects the serial kernels (pool size untouched).
void apply_thread_count(const Hyperparams& hyper);

double effective_refine_delta(const Hyperparams& hyper, int clusters, int budget);

struct Experience {
    std::vector<double> state_vec;
    std::vector<double> action_flat; // refined destinations stored as j - 0.5
    double reward = 0.0;
    std::vector<double> next_state_vec;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::int64_t capacity = 0);

    void push(Experience exp);
    std::int64_t size() const { return static_cast<std::int64_t>(storage_.size()); }
    std::int64_t capacity() const { return capacity_; }
    // i = 0 is the oldest surviving experience.
    const Experience& chronological(std::int64_t i) const;

private:
    std::int64_t capacity_ = 0;
    std::int64_t head_ = 0; // next eviction slot once full
    std::vector<Experience> storage_;
};

void buffer_push(ReplayBuffer& buffer, Experience exp);
// Uniform without replacement within one batch; indices are chronological.
std::vector<std::int64_t> sample_indices(const ReplayBuffer& buffer, int batch_size, Rng& rng);
std::vector<Experience> buffer_sample(const ReplayBuffer& buffer, int batch_size, Rng& rng);

// Per-sample scratch for the batch kernels; one slot per batch index so the
// OpenMP variant writes without sharing.
struct SampleSlot {
    ForwardTrace trace_a, trace_b;
    GradientSet grads;
    std::vector<double> joined; // concatenated (state, action) input
    std::vector<double> input_grad;
    std::vector<double> og; // small output-gradient / slice buffer
    double value = 0.0;
    double loss = 0.0;
};

struct AgentState {
    NetParams actor, critic, target_actor, target_critic;
    ReplayBuffer buffer;
    std::int64_t epoch = 0;
    double noise_level = 0.0;
    int clusters = 0;
    int action_budget = 0;
    int state_width = 0;
    AdamState adam_actor, adam_critic;
    // Reusable kernel scratch (not part of the learned state).
    std::vector<SampleSlot> critic_slots, actor_slots;
};

AgentState make_agent(const EnvConfig& env_config, const Hyperparams& hyper, Rng& rng);

// Network input encoding of a discrete action: destination j becomes j - 0.5
// (the center of the rounding cell that maps back to j).
std::vector<double> action_to_repr(const ActionMatrix& action);

// Actor output with exploration noise, clipped to [eps_clip, K]; decays the
// agent's noise level multiplicatively afterwards.
std::vector<double> select_action(AgentState& agent, const Hyperparams& hyper,
                                  const std::vector<double>& state_vec, Rng& rng);

// Deterministic actor output (evaluation path).
std::vector<double> actor_action(const NetParams& actor, const std::vector<double>& state_vec);

// Critic value of one (state, discrete action) pair.
double critic_value(const NetParams& critic, const std::vector<double>& state_vec,
                    const std::vector<int>& destinations);

// Nearest-integer rounding of the continuous action plus up to budget-1
// randomized second-nearest perturbations within Euclidean distance delta;
// returns the candidate with the highest critic value (first generated wins
// ties). The nearest rounding is always a candidate, so the result never
// scores below it.
ActionMatrix refine_action(const std::vector<double>& cont_action,
                           const std::vector<double>& state_vec, const NetParams& critic,
                           int clusters, int budget, double delta, int candidate_budget, Rng& rng,
                           bool parallel = false);

// Batch kernels. The serial variants are the reference implementations; the
// parallel variants distribute per-sample work over OpenMP threads and reduce
// in fixed sample order, so both produce bit-identical results.
void critic_batch_gradient_serial(const NetParams& critic, const NetParams& target_actor,
                                  const NetParams& target_critic,
                                  const std::vector<const Experience*>& batch, double discount,
                                  std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                  double& loss_out);
void critic_batch_gradient_parallel(const NetParams& critic, const NetParams& target_actor,
                                    const NetParams& target_critic,
                                    const std::vector<const Experience*>& batch, double discount,
                                    std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                    double& loss_out);
void actor_batch_gradient_serial(const NetParams& actor, const NetParams& critic,
                                 const std::vector<const Experience*>& batch,
                                 std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                 double& mean_q_out);
void actor_batch_gradient_parallel(const NetParams& actor, const NetParams& critic,
                                   const std::vector<const Experience*>& batch,
                                   std::vector<SampleSlot>& slots, GradientSet& grad_out,
                                   double& mean_q_out);
void score_candidates_serial(const NetParams& critic, const std::vector<double>& state_vec,
                             const std::vector<std::vector<int>>& candidates,
                             std::vector<double>& values_out);
void score_candidates_parallel(const NetParams& critic, const std::vector<double>& state_vec,
                               const std::vector<std::vector<int>>& candidates,
                               std::vector<double>& values_out);

// One descent step on the critic against target values y = R + lambda * Q';
// returns the pre-step batch loss.
double critic_update(AgentState& agent, const std::vector<const Experience*>& batch,
                     const Hyperparams& hyper);
// One ascent step on the actor along dQ/dA * dpi/dphi; returns the pre-step
// mean critic value.
double actor_update(AgentState& agent, const std::vector<const Experience*>& batch,
                    const Hyperparams& hyper);

void soft_update(NetParams& target, const NetParams& online, double kappa);

struct MetricRow {
    std::int64_t epoch = 0;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
    double reward = 0.0;
    double noise_std = 0.0;
};

struct TrainResult {
    AgentState agent;
    std::vector<MetricRow> metrics;
};

// The full training loop: explore, refine, step the environment, store, and
// after the warmup run one critic step, one actor step, and one soft update
// per epoch. Deterministic per (config, hyper, seed).
TrainResult train(const EnvConfig& env_config, const Hyperparams& hyper, std::uint64_t seed);

// Checkpoint container: the four networks in one versioned text file.
struct AgentNets {
    NetParams actor, critic, target_actor, target_critic;
};

void save_checkpoint(const std::string& path, const AgentState& agent);
AgentNets load_checkpoint(const std::string& path);

} // namespace raftmig
