#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "raftmig/core_model.hpp"
#include "raftmig/rng.hpp"

namespace raftmig {

// How the anomaly cluster's arrival rate evolves over epochs. Fixed pins it to
// one value (evaluation sweeps); Schedule follows an explicit piecewise trace;
// Shuffle redraws uniformly from a value set every segment_epochs epochs
// (training coverage of all load levels).
enum class AnomalyMode { Schedule, Fixed, Shuffle };

struct ScheduleSegment {
    std::int64_t begin_epoch = 0; // inclusive
    std::int64_t end_epoch = 0;   // exclusive
    int rate = 0;
};

struct ArrivalProfile {
    std::vector<int> base_rates;       // M_k for every cluster
    int anomaly_cluster = 1;           // zero-based index into base_rates
    AnomalyMode mode = AnomalyMode::Schedule;
    std::vector<ScheduleSegment> schedule; // Schedule mode; gaps fall back to base
    int fixed_rate = 0;                    // Fixed mode
    std::vector<int> shuffle_values;       // Shuffle mode
    std::int64_t shuffle_segment_epochs = 200;
};

struct EnvConfig {
    ClusterTopology topology;
    ChannelParams channel;
    int action_budget = 10;      // N: transactions acted per cluster per epoch
    int epochs_per_block = 4;    // F
    ArrivalProfile arrivals;
    double decision_interval_s = 1.0; // bookkeeping only; affects no latency
    double queue_norm = 0.0;          // state encoding divisor; 0 means 4*N
    double snr_db_offset = 20.0;      // encoded SNR = clamp((dB + offset)/scale)
    double snr_db_scale = 60.0;
    // When set, the consensus payload grows with the block: the append message
    // carries append_msg_bits of header plus P_k * tx_size_bits of content.
    bool append_includes_block = false;
};

struct State {
    std::vector<int> decision_queues;  // D_k
    std::vector<int> packing_queues;   // P_k
    std::vector<double> snrs;          // linear, length sum(V_k), follower-major
    int phase = 0;                     // iota in [0, F)
    // Transactions migrated in during the previous epoch; they join the
    // destination packing queue on the next transition.
    std::vector<int> pending_inbound;
    // Transactions that already landed in packing queues since the last packing
    // epoch; charged as migration latency when the block is produced.
    std::vector<int> interval_inbound;
    std::int64_t epoch = 0;
    int anomaly_rate = 0; // arrival rate of the anomaly cluster this epoch
};

// K x N destination matrix, row-major; entry value j in [1, K] sends leader
// k's n-th acted transaction of this epoch to cluster j (1-based, j = k+1
// keeps it local). valid_counts is filled by the environment when the action
// is executed; entries beyond it are forced to identity.
struct ActionMatrix {
    int clusters = 0;
    int budget = 0;
    std::vector<int> entries;
    std::vector<int> valid_counts;

    int at(int k, int n) const { return entries[static_cast<std::size_t>(k) * budget + n]; }
    int& at(int k, int n) { return entries[static_cast<std::size_t>(k) * budget + n]; }
};

ActionMatrix identity_action(int clusters, int budget);

struct StepOutcome {
    State next_state;
    double reward = 0.0;
    std::optional<LatencyBreakdown> latency; // present only at packing epochs
    std::vector<int> committed_counts;       // block sizes at packing, else zeros
    // Bookkeeping for metrics and replay storage (not part of the MDP).
    std::vector<int> acted_counts;    // c_k this epoch
    std::vector<int> migrated_counts; // entries among the first c_k with a_{k,n} != k
    ActionMatrix canonical_action;    // executed action with identity padding applied
};

void validate_env_config(const EnvConfig& config);

// Arrival counts for the epoch described by `state` (deterministic given the
// state's anomaly rate).
std::vector<int> arrival_rates(const State& state, const EnvConfig& config);

State reset(const EnvConfig& config, Rng& rng);
State reset(const EnvConfig& config, std::uint64_t seed);

// One decision epoch: arrivals join the decision queues, the first
// c_k = min(N, D_k + M_k) transactions are routed per the action, kept ones
// join the local packing queue, migrated ones land at the destination next
// epoch, and every F-th epoch the packing queues are emptied into blocks.
State transition(const State& state, const ActionMatrix& action, const EnvConfig& config, Rng& rng);

// Latency of the block interval that ends at `state_at_packing` (a state whose
// packing queues hold the full block content). Zero reward and no breakdown
// when the state's phase is not the packing phase.
std::pair<double, std::optional<LatencyBreakdown>> reward(const State& state_at_packing,
                                                          const EnvConfig& config);

// Normalized observation vector, layout (D, P, SNRs in dB, phase), length
// 2K + 1 + sum(V_k).
std::vector<double> encode_state(const State& state, const EnvConfig& config);
int encoded_state_width(const EnvConfig& config);

StepOutcome step(const State& state, const ActionMatrix& action, const EnvConfig& config, Rng& rng);

} // namespace raftmig
