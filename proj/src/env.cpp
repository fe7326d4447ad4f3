#include "raftmig/env.hpp"

#include <algorithm>
#include <cmath>

#include "raftmig/error.hpp"

namespace raftmig {

namespace {

int total_followers(const EnvConfig& config) {
    int sum = 0;
    for (int v : config.topology.followers_per_cluster) sum += v;
    return sum;
}

int schedule_rate_at(const ArrivalProfile& profile, std::int64_t epoch) {
    for (const ScheduleSegment& seg : profile.schedule)
        if (epoch >= seg.begin_epoch && epoch < seg.end_epoch) return seg.rate;
    return profile.base_rates[static_cast<std::size_t>(profile.anomaly_cluster)];
}

void sample_all_snrs(const EnvConfig& config, Rng& rng, std::vector<double>& out) {
    const ClusterTopology& topo = config.topology;
    out.clear();
    for (int k = 0; k < topo.cluster_count; ++k) {
        const int v_count = topo.followers_per_cluster[static_cast<std::size_t>(k)];
        for (int v = 0; v < v_count; ++v) {
            const double shadow =
                sample_shadow_fading(rng, config.channel.shadow_sigma_db);
            out.push_back(link_snr(config.channel, v_count,
                                   topo.leader_follower_distances_m[static_cast<std::size_t>(k)]
                                                                   [static_cast<std::size_t>(v)],
                                   shadow));
        }
    }
}

int initial_anomaly_rate(const EnvConfig& config, Rng& rng) {
    const ArrivalProfile& p = config.arrivals;
    switch (p.mode) {
        case AnomalyMode::Fixed: return p.fixed_rate;
        case AnomalyMode::Shuffle:
            return p.shuffle_values[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(p.shuffle_values.size()) - 1))];
        case AnomalyMode::Schedule: return schedule_rate_at(p, 0);
    }
    fail("invalid-config", "unknown anomaly mode");
}

void check_action_shape(const State& state, const ActionMatrix& action, const EnvConfig& config) {
    const int k = config.topology.cluster_count;
    const int n = config.action_budget;
    if (action.clusters != k || action.budget != n ||
        static_cast<int>(action.entries.size()) != k * n)
        fail("malformed-action", "action matrix dimensions do not match the environment");
    if (static_cast<int>(state.decision_queues.size()) != k ||
        static_cast<int>(state.packing_queues.size()) != k)
        fail("malformed-action", "state dimensions do not match the environment");
    for (int entry : action.entries)
        if (entry < 1 || entry > k) fail("malformed-action", "destination out of range");
}

} // namespace

ActionMatrix identity_action(int clusters, int budget) {
    ActionMatrix a;
    a.clusters = clusters;
    a.budget = budget;
    a.entries.resize(static_cast<std::size_t>(clusters) * budget);
    for (int k = 0; k < clusters; ++k)
        for (int n = 0; n < budget; ++n) a.at(k, n) = k + 1;
    return a;
}

void validate_env_config(const EnvConfig& config) {
    try {
        validate_topology(config.topology);
        validate_channel(config.channel);
    } catch (const Error& e) {
        fail("invalid-config", e.what());
    }
    const int k = config.topology.cluster_count;
    if (config.action_budget < 1) fail("invalid-config", "action_budget must be >= 1");
    if (config.epochs_per_block < 1) fail("invalid-config", "epochs_per_block must be >= 1");
    if (!(config.decision_interval_s > 0.0))
        fail("invalid-config", "decision_interval_s must be positive");
    if (config.queue_norm < 0.0) fail("invalid-config", "queue_norm must be nonnegative");
    if (!(config.snr_db_scale > 0.0)) fail("invalid-config", "snr_db_scale must be positive");

    const ArrivalProfile& p = config.arrivals;
    if (static_cast<int>(p.base_rates.size()) != k)
        fail("invalid-config", "base_rates must have one entry per cluster");
    if (p.anomaly_cluster < 0 || p.anomaly_cluster >= k)
        fail("invalid-config", "anomaly_cluster out of range");
    int max_rate = 0;
    for (int r : p.base_rates) {
        if (r < 0) fail("invalid-config", "arrival rates must be nonnegative");
        max_rate = std::max(max_rate, r);
    }
    std::int64_t prev_end = -1;
    for (const ScheduleSegment& seg : p.schedule) {
        if (seg.begin_epoch < 0 || seg.end_epoch <= seg.begin_epoch)
            fail("invalid-config", "schedule ranges must be nonempty and ordered");
        if (seg.begin_epoch < prev_end)
            fail("invalid-config", "schedule ranges must be disjoint and ordered");
        if (seg.rate < 0) fail("invalid-config", "schedule rates must be nonnegative");
        prev_end = seg.end_epoch;
        max_rate = std::max(max_rate, seg.rate);
    }
    if (p.mode == AnomalyMode::Fixed) {
        if (p.fixed_rate < 0) fail("invalid-config", "fixed anomaly rate must be nonnegative");
        max_rate = std::max(max_rate, p.fixed_rate);
    }
    if (p.mode == AnomalyMode::Shuffle) {
        if (p.shuffle_values.empty())
            fail("invalid-config", "shuffle mode needs a nonempty value set");
        if (p.shuffle_segment_epochs < 1)
            fail("invalid-config", "shuffle segment length must be >= 1");
        for (int r : p.shuffle_values) {
            if (r < 0) fail("invalid-config", "shuffle rates must be nonnegative");
            max_rate = std::max(max_rate, r);
        }
    }
    // Keeps decision queues empty at steady state so every arrival is acted the
    // epoch it arrives; the clamped transition stays correct without it, but
    // the action budget would silently truncate load.
    if (config.action_budget < max_rate)
        fail("invalid-config", "action_budget must be >= the maximum arrival rate");
}

std::vector<int> arrival_rates(const State& state, const EnvConfig& config) {
    std::vector<int> rates = config.arrivals.base_rates;
    rates[static_cast<std::size_t>(config.arrivals.anomaly_cluster)] = state.anomaly_rate;
    return rates;
}

State reset(const EnvConfig& config, Rng& rng) {
    validate_env_config(config);
    const int k = config.topology.cluster_count;
    State s;
    s.decision_queues.assign(static_cast<std::size_t>(k), 0);
    s.packing_queues.assign(static_cast<std::size_t>(k), 0);
    s.pending_inbound.assign(static_cast<std::size_t>(k), 0);
    s.interval_inbound.assign(static_cast<std::size_t>(k), 0);
    s.phase = 0;
    s.epoch = 0;
    sample_all_snrs(config, rng, s.snrs);
    s.anomaly_rate = initial_anomaly_rate(config, rng);
    return s;
}

State reset(const EnvConfig& config, std::uint64_t seed) {
    Rng rng(derive_seed(seed, StreamTag::Environment));
    return reset(config, rng);
}

StepOutcome step(const State& state, const ActionMatrix& action, const EnvConfig& config,
                 Rng& rng) {
    check_action_shape(state, action, config);
    const int k_count = config.topology.cluster_count;
    const int budget = config.action_budget;
    const bool packing = state.phase == config.epochs_per_block - 1;

    StepOutcome out;
    out.canonical_action = action;
    out.canonical_action.valid_counts.assign(static_cast<std::size_t>(k_count), 0);
    out.acted_counts.assign(static_cast<std::size_t>(k_count), 0);
    out.migrated_counts.assign(static_cast<std::size_t>(k_count), 0);
    out.committed_counts.assign(static_cast<std::size_t>(k_count), 0);

    const std::vector<int> arrivals = arrival_rates(state, config);
    std::vector<int> next_decision(static_cast<std::size_t>(k_count), 0);
    std::vector<int> packed = state.packing_queues;
    std::vector<int> landed = state.interval_inbound;
    std::vector<int> outbound(static_cast<std::size_t>(k_count), 0);

    for (int k = 0; k < k_count; ++k) {
        const int backlog = state.decision_queues[static_cast<std::size_t>(k)] +
                            arrivals[static_cast<std::size_t>(k)];
        const int acted = std::min(budget, backlog);
        next_decision[static_cast<std::size_t>(k)] = backlog - acted;
        out.acted_counts[static_cast<std::size_t>(k)] = acted;
        out.canonical_action.valid_counts[static_cast<std::size_t>(k)] = acted;

        int kept = 0;
        for (int n = 0; n < budget; ++n) {
            if (n >= acted) {
                out.canonical_action.at(k, n) = k + 1; // identity padding
                continue;
            }
            const int dest = action.at(k, n) - 1;
            if (dest == k) {
                ++kept;
            } else {
                ++outbound[static_cast<std::size_t>(dest)];
                ++out.migrated_counts[static_cast<std::size_t>(k)];
            }
        }
        // Kept transactions join the local packing queue now; last epoch's
        // in-flight migrations land at their destinations now.
        packed[static_cast<std::size_t>(k)] +=
            kept + state.pending_inbound[static_cast<std::size_t>(k)];
        landed[static_cast<std::size_t>(k)] += state.pending_inbound[static_cast<std::size_t>(k)];
    }

    if (packing) {
        // The packing queues as of this epoch are the block contents.
        State at_packing = state;
        at_packing.packing_queues = packed;
        at_packing.interval_inbound = landed;
        auto [r, breakdown] = reward(at_packing, config);
        out.reward = r;
        out.latency = std::move(breakdown);
        out.committed_counts = packed;
    }

    State next;
    next.decision_queues = std::move(next_decision);
    next.packing_queues = packing ? std::vector<int>(static_cast<std::size_t>(k_count), 0)
                                  : std::move(packed);
    next.pending_inbound = std::move(outbound);
    next.interval_inbound = packing ? std::vector<int>(static_cast<std::size_t>(k_count), 0)
                                    : std::move(landed);
    next.phase = (state.phase + 1) % config.epochs_per_block;
    next.epoch = state.epoch + 1;
    sample_all_snrs(config, rng, next.snrs);

    const ArrivalProfile& profile = config.arrivals;
    switch (profile.mode) {
        case AnomalyMode::Fixed: next.anomaly_rate = profile.fixed_rate; break;
        case AnomalyMode::Schedule:
            next.anomaly_rate = schedule_rate_at(profile, next.epoch);
            break;
        case AnomalyMode::Shuffle:
            if (next.epoch % profile.shuffle_segment_epochs == 0) {
                next.anomaly_rate = profile.shuffle_values[static_cast<std::size_t>(
                    rng.uniform_int(0,
                                    static_cast<std::int64_t>(profile.shuffle_values.size()) - 1))];
            } else {
                next.anomaly_rate = state.anomaly_rate;
            }
            break;
    }

    out.next_state = std::move(next);
    return out;
}

State transition(const State& state, const ActionMatrix& action, const EnvConfig& config,
                 Rng& rng) {
    return step(state, action, config, rng).next_state;
}

std::pair<double, std::optional<LatencyBreakdown>> reward(const State& state_at_packing,
                                                          const EnvConfig& config) {
    if (state_at_packing.phase != config.epochs_per_block - 1) return {0.0, std::nullopt};

    const ClusterTopology& topo = config.topology;
    const int k_count = topo.cluster_count;
    LatencyBreakdown breakdown;
    breakdown.per_cluster.resize(static_cast<std::size_t>(k_count));
    double worst = 0.0;
    std::size_t snr_base = 0;
    for (int k = 0; k < k_count; ++k) {
        const int v_count = topo.followers_per_cluster[static_cast<std::size_t>(k)];
        const int packed = state_at_packing.packing_queues[static_cast<std::size_t>(k)];

        LatencyBreakdown::Terms terms;
        terms.t_com_s = block_generation_latency(packed, topo.hash_cycles,
                                                 topo.cpu_rate_hz[static_cast<std::size_t>(k)]);
        terms.t_mig_s =
            migration_latency(state_at_packing.interval_inbound[static_cast<std::size_t>(k)],
                              topo.tx_size_bits, topo.fiber_rate_bps);

        std::vector<double> rates(static_cast<std::size_t>(v_count));
        for (int v = 0; v < v_count; ++v)
            rates[static_cast<std::size_t>(v)] = link_rate(
                config.channel.bandwidth_hz, v_count,
                state_at_packing.snrs[snr_base + static_cast<std::size_t>(v)]);
        const double append_bits =
            topo.append_msg_bits +
            (config.append_includes_block ? static_cast<double>(packed) * topo.tx_size_bits : 0.0);
        terms.t_con_s =
            consensus_latency(append_bits, topo.confirm_msg_bits, rates, rates, v_count);

        breakdown.per_cluster[static_cast<std::size_t>(k)] = terms;
        worst = std::max(worst, terms.t_mig_s + terms.t_com_s + terms.t_con_s);
        snr_base += static_cast<std::size_t>(v_count);
    }
    breakdown.system_max_s = worst;
    return {-worst, std::optional<LatencyBreakdown>(std::move(breakdown))};
}

int encoded_state_width(const EnvConfig& config) {
    return 2 * config.topology.cluster_count + 1 + total_followers(config);
}

std::vector<double> encode_state(const State& state, const EnvConfig& config) {
    const double qn = config.queue_norm > 0.0 ? config.queue_norm
                                              : 4.0 * static_cast<double>(config.action_budget);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(encoded_state_width(config)));
    for (int d : state.decision_queues) out.push_back(static_cast<double>(d) / qn);
    for (int p : state.packing_queues) out.push_back(static_cast<double>(p) / qn);
    for (double snr : state.snrs) {
        double scaled = 0.0;
        if (snr > 0.0)
            scaled = (linear_to_db(snr) + config.snr_db_offset) / config.snr_db_scale;
        out.push_back(std::clamp(scaled, 0.0, 1.0));
    }
    out.push_back(static_cast<double>(state.phase) /
                  static_cast<double>(config.epochs_per_block));
    return out;
}

} // namespace raftmig
