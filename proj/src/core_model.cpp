#include "raftmig/core_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "raftmig/error.hpp"

namespace raftmig {

void validate_topology(const ClusterTopology& topo) {
    const int k = topo.cluster_count;
    if (k < 2) fail("invalid-topology", "cluster_count must be >= 2");
    if (static_cast<int>(topo.followers_per_cluster.size()) != k)
        fail("invalid-topology", "followers_per_cluster size must equal cluster_count");
    if (static_cast<int>(topo.leader_follower_distances_m.size()) != k)
        fail("invalid-topology", "distance table must have one row per cluster");
    if (static_cast<int>(topo.cpu_rate_hz.size()) != k)
        fail("invalid-topology", "cpu_rate_hz must have one entry per cluster");
    for (int i = 0; i < k; ++i) {
        if (topo.followers_per_cluster[i] < 1)
            fail("invalid-topology", "every cluster needs at least one follower");
        if (static_cast<int>(topo.leader_follower_distances_m[i].size()) !=
            topo.followers_per_cluster[i])
            fail("invalid-topology", "distance row length must equal the follower count");
        for (double d : topo.leader_follower_distances_m[i])
            if (!(d > 0.0)) fail("invalid-topology", "distances must be positive");
        if (!(topo.cpu_rate_hz[i] > 0.0)) fail("invalid-topology", "cpu rates must be positive");
    }
    if (!(topo.fiber_rate_bps > 0.0)) fail("invalid-topology", "fiber_rate_bps must be positive");
    if (!(topo.hash_cycles >= 0.0)) fail("invalid-topology", "hash_cycles must be nonnegative");
    if (!(topo.tx_size_bits > 0.0)) fail("invalid-topology", "tx_size_bits must be positive");
    if (!(topo.append_msg_bits > 0.0)) fail("invalid-topology", "append_msg_bits must be positive");
    if (!(topo.confirm_msg_bits > 0.0)) fail("invalid-topology", "confirm_msg_bits must be positive");
}

void validate_channel(const ChannelParams& params) {
    if (!(params.bandwidth_hz > 0.0)) fail("invalid-topology", "bandwidth_hz must be positive");
    if (!(params.path_loss_exp > 0.0)) fail("invalid-topology", "path_loss_exp must be positive");
    if (!(params.shadow_sigma_db >= 0.0))
        fail("invalid-topology", "shadow_sigma_db must be nonnegative");
}

std::int64_t merkle_hash_count(std::int64_t n_tx) {
    if (n_tx < 1) fail("validation-error", "merkle_hash_count requires n_tx >= 1");
    const auto n = static_cast<std::uint64_t>(n_tx);
    const std::uint64_t padded = std::bit_ceil(n); // 2^ceil(log2(n))
    return n_tx + static_cast<std::int64_t>(padded) - 1;
}

double block_generation_latency(std::int64_t n_tx, double hash_cycles, double cpu_rate_hz) {
    if (!(cpu_rate_hz > 0.0)) fail("validation-error", "cpu_rate_hz must be positive");
    if (n_tx == 0) return 0.0;
    return static_cast<double>(merkle_hash_count(n_tx)) * hash_cycles / cpu_rate_hz;
}

double link_snr(const ChannelParams& params, int v_count, double distance_m, double shadow_db) {
    if (v_count < 1) fail("validation-error", "v_count must be >= 1");
    if (!(distance_m > 0.0)) fail("validation-error", "distance_m must be positive");
    const double power_w = dbm_to_watts(params.tx_power_dbm) / static_cast<double>(v_count);
    const double path_gain = std::pow(distance_m, -params.path_loss_exp);
    const double shadow_gain = db_to_linear(shadow_db);
    const double noise_w = dbm_to_watts(params.noise_psd_dbm_hz) * params.bandwidth_hz;
    return power_w * path_gain * shadow_gain / noise_w;
}

double link_rate(double bandwidth_hz, int v_count, double snr_linear) {
    if (v_count < 1) fail("validation-error", "v_count must be >= 1");
    if (!(snr_linear >= 0.0)) fail("validation-error", "snr must be nonnegative");
    return bandwidth_hz / static_cast<double>(v_count) * std::log2(1.0 + snr_linear);
}

int quorum_index(int v_count) {
    if (v_count < 1) fail("validation-error", "v_count must be >= 1");
    return v_count / 2;
}

double consensus_latency(double append_bits, double confirm_bits,
                         const std::vector<double>& downlink_rates_bps,
                         const std::vector<double>& uplink_rates_bps, int v_count) {
    if (static_cast<int>(downlink_rates_bps.size()) != v_count ||
        static_cast<int>(uplink_rates_bps.size()) != v_count)
        fail("invalid-topology", "rate lists must have v_count entries");
    const int zeta = quorum_index(v_count);
    if (zeta == 0) return 0.0;
    std::vector<double> round_trips(static_cast<std::size_t>(v_count));
    for (int v = 0; v < v_count; ++v) {
        if (!(downlink_rates_bps[v] > 0.0) || !(uplink_rates_bps[v] > 0.0))
            fail("invalid-topology", "link rates must be positive");
        round_trips[v] = append_bits / downlink_rates_bps[v] + confirm_bits / uplink_rates_bps[v];
    }
    std::nth_element(round_trips.begin(), round_trips.begin() + (zeta - 1), round_trips.end());
    return round_trips[static_cast<std::size_t>(zeta - 1)];
}

double migration_latency(std::int64_t inbound_count, double tx_size_bits, double fiber_rate_bps) {
    if (!(fiber_rate_bps > 0.0)) fail("validation-error", "fiber_rate_bps must be positive");
    if (inbound_count < 0) fail("validation-error", "inbound_count must be nonnegative");
    return static_cast<double>(inbound_count) * tx_size_bits / fiber_rate_bps;
}

double sample_shadow_fading(Rng& rng, double sigma_db) {
    if (!(sigma_db >= 0.0)) fail("validation-error", "sigma_db must be nonnegative");
    if (sigma_db == 0.0) return 0.0;
    return rng.gaussian(0.0, sigma_db);
}

} // namespace raftmig
