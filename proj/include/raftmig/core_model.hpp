#pragma once

#include <cstdint>
#include <vector>

#include "raftmig/rng.hpp"

namespace raftmig {

// Wireless access parameters shared by every cluster.
struct ChannelParams {
    double bandwidth_hz = 20e6;
    double tx_power_dbm = 24.0;
    double noise_psd_dbm_hz = -150.0;
    double path_loss_exp = 3.4;
    double shadow_sigma_db = 8.0;
};

// Static cluster layout: K leaders, V_k followers each, plus the constants of
// the latency model (per-transaction size, message sizes, CPU and fiber rates).
struct ClusterTopology {
    int cluster_count = 4;
    std::vector<int> followers_per_cluster;            // V_k
    std::vector<std::vector<double>> leader_follower_distances_m; // d[k][v]
    double fiber_rate_bps = 1e9;                        // G
    std::vector<double> cpu_rate_hz;                    // eta_k
    double hash_cycles = 300.0;                         // xi
    double tx_size_bits = 4096.0;                       // D
    double append_msg_bits = 65536.0;                   // C
    double confirm_msg_bits = 2048.0;                   // E
};

// Per-cluster latency terms for one block interval, plus the system maximum.
struct LatencyBreakdown {
    struct Terms {
        double t_mig_s = 0.0;
        double t_com_s = 0.0;
        double t_con_s = 0.0;
    };
    std::vector<Terms> per_cluster;
    double system_max_s = 0.0;
};

void validate_topology(const ClusterTopology& topo);
void validate_channel(const ChannelParams& params);

// Number of hash evaluations to build a Merkle tree over n_tx leaves padded to
// the next power of two: n_tx + 2^ceil(log2(n_tx)) - 1. Rejects n_tx <= 0.
std::int64_t merkle_hash_count(std::int64_t n_tx);

// merkle_hash_count(n_tx) * hash_cycles / cpu_rate_hz; 0 for an empty block.
double block_generation_latency(std::int64_t n_tx, double hash_cycles, double cpu_rate_hz);

// Linear SNR of one leader->follower link. Transmit power is split equally
// across the cluster's v_count followers; shadow_db is the log-normal shadowing
// sample in dB.
double link_snr(const ChannelParams& params, int v_count, double distance_m, double shadow_db);

// Shannon rate of one link with the band split equally across v_count links.
double link_rate(double bandwidth_hz, int v_count, double snr_linear);

// floor(v_count / 2): consensus completes once this many confirmations arrive
// (the leader itself completes the majority).
int quorum_index(int v_count);

// Round-trip per follower is append_bits/down + confirm_bits/up; the result is
// the quorum_index-th smallest round trip (0 when the quorum index is 0).
double consensus_latency(double append_bits, double confirm_bits,
                         const std::vector<double>& downlink_rates_bps,
                         const std::vector<double>& uplink_rates_bps, int v_count);

// inbound_count transactions crossing the inter-leader fiber link.
double migration_latency(std::int64_t inbound_count, double tx_size_bits, double fiber_rate_bps);

// Gaussian sample in the dB domain (log-normal in linear scale); exactly 0 for
// sigma_db = 0.
double sample_shadow_fading(Rng& rng, double sigma_db);

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

} // namespace raftmig
