#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raftmig/ddpg.hpp"
#include "raftmig/env.hpp"

namespace raftmig {

enum class PolicyKind { NonMigration, Static30, Static50, Random, Ddpg };

const char* policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);
inline const PolicyKind kAllPolicies[] = {PolicyKind::NonMigration, PolicyKind::Static30,
                                          PolicyKind::Static50, PolicyKind::Random,
                                          PolicyKind::Ddpg};

// Flat experiment configuration: every key of the config file maps to one
// field. Defaults reproduce the reference scenario (4 clusters of 4 followers,
// 20 MHz band, 24 dBm split per cluster, path-loss exponent 3.4, 300
// cycles/hash at 1 GHz).
struct ExperimentConfig {
    // Clusters and channel.
    int clusters = 4;                       // K
    std::vector<int> followers = {4};       // V; single value broadcasts
    double bandwidth_hz = 20e6;             // B
    double noise_psd_dbm_hz = -150.0;       // N0
    double tx_power_dbm = 24.0;             // P
    double path_loss_exp = 3.4;             // beta
    double shadow_sigma_db = 8.0;           // sigma_shadow
    double hash_cycles = 300.0;             // xi
    std::vector<double> cpu_rate_hz = {1e9}; // eta; single value broadcasts
    double tx_size_bits = 4096.0;           // D
    double fiber_rate_bps = 1e9;            // G
    double append_msg_bits = 65536.0;       // C
    double confirm_msg_bits = 2048.0;       // E
    double d_min_m = 50.0;
    double d_max_m = 300.0;
    bool append_includes_block = false;

    // Environment.
    int action_budget = 10;     // N
    int epochs_per_block = 4;   // F
    double decision_interval_s = 1.0; // delta_tau
    double queue_norm = 0.0;          // 0 = 4*N
    double snr_db_offset = 20.0;
    double snr_db_scale = 60.0;
    int base_rate = 6;                // M, arrivals of every regular cluster
    int anomaly_base_rate = 4;        // anomaly cluster's rate outside anomalies
    int anomaly_cluster = 2;          // 1-based in config and outputs
    std::vector<int> m2_values = {4, 5, 6, 7, 8, 9}; // training value set
    std::int64_t segment_epochs = 200;               // training shuffle period
    std::vector<ScheduleSegment> m2_schedule;        // optional explicit trace

    // Agent.
    Hyperparams hyper;

    // Harness.
    std::string policy = "ddpg";
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<int> m2_sweep = {4, 5, 6, 7, 8, 9};
    int eval_episodes = 100;
    int eval_burnin_blocks = 50;
    std::string output_dir = "out";
    bool trace = false;
};

// Parse the key=value file at `path` over the defaults, then apply
// RAFTMIG_<KEY> environment overrides, then validate.
ExperimentConfig load_config(const std::string& path);
// Same pipeline over in-memory text (empty text yields the defaults).
ExperimentConfig load_config_text(const std::string& text);

void validate_config(const ExperimentConfig& config);

// Canonical textual form: every key once, fixed order; load(serialize(c))
// equals c.
std::string serialize_config(const ExperimentConfig& config);

// Derived module configurations. Distances are drawn once per seed from
// [d_min, d_max] and frozen; the arrival profile defaults to Schedule mode
// with the configured trace.
EnvConfig make_env_config(const ExperimentConfig& config, std::uint64_t seed);

} // namespace raftmig
