#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "raftmig/baselines.hpp"
#include "raftmig/env.hpp"

using namespace raftmig;

namespace {

EnvConfig four_cluster_config() {
    EnvConfig config;
    config.topology.cluster_count = 4;
    config.topology.followers_per_cluster = {4, 4, 4, 4};
    config.topology.leader_follower_distances_m.assign(4, std::vector<double>(4, 150.0));
    config.topology.fiber_rate_bps = 1e9;
    config.topology.cpu_rate_hz = {1e9, 1e9, 1e9, 1e9};
    config.topology.hash_cycles = 300.0;
    config.topology.tx_size_bits = 4096.0;
    config.topology.append_msg_bits = 65536.0;
    config.topology.confirm_msg_bits = 2048.0;
    config.channel.bandwidth_hz = 20e6;
    config.channel.tx_power_dbm = 24.0;
    config.channel.noise_psd_dbm_hz = -150.0;
    config.channel.path_loss_exp = 3.4;
    config.channel.shadow_sigma_db = 0.0;
    config.action_budget = 10;
    config.epochs_per_block = 4;
    config.arrivals.base_rates = {6, 4, 6, 6};
    config.arrivals.anomaly_cluster = 1;
    config.arrivals.mode = AnomalyMode::Fixed;
    config.arrivals.fixed_rate = 9;
    return config;
}

int migrations_in_prefix(const ActionMatrix& action, int k, int prefix) {
    int count = 0;
    for (int n = 0; n < prefix; ++n)
        if (action.at(k, n) != k + 1) ++count;
    return count;
}

} // namespace

TEST_CASE("the non-migration policy is the identity everywhere") {
    const EnvConfig config = four_cluster_config();
    Rng rng(1);
    State s = reset(config, rng);
    const ActionMatrix a = non_migration_policy(s, config);
    for (int k = 0; k < 4; ++k)
        for (int n = 0; n < 10; ++n) CHECK(a.at(k, n) == k + 1);

    // Stepping with it never migrates anything.
    for (int i = 0; i < 40; ++i) {
        StepOutcome o = step(s, non_migration_policy(s, config), config, rng);
        CHECK(o.migrated_counts == std::vector<int>{0, 0, 0, 0});
        s = o.next_state;
    }
}

TEST_CASE("static ratio rows migrate exactly round(f*c) of any acted prefix") {
    const EnvConfig config = four_cluster_config();
    Rng rng(2);
    const State s = reset(config, rng);

    for (double fraction : {0.3, 0.5}) {
        Rng policy_rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            const ActionMatrix a =
                static_ratio_policy(s, config, StaticPolicyConfig{fraction}, policy_rng);
            for (int k = 0; k < 4; ++k)
                for (int prefix = 0; prefix <= 10; ++prefix)
                    CHECK(migrations_in_prefix(a, k, prefix) ==
                          static_cast<int>(std::llround(fraction * prefix)));
        }
    }
}

TEST_CASE("static ratio destinations are valid and roughly uniform over other clusters") {
    const EnvConfig config = four_cluster_config();
    Rng rng(3);
    const State s = reset(config, rng);
    Rng policy_rng(8);
    std::vector<int> dest_counts(5, 0);
    int migrations = 0;
    for (int trial = 0; trial < 4000; ++trial) {
        const ActionMatrix a =
            static_ratio_policy(s, config, StaticPolicyConfig{0.5}, policy_rng);
        for (int k = 0; k < 4; ++k)
            for (int n = 0; n < 10; ++n) {
                const int dest = a.at(k, n);
                CHECK(dest >= 1);
                CHECK(dest <= 4);
                if (dest != k + 1 && k == 0) {
                    ++dest_counts[static_cast<std::size_t>(dest)];
                    ++migrations;
                }
            }
    }
    // Cluster 1's migrations spread evenly over clusters 2..4.
    for (int dest = 2; dest <= 4; ++dest) {
        const double share =
            static_cast<double>(dest_counts[static_cast<std::size_t>(dest)]) / migrations;
        CHECK(share == doctest::Approx(1.0 / 3.0).epsilon(0.05));
    }
    CHECK(dest_counts[1] == 0); // never "migrates" to itself
}

TEST_CASE("the random policy is i.i.d. uniform over all destinations") {
    const EnvConfig config = four_cluster_config();
    Rng rng(4);
    const State s = reset(config, rng);
    Rng policy_rng(9);
    std::vector<long long> counts(5, 0);
    long long total = 0, self = 0;
    for (int trial = 0; trial < 2500; ++trial) {
        const ActionMatrix a = random_policy(s, config, policy_rng);
        for (int k = 0; k < 4; ++k)
            for (int n = 0; n < 10; ++n) {
                const int dest = a.at(k, n);
                REQUIRE(dest >= 1);
                REQUIRE(dest <= 4);
                ++counts[static_cast<std::size_t>(dest)];
                ++total;
                if (dest == k + 1) ++self;
            }
    }
    for (int dest = 1; dest <= 4; ++dest) {
        const double share = static_cast<double>(counts[static_cast<std::size_t>(dest)]) /
                             static_cast<double>(total);
        CHECK(share == doctest::Approx(0.25).epsilon(0.03));
    }
    // Keeping happens at rate 1/K, so migration sits at (K-1)/K.
    const double migrate_share = 1.0 - static_cast<double>(self) / static_cast<double>(total);
    CHECK(migrate_share == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("policies are deterministic given the policy stream") {
    const EnvConfig config = four_cluster_config();
    Rng rng(5);
    const State s = reset(config, rng);
    Rng a1(77), a2(77);
    for (int i = 0; i < 20; ++i) {
        CHECK(random_policy(s, config, a1).entries == random_policy(s, config, a2).entries);
    }
    Rng b1(78), b2(78);
    for (int i = 0; i < 20; ++i) {
        CHECK(static_ratio_policy(s, config, StaticPolicyConfig{0.3}, b1).entries ==
              static_ratio_policy(s, config, StaticPolicyConfig{0.3}, b2).entries);
    }
}

TEST_CASE("degenerate single-cluster systems keep everything local") {
    EnvConfig config = four_cluster_config();
    config.topology.cluster_count = 1;
    config.topology.followers_per_cluster = {4};
    config.action_budget = 3;
    State s;
    s.decision_queues = {0};
    s.packing_queues = {0};
    Rng rng(6);
    const ActionMatrix a = static_ratio_policy(s, config, StaticPolicyConfig{0.5}, rng);
    CHECK(a.entries == std::vector<int>{1, 1, 1});
    const ActionMatrix r = random_policy(s, config, rng);
    CHECK(r.entries == std::vector<int>{1, 1, 1});
}
