#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "raftmig/env.hpp"
#include "raftmig/error.hpp"

using namespace raftmig;

namespace {

// Two clusters of two followers, deterministic channel (no shadowing).
EnvConfig two_cluster_config() {
    EnvConfig config;
    config.topology.cluster_count = 2;
    config.topology.followers_per_cluster = {2, 2};
    config.topology.leader_follower_distances_m = {{100.0, 200.0}, {150.0, 150.0}};
    config.topology.fiber_rate_bps = 1e9;
    config.topology.cpu_rate_hz = {1e9, 1e9};
    config.topology.hash_cycles = 300.0;
    config.topology.tx_size_bits = 4096.0;
    config.topology.append_msg_bits = 65536.0;
    config.topology.confirm_msg_bits = 2048.0;
    config.channel.bandwidth_hz = 20e6;
    config.channel.tx_power_dbm = 24.0;
    config.channel.noise_psd_dbm_hz = -150.0;
    config.channel.path_loss_exp = 3.4;
    config.channel.shadow_sigma_db = 0.0;
    config.action_budget = 4;
    config.epochs_per_block = 4;
    config.arrivals.base_rates = {2, 3};
    config.arrivals.anomaly_cluster = 0;
    config.arrivals.mode = AnomalyMode::Fixed;
    config.arrivals.fixed_rate = 2; // anomaly cluster pinned at its base rate
    return config;
}

} // namespace

TEST_CASE("identity action keeps every destination local") {
    const ActionMatrix a = identity_action(3, 2);
    CHECK(a.clusters == 3);
    CHECK(a.budget == 2);
    REQUIRE(a.entries.size() == 6);
    for (int k = 0; k < 3; ++k)
        for (int n = 0; n < 2; ++n) CHECK(a.at(k, n) == k + 1);
}

TEST_CASE("config validation rejects inconsistent setups") {
    EnvConfig config = two_cluster_config();
    CHECK_NOTHROW(validate_env_config(config));

    SUBCASE("budget below the peak arrival rate") {
        config.action_budget = 2; // base rate 3 exceeds it
        CHECK_THROWS_WITH_AS(validate_env_config(config),
                             doctest::Contains("action_budget"), Error);
    }
    SUBCASE("arrival vector length") {
        config.arrivals.base_rates = {2};
        CHECK_THROWS_AS(validate_env_config(config), Error);
    }
    SUBCASE("anomaly cluster out of range") {
        config.arrivals.anomaly_cluster = 2;
        CHECK_THROWS_AS(validate_env_config(config), Error);
    }
    SUBCASE("overlapping schedule ranges") {
        config.arrivals.mode = AnomalyMode::Schedule;
        config.arrivals.schedule = {{0, 10, 4}, {5, 15, 3}};
        CHECK_THROWS_AS(validate_env_config(config), Error);
    }
    SUBCASE("empty shuffle set") {
        config.arrivals.mode = AnomalyMode::Shuffle;
        config.arrivals.shuffle_values = {};
        CHECK_THROWS_AS(validate_env_config(config), Error);
    }
    SUBCASE("zero block period") {
        config.epochs_per_block = 0;
        CHECK_THROWS_AS(validate_env_config(config), Error);
    }
}

TEST_CASE("reset yields empty queues and per-follower channel draws") {
    const EnvConfig config = two_cluster_config();
    const State s = reset(config, std::uint64_t{3});
    CHECK(s.decision_queues == std::vector<int>{0, 0});
    CHECK(s.packing_queues == std::vector<int>{0, 0});
    CHECK(s.pending_inbound == std::vector<int>{0, 0});
    CHECK(s.interval_inbound == std::vector<int>{0, 0});
    CHECK(s.phase == 0);
    CHECK(s.epoch == 0);
    CHECK(s.anomaly_rate == 2);
    REQUIRE(s.snrs.size() == 4);
    // No shadowing: the draw is the deterministic distance-dependent value,
    // and the closer follower of cluster 0 sees the stronger channel.
    CHECK(s.snrs[0] > s.snrs[1]);
    CHECK(s.snrs[2] == s.snrs[3]);
    for (double snr : s.snrs) CHECK(snr > 0.0);
}

TEST_CASE("four-epoch hand trace with migration, landing delay, and packing") {
    const EnvConfig config = two_cluster_config();
    Rng rng(1);
    State s = reset(config, rng);

    // Cluster 0 migrates everything to cluster 1; cluster 1 keeps everything.
    ActionMatrix everything_to_1 = identity_action(2, 4);
    for (int n = 0; n < 4; ++n) everything_to_1.at(0, n) = 2;

    // Epoch 0: arrivals {2,3}; the two migrated transactions are in flight.
    StepOutcome o1 = step(s, everything_to_1, config, rng);
    CHECK(o1.acted_counts == std::vector<int>{2, 3});
    CHECK(o1.migrated_counts == std::vector<int>{2, 0});
    CHECK(o1.committed_counts == std::vector<int>{0, 0});
    CHECK(o1.reward == 0.0);
    CHECK(!o1.latency.has_value());
    CHECK(o1.next_state.decision_queues == std::vector<int>{0, 0});
    CHECK(o1.next_state.packing_queues == std::vector<int>{0, 3});
    CHECK(o1.next_state.pending_inbound == std::vector<int>{0, 2});
    CHECK(o1.next_state.interval_inbound == std::vector<int>{0, 0});
    CHECK(o1.next_state.phase == 1);
    CHECK(o1.next_state.epoch == 1);
    // Unused action slots of cluster 0 are canonicalized to the identity.
    CHECK(o1.canonical_action.at(0, 0) == 2);
    CHECK(o1.canonical_action.at(0, 1) == 2);
    CHECK(o1.canonical_action.at(0, 2) == 1);
    CHECK(o1.canonical_action.at(0, 3) == 1);
    CHECK(o1.canonical_action.valid_counts == std::vector<int>{2, 3});

    // Epoch 1: the in-flight pair lands at cluster 1 while two more take off.
    StepOutcome o2 = step(o1.next_state, everything_to_1, config, rng);
    CHECK(o2.next_state.packing_queues == std::vector<int>{0, 8});
    CHECK(o2.next_state.pending_inbound == std::vector<int>{0, 2});
    CHECK(o2.next_state.interval_inbound == std::vector<int>{0, 2});

    // Epoch 2.
    StepOutcome o3 = step(o2.next_state, everything_to_1, config, rng);
    CHECK(o3.next_state.packing_queues == std::vector<int>{0, 13});
    CHECK(o3.next_state.interval_inbound == std::vector<int>{0, 4});

    // Epoch 3 packs: block = 13 + 3 kept + 2 landed; the final in-flight pair
    // carries over into the next interval.
    StepOutcome o4 = step(o3.next_state, everything_to_1, config, rng);
    CHECK(o4.committed_counts == std::vector<int>{0, 18});
    REQUIRE(o4.latency.has_value());
    CHECK(o4.reward == -o4.latency->system_max_s);
    CHECK(o4.reward < 0.0);
    CHECK(o4.next_state.packing_queues == std::vector<int>{0, 0});
    CHECK(o4.next_state.interval_inbound == std::vector<int>{0, 0});
    CHECK(o4.next_state.pending_inbound == std::vector<int>{0, 2});
    CHECK(o4.next_state.phase == 0);

    // Conservation over the interval: 20 arrivals = 18 committed + 2 in flight.
    CHECK(o4.latency->per_cluster[0].t_com_s == 0.0);
    CHECK(o4.latency->per_cluster[1].t_mig_s > 0.0);
}

TEST_CASE("reward matches a spreadsheet computation of the latency terms") {
    EnvConfig config = two_cluster_config();
    Rng rng(5);
    State s = reset(config, rng);
    s.phase = config.epochs_per_block - 1;
    s.packing_queues = {4, 6};
    s.interval_inbound = {1, 2};
    s.snrs = {100.0, 400.0, 250.0, 250.0};

    auto [r, breakdown] = reward(s, config);
    REQUIRE(breakdown.has_value());

    // Rates: half the band per follower (two followers share the leader).
    const double r00 = 10e6 * std::log2(1.0 + 100.0);
    const double r01 = 10e6 * std::log2(1.0 + 400.0);
    const double r1 = 10e6 * std::log2(1.0 + 250.0);
    // Quorum of two followers is 1: the faster round trip decides.
    const double rtt00 = 65536.0 / r00 + 2048.0 / r00;
    const double rtt01 = 65536.0 / r01 + 2048.0 / r01;
    const double t_con0 = std::min(rtt00, rtt01);
    const double t_con1 = 67584.0 / r1;
    // Hash tree of the padded block: 4 -> 7 nodes, 6 -> 13 nodes.
    const double t_com0 = 7.0 * 300.0 / 1e9;
    const double t_com1 = 13.0 * 300.0 / 1e9;
    const double t_mig0 = 1.0 * 4096.0 / 1e9;
    const double t_mig1 = 2.0 * 4096.0 / 1e9;
    const double expect0 = t_con0 + t_com0 + t_mig0;
    const double expect1 = t_con1 + t_com1 + t_mig1;

    CHECK(breakdown->per_cluster[0].t_con_s == doctest::Approx(t_con0).epsilon(1e-12));
    CHECK(breakdown->per_cluster[0].t_com_s == doctest::Approx(t_com0).epsilon(1e-12));
    CHECK(breakdown->per_cluster[0].t_mig_s == doctest::Approx(t_mig0).epsilon(1e-12));
    CHECK(breakdown->per_cluster[1].t_con_s == doctest::Approx(t_con1).epsilon(1e-12));
    CHECK(breakdown->system_max_s ==
          doctest::Approx(std::max(expect0, expect1)).epsilon(1e-12));
    CHECK(r == doctest::Approx(-std::max(expect0, expect1)).epsilon(1e-12));

    SUBCASE("payload-bearing consensus grows with the block") {
        config.append_includes_block = true;
        auto [r2, b2] = reward(s, config);
        const double append0 = 65536.0 + 4.0 * 4096.0;
        const double t_con0b =
            std::min((append0 + 2048.0) / r00, (append0 + 2048.0) / r01);
        CHECK(b2->per_cluster[0].t_con_s == doctest::Approx(t_con0b).epsilon(1e-12));
        CHECK(r2 <= r);
    }

    SUBCASE("away from the packing phase the reward is zero with no breakdown") {
        s.phase = 0;
        auto [r3, b3] = reward(s, config);
        CHECK(r3 == 0.0);
        CHECK(!b3.has_value());
    }
}

TEST_CASE("decision backlog is worked off at the action budget") {
    const EnvConfig config = two_cluster_config();
    Rng rng(2);
    State s = reset(config, rng);
    s.decision_queues = {7, 0};
    const ActionMatrix keep = identity_action(2, 4);
    StepOutcome o = step(s, keep, config, rng);
    // Backlog 7 + 2 arrivals, budget 4: four acted, five left waiting.
    CHECK(o.acted_counts[0] == 4);
    CHECK(o.next_state.decision_queues[0] == 5);
    CHECK(o.next_state.packing_queues[0] == 4);
}

TEST_CASE("malformed actions are rejected") {
    const EnvConfig config = two_cluster_config();
    Rng rng(2);
    const State s = reset(config, rng);
    SUBCASE("wrong dimensions") {
        const ActionMatrix a = identity_action(3, 4);
        CHECK_THROWS_AS(step(s, a, config, rng), Error);
    }
    SUBCASE("destination out of range") {
        ActionMatrix a = identity_action(2, 4);
        a.at(1, 2) = 3;
        CHECK_THROWS_AS(step(s, a, config, rng), Error);
        a.at(1, 2) = 0;
        CHECK_THROWS_AS(step(s, a, config, rng), Error);
    }
}

TEST_CASE("anomaly rate follows the configured mode") {
    EnvConfig config = two_cluster_config();
    config.action_budget = 9;
    const ActionMatrix keep = identity_action(2, 9);

    SUBCASE("fixed") {
        config.arrivals.mode = AnomalyMode::Fixed;
        config.arrivals.fixed_rate = 7;
        Rng rng(4);
        State s = reset(config, rng);
        for (int i = 0; i < 6; ++i) {
            CHECK(s.anomaly_rate == 7);
            CHECK(arrival_rates(s, config) == std::vector<int>{7, 3});
            s = transition(s, keep, config, rng);
        }
    }
    SUBCASE("schedule with fallback to the base rate") {
        config.arrivals.mode = AnomalyMode::Schedule;
        config.arrivals.schedule = {{2, 4, 9}, {5, 6, 6}};
        Rng rng(4);
        State s = reset(config, rng);
        const int expected[] = {2, 2, 9, 9, 2, 6, 2};
        for (int i = 0; i < 7; ++i) {
            CHECK(s.anomaly_rate == expected[i]);
            s = transition(s, keep, config, rng);
        }
    }
    SUBCASE("shuffle holds a draw for a full segment") {
        config.arrivals.mode = AnomalyMode::Shuffle;
        config.arrivals.shuffle_values = {4, 5, 6, 7, 8, 9};
        config.arrivals.shuffle_segment_epochs = 5;
        Rng rng_a(4);
        State s = reset(config, rng_a);
        std::vector<int> observed;
        for (int i = 0; i < 25; ++i) {
            observed.push_back(s.anomaly_rate);
            s = transition(s, keep, config, rng_a);
        }
        for (int i = 0; i < 25; ++i) {
            CHECK(observed[i] >= 4);
            CHECK(observed[i] <= 9);
            if (i % 5 != 0) CHECK(observed[i] == observed[i - 1]);
        }
        // Same seed, same draw sequence.
        Rng rng_b(4);
        State t = reset(config, rng_b);
        for (int i = 0; i < 25; ++i) {
            CHECK(t.anomaly_rate == observed[i]);
            t = transition(t, keep, config, rng_b);
        }
    }
}

TEST_CASE("state encoding is normalized and dimension-stable") {
    EnvConfig config = two_cluster_config();
    CHECK(encoded_state_width(config) == 9); // 2K queues + 4 followers + phase
    Rng rng(6);
    State s = reset(config, rng);
    s.decision_queues = {4, 0};
    s.packing_queues = {0, 8};
    s.snrs = {1.0, 100.0, 1e9, 1e-10};
    s.phase = 1;
    const std::vector<double> enc = encode_state(s, config);
    REQUIRE(enc.size() == 9);
    CHECK(enc[0] == doctest::Approx(4.0 / 16.0)); // queue_norm defaults to 4N
    CHECK(enc[1] == 0.0);
    CHECK(enc[3] == doctest::Approx(8.0 / 16.0));
    CHECK(enc[4] == doctest::Approx((0.0 + 20.0) / 60.0));   // 0 dB
    CHECK(enc[5] == doctest::Approx((20.0 + 20.0) / 60.0));  // 20 dB
    CHECK(enc[6] == 1.0);                                    // clamped high
    CHECK(enc[7] == 0.0);                                    // clamped low
    CHECK(enc[8] == doctest::Approx(0.25));
    for (double v : enc) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    config.queue_norm = 32.0;
    CHECK(encode_state(s, config)[0] == doctest::Approx(4.0 / 32.0));
}

TEST_CASE("transitions are reproducible from the seed") {
    EnvConfig config = two_cluster_config();
    config.channel.shadow_sigma_db = 6.0; // exercise the stochastic channel
    config.arrivals.mode = AnomalyMode::Shuffle;
    config.arrivals.shuffle_values = {2, 3, 4};
    config.arrivals.shuffle_segment_epochs = 3;

    auto run = [&config](std::uint64_t seed) {
        Rng env_rng(derive_seed(seed, StreamTag::Environment));
        Rng action_rng(derive_seed(seed, StreamTag::BaselinePolicy));
        State s = reset(config, env_rng);
        std::vector<double> signature;
        for (int i = 0; i < 60; ++i) {
            ActionMatrix a = identity_action(2, 4);
            for (int& e : a.entries) e = static_cast<int>(action_rng.uniform_int(1, 2));
            StepOutcome o = step(s, a, config, env_rng);
            signature.push_back(o.reward);
            for (double snr : o.next_state.snrs) signature.push_back(snr);
            for (int d : o.next_state.decision_queues) signature.push_back(d);
            for (int p : o.next_state.packing_queues) signature.push_back(p);
            signature.push_back(o.next_state.anomaly_rate);
            s = o.next_state;
        }
        return signature;
    };
    CHECK(run(11) == run(11));
    CHECK(run(11) != run(12));
}

TEST_CASE("long-run transaction conservation holds exactly") {
    EnvConfig config = two_cluster_config();
    config.channel.shadow_sigma_db = 4.0;
    config.arrivals.mode = AnomalyMode::Shuffle;
    config.arrivals.shuffle_values = {0, 1, 2, 3, 4};
    config.arrivals.shuffle_segment_epochs = 7;

    Rng env_rng(derive_seed(99, StreamTag::Environment));
    Rng action_rng(derive_seed(99, StreamTag::BaselinePolicy));
    State s = reset(config, env_rng);
    long long arrived = 0, committed = 0, acted = 0, migrated = 0;
    for (int epoch = 0; epoch < 10000; ++epoch) {
        for (int rate : arrival_rates(s, config)) arrived += rate;
        ActionMatrix a = identity_action(2, 4);
        for (int& e : a.entries) e = static_cast<int>(action_rng.uniform_int(1, 2));
        StepOutcome o = step(s, a, config, env_rng);
        for (int c : o.committed_counts) committed += c;
        for (int c : o.acted_counts) acted += c;
        for (int c : o.migrated_counts) migrated += c;
        CHECK(o.migrated_counts[0] <= o.acted_counts[0]);
        CHECK(o.acted_counts[0] <= config.action_budget);
        s = o.next_state;
    }
    long long still_queued = 0;
    for (int d : s.decision_queues) still_queued += d;
    for (int p : s.packing_queues) still_queued += p;
    for (int p : s.pending_inbound) still_queued += p;
    CHECK(arrived == committed + still_queued);
    CHECK(migrated <= acted);
    CHECK(acted > 0);
}

TEST_CASE("phase and epoch advance cyclically") {
    const EnvConfig config = two_cluster_config();
    Rng rng(8);
    State s = reset(config, rng);
    const ActionMatrix keep = identity_action(2, 4);
    for (int i = 0; i < 12; ++i) {
        CHECK(s.phase == i % 4);
        CHECK(s.epoch == i);
        StepOutcome o = step(s, keep, config, rng);
        const bool packed_now = (i % 4) == 3;
        CHECK(o.latency.has_value() == packed_now);
        s = o.next_state;
    }
}
