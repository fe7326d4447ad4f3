#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "raftmig/config.hpp"
#include "raftmig/error.hpp"

using namespace raftmig;

namespace {

std::string code_of(const std::string& text) {
    try {
        load_config_text(text);
    } catch (const Error& e) {
        return e.code() + ": " + e.what();
    }
    return "";
}

} // namespace

TEST_CASE("empty text yields the documented defaults") {
    const ExperimentConfig c = load_config_text("");
    CHECK(c.clusters == 4);
    CHECK(c.followers == std::vector<int>{4});
    CHECK(c.bandwidth_hz == 20e6);
    CHECK(c.tx_power_dbm == 24.0);
    CHECK(c.noise_psd_dbm_hz == -150.0);
    CHECK(c.path_loss_exp == 3.4);
    CHECK(c.shadow_sigma_db == 8.0);
    CHECK(c.hash_cycles == 300.0);
    CHECK(c.tx_size_bits == 4096.0);
    CHECK(c.append_msg_bits == 65536.0);
    CHECK(c.confirm_msg_bits == 2048.0);
    CHECK(c.action_budget == 10);
    CHECK(c.epochs_per_block == 4);
    CHECK(c.base_rate == 6);
    CHECK(c.anomaly_base_rate == 4);
    CHECK(c.anomaly_cluster == 2);
    CHECK(c.m2_values == std::vector<int>{4, 5, 6, 7, 8, 9});
    CHECK(c.hyper.discount == 0.95);
    CHECK(c.hyper.buffer_capacity == 100000);
    CHECK(c.hyper.batch_size == 64);
    CHECK(c.policy == "ddpg");
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(c.output_dir == "out");
    CHECK_FALSE(c.trace);
}

TEST_CASE("key=value parsing handles comments, blanks, and lists") {
    const std::string text =
        "# scenario\n"
        "K = 3\n"
        "V = 2, 5, 3   # ragged clusters\n"
        "\n"
        "eta = 1e9, 2e9, 5e8\n"
        "sigma_shadow=0\n"
        "append_includes_block = true\n"
        "seeds = 7,9\n"
        "m2_sweep = 4, 9\n"
        "policy = static-50\n"
        "optimizer = adam\n";
    const ExperimentConfig c = load_config_text(text);
    CHECK(c.clusters == 3);
    CHECK(c.followers == std::vector<int>{2, 5, 3});
    CHECK(c.cpu_rate_hz == std::vector<double>{1e9, 2e9, 5e8});
    CHECK(c.shadow_sigma_db == 0.0);
    CHECK(c.append_includes_block);
    CHECK(c.seeds == std::vector<std::uint64_t>{7, 9});
    CHECK(c.m2_sweep == std::vector<int>{4, 9});
    CHECK(c.policy == "static-50");
    CHECK(c.hyper.optimizer == OptimizerKind::Adam);
}

TEST_CASE("schedule entries parse as begin:end:rate triples") {
    const ExperimentConfig c = load_config_text("m2_schedule = 0:100:4, 100:250:9\n");
    REQUIRE(c.m2_schedule.size() == 2);
    CHECK(c.m2_schedule[0].begin_epoch == 0);
    CHECK(c.m2_schedule[0].end_epoch == 100);
    CHECK(c.m2_schedule[0].rate == 4);
    CHECK(c.m2_schedule[1].begin_epoch == 100);
    CHECK(c.m2_schedule[1].end_epoch == 250);
    CHECK(c.m2_schedule[1].rate == 9);
}

TEST_CASE("malformed input is rejected with the offending key named") {
    CHECK(code_of("beta = -1\n").find("validation-error") != std::string::npos);
    CHECK(code_of("beta = -1\n").find("beta") != std::string::npos);
    CHECK(code_of("no_such_key = 1\n").find("validation-error") != std::string::npos);
    CHECK(code_of("K = banana\n").find("parse-error") != std::string::npos);
    CHECK(code_of("K 4\n").find("parse-error") != std::string::npos);
    CHECK(code_of("M = 12\n").find("N") != std::string::npos); // budget below peak rate
    CHECK(code_of("m2_sweep = 4, 25\n") != "");
    CHECK(code_of("anomaly_cluster = 9\n") != "");
    CHECK(code_of("batch_size = 200000\n") != ""); // exceeds buffer capacity
    CHECK(code_of("policy = greedy\n") != "");
    CHECK(code_of("m2_schedule = 5:5:4\n") != "");  // empty segment
}

TEST_CASE("serialize and load round-trip exactly") {
    const std::string text =
        "K = 5\nV = 2, 3, 4, 5, 6\nsigma_shadow = 2.25\nd_min = 140\nd_max = 160\n"
        "m2_values = 5, 8\nm2_schedule = 0:60:5, 60:90:8\nlr_actor = 3e-4\n"
        "noise_std = 0.125\nseeds = 11, 13\nappend_includes_block = yes\n"
        "optimizer = adam\nM = 3\nM_anomaly_base = 2\nanomaly_cluster = 5\n"
        "m2_sweep = 5, 8\nN = 12\n";
    const ExperimentConfig a = load_config_text(text);
    const std::string canon = serialize_config(a);
    const ExperimentConfig b = load_config_text(canon);
    CHECK(serialize_config(b) == canon);
    CHECK(b.clusters == 5);
    CHECK(b.followers == std::vector<int>{2, 3, 4, 5, 6});
    CHECK(b.shadow_sigma_db == 2.25);
    CHECK(b.m2_schedule.size() == 2);
    CHECK(b.hyper.lr_actor == 3e-4);
    CHECK(b.hyper.noise_std == 0.125);
    CHECK(b.append_includes_block);
}

TEST_CASE("RAFTMIG_ environment variables override file values") {
    REQUIRE(setenv("RAFTMIG_K", "6", 1) == 0);
    REQUIRE(setenv("RAFTMIG_sigma_shadow", "0", 1) == 0);
    const ExperimentConfig c = load_config_text("K = 2\n");
    CHECK(c.clusters == 6);
    CHECK(c.shadow_sigma_db == 0.0);
    unsetenv("RAFTMIG_K");
    unsetenv("RAFTMIG_sigma_shadow");

    REQUIRE(setenv("RAFTMIG_no_such_key", "1", 1) == 0);
    CHECK(code_of("") != "");
    unsetenv("RAFTMIG_no_such_key");
    CHECK(code_of("") == "");
}

TEST_CASE("policy names round-trip and reject unknowns") {
    for (PolicyKind kind : kAllPolicies) CHECK(policy_from_name(policy_name(kind)) == kind);
    CHECK_THROWS_AS(policy_from_name("optimal"), Error);
}

TEST_CASE("environment construction freezes one topology per seed") {
    ExperimentConfig c = load_config_text("K = 3\nV = 4\nd_min = 100\nd_max = 200\n");
    const EnvConfig e1 = make_env_config(c, 31);
    const EnvConfig e2 = make_env_config(c, 31);
    const EnvConfig e3 = make_env_config(c, 32);

    CHECK(e1.topology.cluster_count == 3);
    CHECK(e1.topology.followers_per_cluster == std::vector<int>{4, 4, 4});
    CHECK(e1.topology.cpu_rate_hz == std::vector<double>{1e9, 1e9, 1e9});
    REQUIRE(e1.topology.leader_follower_distances_m.size() == 3);
    bool any_differs_from_e3 = false;
    for (int k = 0; k < 3; ++k) {
        REQUIRE(e1.topology.leader_follower_distances_m[k].size() == 4);
        for (int v = 0; v < 4; ++v) {
            const double d = e1.topology.leader_follower_distances_m[k][v];
            CHECK(d >= 100.0);
            CHECK(d <= 200.0);
            CHECK(d == e2.topology.leader_follower_distances_m[k][v]);
            if (d != e3.topology.leader_follower_distances_m[k][v]) any_differs_from_e3 = true;
        }
    }
    CHECK(any_differs_from_e3);

    // The anomaly cluster index moves to zero-based form and its quiet-time
    // arrival rate differs from the regular clusters.
    CHECK(e1.arrivals.anomaly_cluster == 1);
    CHECK(e1.arrivals.base_rates == std::vector<int>{6, 4, 6});
}

TEST_CASE("degenerate distance ranges give a homogeneous topology") {
    ExperimentConfig c = load_config_text("d_min = 150\nd_max = 150\n");
    const EnvConfig e = make_env_config(c, 5);
    for (const auto& row : e.topology.leader_follower_distances_m)
        for (double d : row) CHECK(d == 150.0);
}

TEST_CASE("explicit schedules reach the environment's arrival profile") {
    ExperimentConfig c = load_config_text("m2_schedule = 0:40:4, 40:80:9\n");
    const EnvConfig e = make_env_config(c, 1);
    CHECK(e.arrivals.mode == AnomalyMode::Schedule);
    REQUIRE(e.arrivals.schedule.size() == 2);
    CHECK(e.arrivals.schedule[1].rate == 9);
}
