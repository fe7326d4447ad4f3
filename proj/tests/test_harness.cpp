#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "raftmig/config.hpp"
#include "raftmig/error.hpp"
#include "raftmig/harness.hpp"

using namespace raftmig;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("harness_test_tmp") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small but complete training scenario: two clusters, short horizon.
ExperimentConfig tiny_train_config(const std::string& out_dir) {
    ExperimentConfig c = load_config_text(
        "K = 2\nV = 2\nN = 6\nM = 4\nM_anomaly_base = 3\nanomaly_cluster = 2\n"
        "m2_values = 3, 6\nm2_sweep = 3, 6\nsegment_epochs = 16\nsigma_shadow = 2\n"
        "d_min = 150\nd_max = 150\n"
        "tau_max = 300\nchi = 48\nbatch_size = 16\nbuffer_capacity = 512\n"
        "refine_budget = 8\nseeds = 1, 2\neval_episodes = 4\neval_burnin_blocks = 2\n");
    c.output_dir = out_dir;
    return c;
}

} // namespace

TEST_CASE("training metrics serialize with a fixed header and full precision") {
    std::vector<MetricRow> rows(2);
    rows[0].epoch = 0;
    rows[1].epoch = 1;
    rows[1].actor_loss = -0.125;
    rows[1].critic_loss = 0.5;
    rows[1].reward = -1.0 / 3.0;
    rows[1].noise_std = 0.25;
    const std::string csv = training_metrics_csv(rows);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "epoch,actor_loss,critic_loss,reward,noise_std");
    REQUIRE(std::getline(in, line));
    CHECK(line == "0,0,0,0,0");
    REQUIRE(std::getline(in, line));
    CHECK(line == "1,-0.125,0.5,-0.33333333333333331,0.25");
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("training writes one metrics file and one checkpoint per seed") {
    const fs::path dir = fresh_dir("train_layout");
    ExperimentConfig c = tiny_train_config(dir.string());
    run_training(c);
    for (const char* name : {"train_seed1.csv", "train_seed2.csv", "checkpoint_seed1.txt",
                             "checkpoint_seed2.txt"}) {
        CHECK(fs::exists(dir / name));
    }
    const std::string csv = slurp(dir / "train_seed1.csv");
    CHECK(csv.rfind("epoch,actor_loss,critic_loss,reward,noise_std\n", 0) == 0);
    // 300 epochs -> 300 data lines plus the header.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 301);
}

TEST_CASE("training rejects non-learning policies") {
    ExperimentConfig c = tiny_train_config(fresh_dir("train_reject").string());
    c.policy = "random";
    CHECK_THROWS_WITH_AS(run_training(c), doctest::Contains("ddpg"), Error);
}

TEST_CASE("a rerun of training reproduces every output byte for byte") {
    const fs::path dir_a = fresh_dir("train_rerun_a");
    const fs::path dir_b = fresh_dir("train_rerun_b");
    ExperimentConfig c = tiny_train_config(dir_a.string());
    run_training(c);
    c.output_dir = dir_b.string();
    run_training(c);
    for (const char* name : {"train_seed1.csv", "train_seed2.csv", "checkpoint_seed1.txt",
                             "checkpoint_seed2.txt"}) {
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }
}

TEST_CASE("baseline evaluation writes per-cell files plus a sorted merge") {
    const fs::path dir = fresh_dir("eval_layout");
    ExperimentConfig c = tiny_train_config(dir.string());
    c.policy = "non-migration";
    c.seeds = {1};
    c.m2_sweep = {3, 6};
    const std::vector<CellResult> results = run_evaluation(c);
    REQUIRE(results.size() == 2);
    CHECK(fs::exists(dir / "eval_non-migration_seed1_m23.csv"));
    CHECK(fs::exists(dir / "eval_non-migration_seed1_m26.csv"));
    CHECK(fs::exists(dir / "evaluation.csv"));

    for (const CellResult& r : results) {
        CHECK(r.mean_max_latency_s > 0.0);
        REQUIRE(r.migration_ratios.size() == 2);
        for (double ratio : r.migration_ratios) CHECK(ratio == 0.0);
    }

    const std::string merged = slurp(dir / "evaluation.csv");
    std::istringstream in(merged);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "policy,seed,m2,mean_max_latency_s,std_max_latency_s,leader,migration_ratio");
    int data_lines = 0;
    std::vector<int> m2_col;
    while (std::getline(in, line)) {
        ++data_lines;
        CHECK(line.rfind("non-migration,1,", 0) == 0);
        m2_col.push_back(line[16] - '0');
    }
    CHECK(data_lines == 4); // 2 cells x 2 leaders
    CHECK(std::is_sorted(m2_col.begin(), m2_col.end()));
}

TEST_CASE("the random baseline migrates about three quarters of acted entries when K=4") {
    const fs::path dir = fresh_dir("eval_random");
    ExperimentConfig c = load_config_text(
        "sigma_shadow = 2\nd_min = 150\nd_max = 150\n"
        "seeds = 1\nm2_sweep = 9\neval_episodes = 60\neval_burnin_blocks = 2\n");
    c.output_dir = dir.string();
    c.policy = "random";
    const std::vector<CellResult> results = run_evaluation(c);
    REQUIRE(results.size() == 1);
    REQUIRE(results[0].migration_ratios.size() == 4);
    for (double ratio : results[0].migration_ratios)
        CHECK(ratio == doctest::Approx(0.75).epsilon(0.08));
}

TEST_CASE("cell evaluation is deterministic and honors the trace flag") {
    const fs::path dir = fresh_dir("eval_cell");
    ExperimentConfig c = tiny_train_config(dir.string());
    c.policy = "static-50";
    c.trace = true;
    const EvalCell cell{PolicyKind::Static50, 1, 6};
    const CellResult a = evaluate_cell(c, cell, nullptr);
    const CellResult b = evaluate_cell(c, cell, nullptr);
    CHECK(a.mean_max_latency_s == b.mean_max_latency_s);
    CHECK(a.std_max_latency_s == b.std_max_latency_s);
    CHECK(a.migration_ratios == b.migration_ratios);
    CHECK(a.std_max_latency_s >= 0.0);
    const fs::path trace_path = dir / "trace_static-50_seed1_m26.jsonl";
    REQUIRE(fs::exists(trace_path));
    const std::string trace = slurp(trace_path);
    CHECK(trace.find("\"epoch\":") != std::string::npos);
    CHECK(trace.find("\"max_latency_s\":") != std::string::npos);
}

TEST_CASE("agent evaluation without a checkpoint fails cleanly") {
    const fs::path dir = fresh_dir("eval_missing_ckpt");
    ExperimentConfig c = tiny_train_config(dir.string());
    c.policy = "ddpg";
    c.seeds = {1};
    c.m2_sweep = {6};
    CHECK_THROWS_AS(run_evaluation(c), Error);
    try {
        run_evaluation(c);
    } catch (const Error& e) {
        CHECK(e.code() == "missing-checkpoint");
    }
}

TEST_CASE("plots require metrics and then render charts plus a summary") {
    const fs::path empty = fresh_dir("plots_empty");
    CHECK_THROWS_AS(emit_plots(empty.string()), Error);

    const fs::path dir = fresh_dir("plots_full");
    ExperimentConfig c = tiny_train_config(dir.string());
    run_training(c);
    for (const char* policy : {"non-migration", "static-50", "ddpg"}) {
        ExperimentConfig ec = c;
        ec.policy = policy;
        ec.m2_sweep = {3, 6};
        run_evaluation(ec);
    }
    emit_plots(dir.string());
    CHECK(fs::exists(dir / "convergence.svg"));
    CHECK(fs::exists(dir / "latency_vs_m2.svg"));
    CHECK(fs::exists(dir / "migration_ratio_vs_m2.svg"));
    REQUIRE(fs::exists(dir / "summary.txt"));
    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.find("improvement of ddpg vs non-migration") != std::string::npos);
    const std::string latency_svg = slurp(dir / "latency_vs_m2.svg");
    CHECK(latency_svg.find("<svg") != std::string::npos);
    CHECK(latency_svg.find("ddpg") != std::string::npos);
}

TEST_CASE("training-only directories still produce the convergence chart") {
    const fs::path dir = fresh_dir("plots_train_only");
    ExperimentConfig c = tiny_train_config(dir.string());
    c.seeds = {1};
    run_training(c);
    emit_plots(dir.string());
    CHECK(fs::exists(dir / "convergence.svg"));
    CHECK_FALSE(fs::exists(dir / "latency_vs_m2.svg"));
    CHECK_FALSE(fs::exists(dir / "summary.txt"));
}
