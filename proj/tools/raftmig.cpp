// Command line front end: train agents, evaluate policies over the anomaly
// sweep, and render plots, all driven by one key=value config file plus a few
// override flags. Exit code 0 on success; failures print one JSON error line
// on stderr.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raftmig/config.hpp"
#include "raftmig/error.hpp"
#include "raftmig/harness.hpp"

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
            out.push_back(c);
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(cur.c_str(), &end, 10);
        if (end != cur.c_str() + cur.size())
            raftmig::fail("parse-error", "--seed: '" + cur + "' is not an integer");
        seeds.push_back(v);
        cur.clear();
    };
    for (char c : text) {
        if (c == ',')
            flush();
        else if (!std::isspace(static_cast<unsigned char>(c)))
            cur.push_back(c);
    }
    flush();
    if (seeds.empty()) raftmig::fail("parse-error", "--seed: empty list");
    return seeds;
}

struct Options {
    std::string config_path;
    std::string seed_list;
    std::string out_dir;
    std::string policy;
    std::string checkpoint;
    bool trace = false;
};

raftmig::ExperimentConfig resolve_config(const Options& opt) {
    raftmig::ExperimentConfig config = opt.config_path.empty()
                                           ? raftmig::load_config_text("")
                                           : raftmig::load_config(opt.config_path);
    if (!opt.seed_list.empty()) config.seeds = parse_seed_list(opt.seed_list);
    if (!opt.out_dir.empty()) config.output_dir = opt.out_dir;
    if (!opt.policy.empty()) config.policy = opt.policy;
    if (opt.trace) config.trace = true;
    raftmig::validate_config(config);
    return config;
}

void add_common_flags(CLI::App* cmd, Options& opt, bool with_policy, bool with_checkpoint) {
    cmd->add_option("--config", opt.config_path, "key=value config file (defaults when omitted)");
    cmd->add_option("--seed", opt.seed_list, "comma-separated seed list override");
    cmd->add_option("--out", opt.out_dir, "output directory override");
    if (with_policy)
        cmd->add_option("--policy", opt.policy,
                        "non-migration | static-30 | static-50 | random | ddpg");
    if (with_checkpoint)
        cmd->add_option("--checkpoint", opt.checkpoint,
                        "checkpoint file used for every seed (default: per-seed file in --out)");
    cmd->add_flag("--trace", opt.trace, "write per-cell JSONL latency traces");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Deterministic cluster-migration simulator: RAFT-style commit latency over wireless "
        "edge clusters, learned and baseline migration policies, seeded experiment harness."};
    app.require_subcommand(1);
    Options opt;

    CLI::App* cmd_train =
        app.add_subcommand("train", "train one agent per seed; writes CSVs and checkpoints");
    add_common_flags(cmd_train, opt, false, false);

    CLI::App* cmd_eval =
        app.add_subcommand("eval", "evaluate the chosen policy over seeds x anomaly rates");
    add_common_flags(cmd_eval, opt, true, true);

    CLI::App* cmd_plot = app.add_subcommand("plot", "render SVG charts and the summary table");
    cmd_plot->add_option("--config", opt.config_path, "config file supplying the metrics dir");
    cmd_plot->add_option("--out", opt.out_dir, "metrics directory (default: config out_dir)");

    CLI::App* cmd_all =
        app.add_subcommand("all", "train, evaluate every policy, and render plots");
    add_common_flags(cmd_all, opt, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_train->parsed()) {
            raftmig::ExperimentConfig config = resolve_config(opt);
            config.policy = "ddpg";
            raftmig::run_training(config);
        } else if (cmd_eval->parsed()) {
            const raftmig::ExperimentConfig config = resolve_config(opt);
            raftmig::run_evaluation(config, opt.checkpoint);
        } else if (cmd_plot->parsed()) {
            std::string dir = opt.out_dir;
            if (dir.empty())
                dir = (opt.config_path.empty() ? raftmig::load_config_text("")
                                               : raftmig::load_config(opt.config_path))
                          .output_dir;
            raftmig::emit_plots(dir);
        } else if (cmd_all->parsed()) {
            raftmig::run_all(resolve_config(opt));
        }
    } catch (const raftmig::Error& e) {
        std::fprintf(stderr, "{\"error\":\"%s\",\"message\":\"%s\"}\n", e.code().c_str(),
                     json_escape(e.what()).c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\"error\":\"internal-error\",\"message\":\"%s\"}\n",
                     json_escape(e.what()).c_str());
        return 2;
    }
    return 0;
}
