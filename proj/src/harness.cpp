#include "raftmig/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "raftmig/baselines.hpp"
#include "raftmig/error.hpp"

namespace fs = std::filesystem;

namespace raftmig {

namespace {

constexpr const char* kEvalHeader =
    "policy,seed,m2,mean_max_latency_s,std_max_latency_s,leader,migration_ratio";

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path part = path;
    part += ".part";
    {
        std::ofstream out(part, std::ios::binary);
        if (!out) fail("io-error", "cannot open '" + part.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(part, ec);
            fail("io-error", "write to '" + part.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(part, path, ec);
    if (ec) {
        fs::remove(part, ec);
        fail("io-error", "cannot move '" + part.string() + "' into place");
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail("io-error", "cannot create directory '" + dir.string() + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        fail("parse-error", where + ": '" + s + "' is not a number");
    return x;
}

std::int64_t to_int(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        fail("parse-error", where + ": '" + s + "' is not an integer");
    return x;
}

int policy_order(const std::string& name) {
    for (std::size_t i = 0; i < std::size(kAllPolicies); ++i)
        if (name == policy_name(kAllPolicies[i])) return static_cast<int>(i);
    fail("parse-error", "unknown policy name '" + name + "' in evaluation file");
}

struct EvalRow {
    std::string policy;
    std::uint64_t seed = 0;
    int m2 = 0;
    double mean = 0.0;
    double stddev = 0.0;
    int leader = 0;
    double ratio = 0.0;
};

std::vector<EvalRow> read_eval_rows(const fs::path& dir) {
    std::vector<fs::path> files;
    if (fs::exists(dir))
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("eval_", 0) == 0 && name.size() > 4 &&
                name.compare(name.size() - 4, 4, ".csv") == 0)
                files.push_back(entry.path());
        }
    std::sort(files.begin(), files.end());
    std::vector<EvalRow> rows;
    for (const fs::path& file : files) {
        std::ifstream in(file);
        if (!in) fail("io-error", "cannot read '" + file.string() + "'");
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (first) {
                first = false;
                if (line != kEvalHeader)
                    fail("parse-error", file.string() + ": unexpected header '" + line + "'");
                continue;
            }
            const std::vector<std::string> f = split(line, ',');
            if (f.size() != 7) fail("parse-error", file.string() + ": malformed row '" + line + "'");
            EvalRow row;
            row.policy = f[0];
            row.seed = static_cast<std::uint64_t>(to_int(f[1], file.string()));
            row.m2 = static_cast<int>(to_int(f[2], file.string()));
            row.mean = to_double(f[3], file.string());
            row.stddev = to_double(f[4], file.string());
            row.leader = static_cast<int>(to_int(f[5], file.string()));
            row.ratio = to_double(f[6], file.string());
            rows.push_back(row);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
        const int pa = policy_order(a.policy), pb = policy_order(b.policy);
        if (pa != pb) return pa < pb;
        if (a.seed != b.seed) return a.seed < b.seed;
        if (a.m2 != b.m2) return a.m2 < b.m2;
        return a.leader < b.leader;
    });
    return rows;
}

void write_evaluation_merge(const fs::path& dir) {
    const std::vector<EvalRow> rows = read_eval_rows(dir);
    std::string out = std::string(kEvalHeader) + "\n";
    for (const EvalRow& r : rows)
        out += r.policy + "," + std::to_string(r.seed) + "," + std::to_string(r.m2) + "," +
               format_g17(r.mean) + "," + format_g17(r.stddev) + "," + std::to_string(r.leader) +
               "," + format_g17(r.ratio) + "\n";
    write_file_atomic(dir / "evaluation.csv", out);
}

// ---------------------------------------------------------------------------
// Minimal SVG line charts. The CSV files are the authoritative outputs; these
// exist so a run can be eyeballed without extra tooling.

struct Series {
    std::string label;
    std::vector<double> xs, ys;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void render_panel(std::ostringstream& out, double x0, double y0, double w, double h,
                  const std::string& title, const std::string& xlabel, const std::string& ylabel,
                  const std::vector<Series>& series) {
    const double px = x0 + 70.0, py = y0 + 34.0;
    const double pw = w - 92.0, ph = h - 84.0;
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool any = false;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (!any) {
                xmin = xmax = s.xs[i];
                ymin = ymax = s.ys[i];
                any = true;
            } else {
                xmin = std::min(xmin, s.xs[i]);
                xmax = std::max(xmax, s.xs[i]);
                ymin = std::min(ymin, s.ys[i]);
                ymax = std::max(ymax, s.ys[i]);
            }
        }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto X = [&](double x) { return px + (x - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double y) { return py + ph - (y - ymin) / (ymax - ymin) * ph; };

    out << "<text x=\"" << svg_num(x0 + w / 2) << "\" y=\"" << svg_num(y0 + 18)
        << "\" text-anchor=\"middle\" font-size=\"15\" font-weight=\"bold\">" << title
        << "</text>\n";
    out << "<rect x=\"" << svg_num(px) << "\" y=\"" << svg_num(py) << "\" width=\"" << svg_num(pw)
        << "\" height=\"" << svg_num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double gx = X(fx), gy = Y(fy);
        out << "<line x1=\"" << svg_num(gx) << "\" y1=\"" << svg_num(py) << "\" x2=\"" << svg_num(gx)
            << "\" y2=\"" << svg_num(py + ph) << "\" stroke=\"#ddd\"/>\n";
        out << "<line x1=\"" << svg_num(px) << "\" y1=\"" << svg_num(gy) << "\" x2=\""
            << svg_num(px + pw) << "\" y2=\"" << svg_num(gy) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << svg_num(gx) << "\" y=\"" << svg_num(py + ph + 16)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(fx) << "</text>\n";
        out << "<text x=\"" << svg_num(px - 6) << "\" y=\"" << svg_num(gy + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(fy) << "</text>\n";
    }
    out << "<text x=\"" << svg_num(px + pw / 2) << "\" y=\"" << svg_num(y0 + h - 10)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    out << "<text x=\"" << svg_num(x0 + 16) << "\" y=\"" << svg_num(py + ph / 2)
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << svg_num(x0 + 16)
        << " " << svg_num(py + ph / 2) << ")\">" << ylabel << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        if (s.xs.empty()) continue;
        const char* color = kPalette[si % std::size(kPalette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i)
            out << svg_num(X(s.xs[i])) << "," << svg_num(Y(s.ys[i])) << " ";
        out << "\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double ly = py + 14 + 15.0 * static_cast<double>(si);
        const double lx = px + pw - 150;
        const char* color = kPalette[si % std::size(kPalette)];
        out << "<line x1=\"" << svg_num(lx) << "\" y1=\"" << svg_num(ly - 4) << "\" x2=\""
            << svg_num(lx + 22) << "\" y2=\"" << svg_num(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << svg_num(lx + 28) << "\" y=\"" << svg_num(ly)
            << "\" font-size=\"11\">" << series[si].label << "</text>\n";
    }
}

void write_chart(const fs::path& path, double width, double height, const std::string& body) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body << "</svg>\n";
    write_file_atomic(path, out.str());
}

Series downsample(const std::string& label, const std::vector<double>& xs,
                  const std::vector<double>& ys, std::size_t max_points) {
    Series s;
    s.label = label;
    if (xs.empty()) return s;
    const std::size_t window = (xs.size() + max_points - 1) / max_points;
    for (std::size_t begin = 0; begin < xs.size(); begin += window) {
        const std::size_t end = std::min(xs.size(), begin + window);
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            sx += xs[i];
            sy += ys[i];
        }
        const double n = static_cast<double>(end - begin);
        s.xs.push_back(sx / n);
        s.ys.push_back(sy / n);
    }
    return s;
}

// ---------------------------------------------------------------------------

struct TrainFile {
    std::uint64_t seed = 0;
    std::vector<MetricRow> rows;
};

std::vector<TrainFile> read_train_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (fs::exists(dir))
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("train_seed", 0) == 0 && name.size() > 4 &&
                name.compare(name.size() - 4, 4, ".csv") == 0)
                files.push_back(entry.path());
        }
    std::sort(files.begin(), files.end());
    std::vector<TrainFile> out;
    for (const fs::path& file : files) {
        TrainFile tf;
        const std::string stem = file.filename().string();
        tf.seed = static_cast<std::uint64_t>(
            to_int(stem.substr(10, stem.size() - 14), file.string()));
        std::ifstream in(file);
        if (!in) fail("io-error", "cannot read '" + file.string() + "'");
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (first) {
                first = false;
                continue;
            }
            const std::vector<std::string> f = split(line, ',');
            if (f.size() != 5) fail("parse-error", file.string() + ": malformed row '" + line + "'");
            MetricRow row;
            row.epoch = to_int(f[0], file.string());
            row.actor_loss = to_double(f[1], file.string());
            row.critic_loss = to_double(f[2], file.string());
            row.reward = to_double(f[3], file.string());
            row.noise_std = to_double(f[4], file.string());
            tf.rows.push_back(row);
        }
        out.push_back(std::move(tf));
    }
    return out;
}

ActionMatrix policy_action(PolicyKind policy, const State& state, const EnvConfig& env,
                           const ExperimentConfig& config, const AgentNets* nets, Rng& policy_rng,
                           Rng& refine_rng) {
    switch (policy) {
        case PolicyKind::NonMigration:
            return non_migration_policy(state, env);
        case PolicyKind::Static30:
            return static_ratio_policy(state, env, StaticPolicyConfig{0.3}, policy_rng);
        case PolicyKind::Static50:
            return static_ratio_policy(state, env, StaticPolicyConfig{0.5}, policy_rng);
        case PolicyKind::Random:
            return random_policy(state, env, policy_rng);
        case PolicyKind::Ddpg: {
            const std::vector<double> state_vec = encode_state(state, env);
            const std::vector<double> cont = actor_action(nets->actor, state_vec);
            const double delta = effective_refine_delta(config.hyper, env.topology.cluster_count,
                                                        env.action_budget);
            return refine_action(cont, state_vec, nets->critic, env.topology.cluster_count,
                                 env.action_budget, delta, config.hyper.refine_budget, refine_rng,
                                 config.hyper.threads != 1);
        }
    }
    fail("validation-error", "unknown policy kind");
}

std::string cell_file_name(const EvalCell& cell) {
    return std::string("eval_") + policy_name(cell.policy) + "_seed" + std::to_string(cell.seed) +
           "_m2" + std::to_string(cell.m2) + ".csv";
}

std::string cell_csv(const CellResult& result) {
    std::string out = std::string(kEvalHeader) + "\n";
    for (std::size_t k = 0; k < result.migration_ratios.size(); ++k)
        out += std::string(policy_name(result.cell.policy)) + "," +
               std::to_string(result.cell.seed) + "," + std::to_string(result.cell.m2) + "," +
               format_g17(result.mean_max_latency_s) + "," +
               format_g17(result.std_max_latency_s) + "," + std::to_string(k + 1) + "," +
               format_g17(result.migration_ratios[k]) + "\n";
    return out;
}

} // namespace

std::string training_metrics_csv(const std::vector<MetricRow>& metrics) {
    std::string out = "epoch,actor_loss,critic_loss,reward,noise_std\n";
    char buf[160];
    for (const MetricRow& m : metrics) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(m.epoch), m.actor_loss, m.critic_loss, m.reward,
                      m.noise_std);
        out += buf;
    }
    return out;
}

void run_training(const ExperimentConfig& config) {
    if (policy_from_name(config.policy) != PolicyKind::Ddpg)
        fail("validation-error", "run_training requires policy = ddpg, got '" + config.policy + "'");
    const fs::path out_dir = config.output_dir;
    ensure_dir(out_dir);
    for (std::uint64_t seed : config.seeds) {
        EnvConfig env = make_env_config(config, seed);
        // Training covers all load levels by reshuffling the anomaly rate
        // unless the config pins an explicit schedule.
        if (env.arrivals.schedule.empty()) env.arrivals.mode = AnomalyMode::Shuffle;
        const fs::path csv_path = out_dir / ("train_seed" + std::to_string(seed) + ".csv");
        const fs::path ckpt_path = out_dir / ("checkpoint_seed" + std::to_string(seed) + ".txt");
        fs::path ckpt_part = ckpt_path;
        ckpt_part += ".part";
        try {
            TrainResult result = train(env, config.hyper, seed);
            write_file_atomic(csv_path, training_metrics_csv(result.metrics));
            save_checkpoint(ckpt_part.string(), result.agent);
            std::error_code ec;
            fs::rename(ckpt_part, ckpt_path, ec);
            if (ec) fail("io-error", "cannot move '" + ckpt_part.string() + "' into place");
        } catch (...) {
            std::error_code ec;
            fs::remove(ckpt_part, ec);
            fs::path csv_part = csv_path;
            csv_part += ".part";
            fs::remove(csv_part, ec);
            throw;
        }
    }
}

CellResult evaluate_cell(const ExperimentConfig& config, const EvalCell& cell,
                         const AgentNets* nets) {
    if (cell.policy == PolicyKind::Ddpg && nets == nullptr)
        fail("missing-checkpoint", "ddpg evaluation needs trained networks");
    apply_thread_count(config.hyper);
    EnvConfig env = make_env_config(config, cell.seed);
    env.arrivals.mode = AnomalyMode::Fixed;
    env.arrivals.fixed_rate = cell.m2;
    validate_env_config(env);

    // Each cell owns its streams; the salt separates (policy, m2) cells of the
    // same seed.
    const std::uint64_t salt =
        static_cast<std::uint64_t>(cell.m2) * 100 + static_cast<std::uint64_t>(cell.policy);
    Rng env_rng(derive_seed(cell.seed, StreamTag::Evaluation, salt));
    Rng policy_rng(derive_seed(cell.seed, StreamTag::BaselinePolicy, salt));
    Rng refine_rng(derive_seed(cell.seed, StreamTag::Refinement, salt));

    State state = reset(env, env_rng);
    const std::int64_t burn_epochs =
        static_cast<std::int64_t>(env.epochs_per_block) * config.eval_burnin_blocks;
    for (std::int64_t t = 0; t < burn_epochs; ++t) {
        const ActionMatrix action =
            policy_action(cell.policy, state, env, config, nets, policy_rng, refine_rng);
        state = step(state, action, env, env_rng).next_state;
    }

    const int clusters = env.topology.cluster_count;
    std::vector<std::int64_t> acted(static_cast<std::size_t>(clusters), 0);
    std::vector<std::int64_t> migrated(static_cast<std::size_t>(clusters), 0);
    double sum = 0.0, sumsq = 0.0;
    std::int64_t observations = 0;
    std::ostringstream trace;
    const std::int64_t measure_epochs =
        static_cast<std::int64_t>(env.epochs_per_block) * config.eval_episodes;
    for (std::int64_t t = 0; t < measure_epochs; ++t) {
        const ActionMatrix action =
            policy_action(cell.policy, state, env, config, nets, policy_rng, refine_rng);
        StepOutcome outcome = step(state, action, env, env_rng);
        for (int k = 0; k < clusters; ++k) {
            acted[static_cast<std::size_t>(k)] += outcome.acted_counts[static_cast<std::size_t>(k)];
            migrated[static_cast<std::size_t>(k)] +=
                outcome.migrated_counts[static_cast<std::size_t>(k)];
        }
        if (outcome.latency) {
            const double x = outcome.latency->system_max_s;
            sum += x;
            sumsq += x * x;
            ++observations;
            if (config.trace) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "{\"epoch\":%lld,\"max_latency_s\":%.17g}\n",
                              static_cast<long long>(state.epoch), x);
                trace << buf;
            }
        }
        state = std::move(outcome.next_state);
    }

    CellResult result;
    result.cell = cell;
    const double n = static_cast<double>(std::max<std::int64_t>(observations, 1));
    result.mean_max_latency_s = sum / n;
    result.std_max_latency_s =
        std::sqrt(std::max(0.0, sumsq / n - result.mean_max_latency_s * result.mean_max_latency_s));
    result.migration_ratios.resize(static_cast<std::size_t>(clusters), 0.0);
    for (int k = 0; k < clusters; ++k)
        if (acted[static_cast<std::size_t>(k)] > 0)
            result.migration_ratios[static_cast<std::size_t>(k)] =
                static_cast<double>(migrated[static_cast<std::size_t>(k)]) /
                static_cast<double>(acted[static_cast<std::size_t>(k)]);
    if (config.trace) {
        const fs::path path = fs::path(config.output_dir) /
                              (std::string("trace_") + policy_name(cell.policy) + "_seed" +
                               std::to_string(cell.seed) + "_m2" + std::to_string(cell.m2) +
                               ".jsonl");
        ensure_dir(config.output_dir);
        write_file_atomic(path, trace.str());
    }
    return result;
}

std::vector<CellResult> run_evaluation(const ExperimentConfig& config,
                                       const std::string& checkpoint_override) {
    const PolicyKind policy = policy_from_name(config.policy);
    const fs::path out_dir = config.output_dir;
    ensure_dir(out_dir);

    std::map<std::uint64_t, AgentNets> nets_by_seed;
    if (policy == PolicyKind::Ddpg) {
        for (std::uint64_t seed : config.seeds) {
            const std::string path =
                !checkpoint_override.empty()
                    ? checkpoint_override
                    : (out_dir / ("checkpoint_seed" + std::to_string(seed) + ".txt")).string();
            nets_by_seed.emplace(seed, load_checkpoint(path));
        }
    }

    std::vector<CellResult> results;
    for (std::uint64_t seed : config.seeds)
        for (int m2 : config.m2_sweep) {
            const EvalCell cell{policy, seed, m2};
            const AgentNets* nets =
                policy == PolicyKind::Ddpg ? &nets_by_seed.at(seed) : nullptr;
            CellResult result = evaluate_cell(config, cell, nets);
            write_file_atomic(out_dir / cell_file_name(cell), cell_csv(result));
            results.push_back(std::move(result));
        }
    write_evaluation_merge(out_dir);
    return results;
}

void emit_plots(const std::string& metrics_dir) {
    const fs::path dir = metrics_dir;
    const std::vector<TrainFile> train_files = read_train_files(dir);
    const std::vector<EvalRow> eval_rows = read_eval_rows(dir);
    if (train_files.empty() && eval_rows.empty())
        fail("missing-metrics", "no train_seed*.csv or eval_*.csv files in '" + metrics_dir + "'");

    if (!train_files.empty()) {
        std::vector<Series> actor, critic;
        for (const TrainFile& tf : train_files) {
            std::vector<double> xs, ay, cxs, cy;
            for (const MetricRow& row : tf.rows) {
                if (row.actor_loss == 0.0 && row.critic_loss == 0.0) continue; // warmup rows
                xs.push_back(static_cast<double>(row.epoch));
                ay.push_back(row.actor_loss);
                if (row.critic_loss > 0.0) {
                    cxs.push_back(static_cast<double>(row.epoch));
                    cy.push_back(std::log10(row.critic_loss));
                }
            }
            const std::string label = "seed " + std::to_string(tf.seed);
            actor.push_back(downsample(label, xs, ay, 300));
            critic.push_back(downsample(label, cxs, cy, 300));
        }
        std::ostringstream body;
        render_panel(body, 0, 0, 860, 380, "Actor objective (batch mean critic value)", "epoch",
                     "mean Q", actor);
        render_panel(body, 0, 380, 860, 380, "Critic loss", "epoch", "log10 MSE", critic);
        write_chart(dir / "convergence.svg", 860, 760, body.str());
    }

    if (!eval_rows.empty()) {
        // One record per cell: the latency columns repeat across leader rows.
        std::map<std::string, std::map<int, std::pair<double, int>>> latency; // policy -> m2 -> (sum, n)
        std::map<int, std::map<int, std::pair<double, int>>> ratios;          // leader -> m2 -> (sum, n)
        for (const EvalRow& row : eval_rows) {
            if (row.leader == 1) {
                auto& cell = latency[row.policy][row.m2];
                cell.first += row.mean;
                cell.second += 1;
            }
            if (row.policy == policy_name(PolicyKind::Ddpg)) {
                auto& cell = ratios[row.leader][row.m2];
                cell.first += row.ratio;
                cell.second += 1;
            }
        }

        std::vector<Series> latency_series;
        for (PolicyKind kind : kAllPolicies) {
            const auto it = latency.find(policy_name(kind));
            if (it == latency.end()) continue;
            Series s;
            s.label = policy_name(kind);
            for (const auto& [m2, acc] : it->second) {
                s.xs.push_back(m2);
                s.ys.push_back(acc.first / acc.second * 1e3);
            }
            latency_series.push_back(std::move(s));
        }
        std::ostringstream body;
        render_panel(body, 0, 0, 860, 480, "Mean max block latency vs anomaly load", "anomaly rate m2",
                     "latency [ms]", latency_series);
        write_chart(dir / "latency_vs_m2.svg", 860, 480, body.str());

        if (!ratios.empty()) {
            std::vector<Series> ratio_series;
            for (const auto& [leader, by_m2] : ratios) {
                Series s;
                s.label = "leader " + std::to_string(leader);
                for (const auto& [m2, acc] : by_m2) {
                    s.xs.push_back(m2);
                    s.ys.push_back(acc.first / acc.second);
                }
                ratio_series.push_back(std::move(s));
            }
            std::ostringstream rbody;
            render_panel(rbody, 0, 0, 860, 480, "Migration ratio per leader vs anomaly load",
                         "anomaly rate m2", "migrated / acted", ratio_series);
            write_chart(dir / "migration_ratio_vs_m2.svg", 860, 480, rbody.str());
        }

        std::ostringstream summary;
        summary << "mean max block latency by policy and anomaly load (seconds, averaged over"
                   " seeds)\n";
        std::vector<int> m2_values;
        for (const auto& [policy, by_m2] : latency)
            for (const auto& [m2, acc] : by_m2)
                if (std::find(m2_values.begin(), m2_values.end(), m2) == m2_values.end())
                    m2_values.push_back(m2);
        std::sort(m2_values.begin(), m2_values.end());
        const std::string ddpg_name = policy_name(PolicyKind::Ddpg);
        for (int m2 : m2_values) {
            summary << "\nm2 = " << m2 << "\n";
            for (PolicyKind kind : kAllPolicies) {
                const auto it = latency.find(policy_name(kind));
                if (it == latency.end()) continue;
                const auto jt = it->second.find(m2);
                if (jt == it->second.end()) continue;
                char buf[64];
                std::snprintf(buf, sizeof buf, "  %-15s %.6e\n", policy_name(kind),
                              jt->second.first / jt->second.second);
                summary << buf;
            }
            const auto ddpg_it = latency.find(ddpg_name);
            if (ddpg_it == latency.end()) continue;
            const auto ddpg_jt = ddpg_it->second.find(m2);
            if (ddpg_jt == ddpg_it->second.end()) continue;
            const double ddpg_mean = ddpg_jt->second.first / ddpg_jt->second.second;
            for (PolicyKind kind : kAllPolicies) {
                if (kind == PolicyKind::Ddpg) continue;
                const auto it = latency.find(policy_name(kind));
                if (it == latency.end()) continue;
                const auto jt = it->second.find(m2);
                if (jt == it->second.end()) continue;
                const double base = jt->second.first / jt->second.second;
                char buf[96];
                std::snprintf(buf, sizeof buf, "  improvement of ddpg vs %-15s %+.1f %%\n",
                              (std::string(policy_name(kind)) + ":").c_str(),
                              (base - ddpg_mean) / base * 100.0);
                summary << buf;
            }
        }
        write_file_atomic(dir / "summary.txt", summary.str());
    }
}

void run_all(const ExperimentConfig& config) {
    ExperimentConfig train_config = config;
    train_config.policy = policy_name(PolicyKind::Ddpg);
    run_training(train_config);
    for (PolicyKind kind : kAllPolicies) {
        ExperimentConfig eval_config = config;
        eval_config.policy = policy_name(kind);
        run_evaluation(eval_config);
    }
    emit_plots(config.output_dir);
}

} // namespace raftmig
