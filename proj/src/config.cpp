#include "raftmig/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "raftmig/error.hpp"

extern char** environ;

namespace raftmig {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string current;
    for (char c : value) {
        if (c == ',') {
            items.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    const std::string last = trim(current);
    if (!last.empty() || !items.empty()) items.push_back(last);
    if (items.size() == 1 && items[0].empty()) items.clear();
    return items;
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) fail("parse-error", "key '" + key + "': empty value");
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        fail("parse-error", "key '" + key + "': '" + v + "' is not a number");
    return x;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) fail("parse-error", "key '" + key + "': empty value");
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size())
        fail("parse-error", "key '" + key + "': '" + v + "' is not an integer");
    return static_cast<std::int64_t>(x);
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty() || v[0] == '-')
        fail("parse-error", "key '" + key + "': '" + v + "' is not a nonnegative integer");
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size())
        fail("parse-error", "key '" + key + "': '" + v + "' is not an integer");
    return static_cast<std::uint64_t>(x);
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    fail("parse-error", "key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const std::string& item : split_list(value))
        out.push_back(static_cast<int>(parse_int(key, item)));
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& item : split_list(value)) out.push_back(parse_double(key, item));
    return out;
}

std::vector<std::uint64_t> parse_uint_list(const std::string& key, const std::string& value) {
    std::vector<std::uint64_t> out;
    for (const std::string& item : split_list(value)) out.push_back(parse_uint(key, item));
    return out;
}

// Segments are written begin:end:rate, comma-separated.
std::vector<ScheduleSegment> parse_schedule(const std::string& key, const std::string& value) {
    std::vector<ScheduleSegment> out;
    for (const std::string& item : split_list(value)) {
        const std::size_t c1 = item.find(':');
        const std::size_t c2 = item.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            fail("parse-error", "key '" + key + "': segment '" + item + "' is not begin:end:rate");
        ScheduleSegment seg;
        seg.begin_epoch = parse_int(key, item.substr(0, c1));
        seg.end_epoch = parse_int(key, item.substr(c1 + 1, c2 - c1 - 1));
        seg.rate = static_cast<int>(parse_int(key, item.substr(c2 + 1)));
        out.push_back(seg);
    }
    return out;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& items, Fn format) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += format(items[i]);
    }
    return out;
}

OptimizerKind parse_optimizer(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "sgd") return OptimizerKind::Sgd;
    if (v == "adam") return OptimizerKind::Adam;
    fail("validation-error", "key '" + key + "': optimizer must be sgd or adam");
}

// Returns false when the key is unknown.
bool apply_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "K") c.clusters = static_cast<int>(parse_int(key, value));
    else if (key == "V") c.followers = parse_int_list(key, value);
    else if (key == "B") c.bandwidth_hz = parse_double(key, value);
    else if (key == "N0") c.noise_psd_dbm_hz = parse_double(key, value);
    else if (key == "P") c.tx_power_dbm = parse_double(key, value);
    else if (key == "beta") c.path_loss_exp = parse_double(key, value);
    else if (key == "sigma_shadow") c.shadow_sigma_db = parse_double(key, value);
    else if (key == "xi") c.hash_cycles = parse_double(key, value);
    else if (key == "eta") c.cpu_rate_hz = parse_double_list(key, value);
    else if (key == "D") c.tx_size_bits = parse_double(key, value);
    else if (key == "G") c.fiber_rate_bps = parse_double(key, value);
    else if (key == "C") c.append_msg_bits = parse_double(key, value);
    else if (key == "E") c.confirm_msg_bits = parse_double(key, value);
    else if (key == "d_min") c.d_min_m = parse_double(key, value);
    else if (key == "d_max") c.d_max_m = parse_double(key, value);
    else if (key == "append_includes_block") c.append_includes_block = parse_bool(key, value);
    else if (key == "N") c.action_budget = static_cast<int>(parse_int(key, value));
    else if (key == "F") c.epochs_per_block = static_cast<int>(parse_int(key, value));
    else if (key == "delta_tau") c.decision_interval_s = parse_double(key, value);
    else if (key == "queue_norm") c.queue_norm = parse_double(key, value);
    else if (key == "snr_db_offset") c.snr_db_offset = parse_double(key, value);
    else if (key == "snr_db_scale") c.snr_db_scale = parse_double(key, value);
    else if (key == "M") c.base_rate = static_cast<int>(parse_int(key, value));
    else if (key == "M_anomaly_base") c.anomaly_base_rate = static_cast<int>(parse_int(key, value));
    else if (key == "anomaly_cluster") c.anomaly_cluster = static_cast<int>(parse_int(key, value));
    else if (key == "m2_values") c.m2_values = parse_int_list(key, value);
    else if (key == "segment_epochs") c.segment_epochs = parse_int(key, value);
    else if (key == "m2_schedule") c.m2_schedule = parse_schedule(key, value);
    else if (key == "lr_actor") c.hyper.lr_actor = parse_double(key, value);
    else if (key == "lr_critic") c.hyper.lr_critic = parse_double(key, value);
    else if (key == "lambda") c.hyper.discount = parse_double(key, value);
    else if (key == "kappa") c.hyper.ema_kappa = parse_double(key, value);
    else if (key == "buffer_capacity") c.hyper.buffer_capacity = parse_int(key, value);
    else if (key == "batch_size") c.hyper.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "chi") c.hyper.warmup_chi = parse_int(key, value);
    else if (key == "noise_std") c.hyper.noise_std = parse_double(key, value);
    else if (key == "noise_decay") c.hyper.noise_decay = parse_double(key, value);
    else if (key == "noise_floor") c.hyper.noise_floor = parse_double(key, value);
    else if (key == "delta") c.hyper.refine_delta = parse_double(key, value);
    else if (key == "refine_budget") c.hyper.refine_budget = static_cast<int>(parse_int(key, value));
    else if (key == "tau_max") c.hyper.total_epochs = parse_int(key, value);
    else if (key == "eps_clip") c.hyper.eps_clip = parse_double(key, value);
    else if (key == "init_scale") c.hyper.init_scale = parse_double(key, value);
    else if (key == "optimizer") c.hyper.optimizer = parse_optimizer(key, value);
    else if (key == "adam_beta1") c.hyper.adam_beta1 = parse_double(key, value);
    else if (key == "adam_beta2") c.hyper.adam_beta2 = parse_double(key, value);
    else if (key == "adam_eps") c.hyper.adam_eps = parse_double(key, value);
    else if (key == "critic_weight_decay")
        c.hyper.critic_weight_decay = parse_double(key, value);
    else if (key == "threads") c.hyper.threads = static_cast<int>(parse_int(key, value));
    else if (key == "policy") c.policy = trim(value);
    else if (key == "seeds") c.seeds = parse_uint_list(key, value);
    else if (key == "m2_sweep") c.m2_sweep = parse_int_list(key, value);
    else if (key == "eval_episodes") c.eval_episodes = static_cast<int>(parse_int(key, value));
    else if (key == "eval_burnin_blocks")
        c.eval_burnin_blocks = static_cast<int>(parse_int(key, value));
    else if (key == "out_dir") c.output_dir = trim(value);
    else if (key == "trace") c.trace = parse_bool(key, value);
    else return false;
    return true;
}

void apply_text(ExperimentConfig& config, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            fail("parse-error",
                 "line " + std::to_string(line_no) + ": expected key = value, got '" + stripped +
                     "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            fail("parse-error", "line " + std::to_string(line_no) + ": empty key");
        if (!apply_key(config, key, value))
            fail("validation-error", "unknown key '" + key + "'");
    }
}

void apply_env_overrides(ExperimentConfig& config) {
    constexpr const char* kPrefix = "RAFTMIG_";
    for (char** e = environ; e && *e; ++e) {
        const std::string entry = *e;
        if (entry.rfind(kPrefix, 0) != 0) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = entry.substr(std::string(kPrefix).size(), eq - std::string(kPrefix).size());
        // Keys are case-sensitive in the file; the override name is the key
        // verbatim after the prefix (K, beta, lr_actor, ...).
        const std::string value = entry.substr(eq + 1);
        if (!apply_key(config, key, value))
            fail("validation-error", "unknown environment override '" + entry.substr(0, eq) + "'");
    }
}

void check(bool ok, const std::string& key, const std::string& what) {
    if (!ok) fail("validation-error", "key '" + key + "': " + what);
}

} // namespace

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::NonMigration: return "non-migration";
        case PolicyKind::Static30: return "static-30";
        case PolicyKind::Static50: return "static-50";
        case PolicyKind::Random: return "random";
        case PolicyKind::Ddpg: return "ddpg";
    }
    return "ddpg";
}

PolicyKind policy_from_name(const std::string& name) {
    for (PolicyKind kind : kAllPolicies)
        if (name == policy_name(kind)) return kind;
    fail("validation-error", "key 'policy': unknown policy '" + name + "'");
}

ExperimentConfig load_config_text(const std::string& text) {
    ExperimentConfig config;
    apply_text(config, text);
    apply_env_overrides(config);
    validate_config(config);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("parse-error", "cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return load_config_text(text.str());
}

void validate_config(const ExperimentConfig& c) {
    check(c.clusters >= 2, "K", "must be >= 2");
    check(c.followers.size() == 1 || static_cast<int>(c.followers.size()) == c.clusters, "V",
          "must be one value or one per cluster");
    for (int v : c.followers) check(v >= 1, "V", "follower counts must be >= 1");
    check(c.bandwidth_hz > 0.0, "B", "must be positive");
    check(c.path_loss_exp > 0.0, "beta", "must be positive");
    check(c.shadow_sigma_db >= 0.0, "sigma_shadow", "must be nonnegative");
    check(c.hash_cycles >= 0.0, "xi", "must be nonnegative");
    check(c.cpu_rate_hz.size() == 1 || static_cast<int>(c.cpu_rate_hz.size()) == c.clusters,
          "eta", "must be one value or one per cluster");
    for (double r : c.cpu_rate_hz) check(r > 0.0, "eta", "cpu rates must be positive");
    check(c.tx_size_bits > 0.0, "D", "must be positive");
    check(c.fiber_rate_bps > 0.0, "G", "must be positive");
    check(c.append_msg_bits > 0.0, "C", "must be positive");
    check(c.confirm_msg_bits > 0.0, "E", "must be positive");
    check(c.d_min_m > 0.0, "d_min", "must be positive");
    check(c.d_max_m >= c.d_min_m, "d_max", "must be >= d_min");
    check(c.action_budget >= 1, "N", "must be >= 1");
    check(c.epochs_per_block >= 1, "F", "must be >= 1");
    check(c.decision_interval_s > 0.0, "delta_tau", "must be positive");
    check(c.queue_norm >= 0.0, "queue_norm", "must be nonnegative");
    check(c.snr_db_scale > 0.0, "snr_db_scale", "must be positive");
    check(c.base_rate >= 0, "M", "must be nonnegative");
    check(c.anomaly_base_rate >= 0, "M_anomaly_base", "must be nonnegative");
    check(c.anomaly_cluster >= 1 && c.anomaly_cluster <= c.clusters, "anomaly_cluster",
          "must lie in [1, K]");
    check(!c.m2_values.empty(), "m2_values", "must be nonempty");
    int max_rate = std::max(c.base_rate, c.anomaly_base_rate);
    for (int m : c.m2_values) {
        check(m >= 0, "m2_values", "rates must be nonnegative");
        max_rate = std::max(max_rate, m);
    }
    check(c.segment_epochs >= 1, "segment_epochs", "must be >= 1");
    std::int64_t prev_end = -1;
    for (const ScheduleSegment& seg : c.m2_schedule) {
        check(seg.begin_epoch >= 0 && seg.end_epoch > seg.begin_epoch, "m2_schedule",
              "ranges must be nonempty with begin >= 0");
        check(seg.begin_epoch >= prev_end, "m2_schedule", "ranges must be disjoint and ordered");
        check(seg.rate >= 0, "m2_schedule", "rates must be nonnegative");
        prev_end = seg.end_epoch;
        max_rate = std::max(max_rate, seg.rate);
    }
    check(!c.m2_sweep.empty(), "m2_sweep", "must be nonempty");
    for (int m : c.m2_sweep) {
        check(m >= 0, "m2_sweep", "values must be nonnegative");
        max_rate = std::max(max_rate, m);
    }
    check(c.action_budget >= max_rate, "N", "must be >= every configured arrival rate");

    const Hyperparams& h = c.hyper;
    check(h.lr_actor >= 0.0, "lr_actor", "must be nonnegative");
    check(h.lr_critic >= 0.0, "lr_critic", "must be nonnegative");
    check(h.discount >= 0.0 && h.discount < 1.0, "lambda", "must lie in [0, 1)");
    check(h.ema_kappa >= 0.0 && h.ema_kappa <= 1.0, "kappa", "must lie in [0, 1]");
    check(h.buffer_capacity >= 1, "buffer_capacity", "must be >= 1");
    check(h.batch_size >= 1, "batch_size", "must be >= 1");
    check(h.batch_size <= h.buffer_capacity, "batch_size", "must not exceed buffer_capacity");
    check(h.warmup_chi >= h.batch_size, "chi", "must be >= batch_size");
    check(h.noise_std >= 0.0, "noise_std", "must be nonnegative");
    check(h.noise_decay > 0.0 && h.noise_decay <= 1.0, "noise_decay", "must lie in (0, 1]");
    check(h.noise_floor >= 0.0, "noise_floor", "must be nonnegative");
    check(h.refine_delta >= 0.0, "delta", "must be nonnegative");
    check(h.refine_budget >= 1, "refine_budget", "must be >= 1");
    check(h.total_epochs >= 0, "tau_max", "must be nonnegative");
    check(h.eps_clip > 0.0, "eps_clip", "must be positive");
    check(h.init_scale >= 0.0, "init_scale", "must be nonnegative");
    check(h.adam_beta1 >= 0.0 && h.adam_beta1 < 1.0, "adam_beta1", "must lie in [0, 1)");
    check(h.adam_beta2 >= 0.0 && h.adam_beta2 < 1.0, "adam_beta2", "must lie in [0, 1)");
    check(h.adam_eps > 0.0, "adam_eps", "must be positive");
    check(h.critic_weight_decay >= 0.0, "critic_weight_decay", "must be nonnegative");
    check(h.lr_critic * h.critic_weight_decay < 1.0, "critic_weight_decay",
          "decay per update must stay below 1");
    check(h.threads >= 0, "threads", "must be nonnegative");

    policy_from_name(c.policy);
    check(!c.seeds.empty(), "seeds", "must be nonempty");
    check(c.eval_episodes >= 1, "eval_episodes", "must be >= 1");
    check(c.eval_burnin_blocks >= 0, "eval_burnin_blocks", "must be nonnegative");
    check(!c.output_dir.empty(), "out_dir", "must be nonempty");
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream out;
    auto emit = [&](const std::string& key, const std::string& value) {
        out << key << " = " << value << '\n';
    };
    emit("K", std::to_string(c.clusters));
    emit("V", join(c.followers, [](int v) { return std::to_string(v); }));
    emit("B", format_double(c.bandwidth_hz));
    emit("N0", format_double(c.noise_psd_dbm_hz));
    emit("P", format_double(c.tx_power_dbm));
    emit("beta", format_double(c.path_loss_exp));
    emit("sigma_shadow", format_double(c.shadow_sigma_db));
    emit("xi", format_double(c.hash_cycles));
    emit("eta", join(c.cpu_rate_hz, format_double));
    emit("D", format_double(c.tx_size_bits));
    emit("G", format_double(c.fiber_rate_bps));
    emit("C", format_double(c.append_msg_bits));
    emit("E", format_double(c.confirm_msg_bits));
    emit("d_min", format_double(c.d_min_m));
    emit("d_max", format_double(c.d_max_m));
    emit("append_includes_block", c.append_includes_block ? "true" : "false");
    emit("N", std::to_string(c.action_budget));
    emit("F", std::to_string(c.epochs_per_block));
    emit("delta_tau", format_double(c.decision_interval_s));
    emit("queue_norm", format_double(c.queue_norm));
    emit("snr_db_offset", format_double(c.snr_db_offset));
    emit("snr_db_scale", format_double(c.snr_db_scale));
    emit("M", std::to_string(c.base_rate));
    emit("M_anomaly_base", std::to_string(c.anomaly_base_rate));
    emit("anomaly_cluster", std::to_string(c.anomaly_cluster));
    emit("m2_values", join(c.m2_values, [](int v) { return std::to_string(v); }));
    emit("segment_epochs", std::to_string(c.segment_epochs));
    emit("m2_schedule", join(c.m2_schedule, [](const ScheduleSegment& s) {
             return std::to_string(s.begin_epoch) + ":" + std::to_string(s.end_epoch) + ":" +
                    std::to_string(s.rate);
         }));
    emit("lr_actor", format_double(c.hyper.lr_actor));
    emit("lr_critic", format_double(c.hyper.lr_critic));
    emit("lambda", format_double(c.hyper.discount));
    emit("kappa", format_double(c.hyper.ema_kappa));
    emit("buffer_capacity", std::to_string(c.hyper.buffer_capacity));
    emit("batch_size", std::to_string(c.hyper.batch_size));
    emit("chi", std::to_string(c.hyper.warmup_chi));
    emit("noise_std", format_double(c.hyper.noise_std));
    emit("noise_decay", format_double(c.hyper.noise_decay));
    emit("noise_floor", format_double(c.hyper.noise_floor));
    emit("delta", format_double(c.hyper.refine_delta));
    emit("refine_budget", std::to_string(c.hyper.refine_budget));
    emit("tau_max", std::to_string(c.hyper.total_epochs));
    emit("eps_clip", format_double(c.hyper.eps_clip));
    emit("init_scale", format_double(c.hyper.init_scale));
    emit("optimizer", c.hyper.optimizer == OptimizerKind::Adam ? "adam" : "sgd");
    emit("adam_beta1", format_double(c.hyper.adam_beta1));
    emit("adam_beta2", format_double(c.hyper.adam_beta2));
    emit("adam_eps", format_double(c.hyper.adam_eps));
    emit("critic_weight_decay", format_double(c.hyper.critic_weight_decay));
    emit("threads", std::to_string(c.hyper.threads));
    emit("policy", c.policy);
    emit("seeds", join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }));
    emit("m2_sweep", join(c.m2_sweep, [](int v) { return std::to_string(v); }));
    emit("eval_episodes", std::to_string(c.eval_episodes));
    emit("eval_burnin_blocks", std::to_string(c.eval_burnin_blocks));
    emit("out_dir", c.output_dir);
    emit("trace", c.trace ? "true" : "false");
    return out.str();
}

EnvConfig make_env_config(const ExperimentConfig& c, std::uint64_t seed) {
    EnvConfig env;
    env.topology.cluster_count = c.clusters;
    env.topology.followers_per_cluster.resize(static_cast<std::size_t>(c.clusters));
    for (int k = 0; k < c.clusters; ++k)
        env.topology.followers_per_cluster[static_cast<std::size_t>(k)] =
            c.followers.size() == 1 ? c.followers[0] : c.followers[static_cast<std::size_t>(k)];
    env.topology.cpu_rate_hz.resize(static_cast<std::size_t>(c.clusters));
    for (int k = 0; k < c.clusters; ++k)
        env.topology.cpu_rate_hz[static_cast<std::size_t>(k)] =
            c.cpu_rate_hz.size() == 1 ? c.cpu_rate_hz[0] : c.cpu_rate_hz[static_cast<std::size_t>(k)];
    env.topology.fiber_rate_bps = c.fiber_rate_bps;
    env.topology.hash_cycles = c.hash_cycles;
    env.topology.tx_size_bits = c.tx_size_bits;
    env.topology.append_msg_bits = c.append_msg_bits;
    env.topology.confirm_msg_bits = c.confirm_msg_bits;

    // Distances are frozen per seed: quasi-static geometry under a seeded
    // draw, identical across every policy evaluated on the same seed.
    Rng topo_rng(derive_seed(seed, StreamTag::Topology));
    env.topology.leader_follower_distances_m.resize(static_cast<std::size_t>(c.clusters));
    for (int k = 0; k < c.clusters; ++k) {
        const int v_count = env.topology.followers_per_cluster[static_cast<std::size_t>(k)];
        auto& row = env.topology.leader_follower_distances_m[static_cast<std::size_t>(k)];
        row.resize(static_cast<std::size_t>(v_count));
        for (int v = 0; v < v_count; ++v)
            row[static_cast<std::size_t>(v)] =
                c.d_min_m == c.d_max_m
                    ? c.d_min_m
                    : c.d_min_m + (c.d_max_m - c.d_min_m) * topo_rng.uniform01();
    }

    env.channel.bandwidth_hz = c.bandwidth_hz;
    env.channel.tx_power_dbm = c.tx_power_dbm;
    env.channel.noise_psd_dbm_hz = c.noise_psd_dbm_hz;
    env.channel.path_loss_exp = c.path_loss_exp;
    env.channel.shadow_sigma_db = c.shadow_sigma_db;

    env.action_budget = c.action_budget;
    env.epochs_per_block = c.epochs_per_block;
    env.decision_interval_s = c.decision_interval_s;
    env.queue_norm = c.queue_norm;
    env.snr_db_offset = c.snr_db_offset;
    env.snr_db_scale = c.snr_db_scale;
    env.append_includes_block = c.append_includes_block;

    env.arrivals.base_rates.assign(static_cast<std::size_t>(c.clusters), c.base_rate);
    env.arrivals.base_rates[static_cast<std::size_t>(c.anomaly_cluster - 1)] =
        c.anomaly_base_rate;
    env.arrivals.anomaly_cluster = c.anomaly_cluster - 1;
    env.arrivals.mode = AnomalyMode::Schedule;
    env.arrivals.schedule = c.m2_schedule;
    env.arrivals.shuffle_values = c.m2_values;
    env.arrivals.shuffle_segment_epochs = c.segment_epochs;
    return env;
}

} // namespace raftmig
