#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raftmig/config.hpp"
#include "raftmig/ddpg.hpp"

namespace raftmig {

struct EvalCell {
    PolicyKind policy = PolicyKind::NonMigration;
    std::uint64_t seed = 0;
    int m2 = 0;
};

struct CellResult {
    EvalCell cell;
    double mean_max_latency_s = 0.0; // over per-packing-epoch system maxima
    double std_max_latency_s = 0.0;  // population standard deviation
    std::vector<double> migration_ratios; // per leader: migrated / acted
};

// Training CSV body for one seed (header line included, %.17g floats).
std::string training_metrics_csv(const std::vector<MetricRow>& metrics);

// Trains the configured agent once per seed and writes
// <out>/train_seed<seed>.csv and <out>/checkpoint_seed<seed>.txt. Files are
// staged as .part and renamed on completion; a failed cell's partial file is
// removed before the error propagates. Requires policy = ddpg.
void run_training(const ExperimentConfig& config);

// One frozen-policy evaluation cell: burn-in of F*eval_burnin_blocks epochs,
// then eval_episodes block intervals measured. `nets` supplies the trained
// networks for the ddpg policy (no exploration noise; refinement applied) and
// must be null for baselines. Deterministic per (policy, seed, m2).
CellResult evaluate_cell(const ExperimentConfig& config, const EvalCell& cell,
                         const AgentNets* nets);

// Evaluates the configured policy over seeds x m2_sweep, writing one
// eval_<policy>_seed<seed>_m2<m2>.csv per cell, then rebuilds
// <out>/evaluation.csv by merging every per-cell file present in the output
// directory (sorted by policy, seed, m2, leader). For ddpg the checkpoint is
// read from checkpoint_override when nonempty, else from
// <out>/checkpoint_seed<seed>.txt.
std::vector<CellResult> run_evaluation(const ExperimentConfig& config,
                                       const std::string& checkpoint_override = "");

// Renders convergence.svg (per-seed actor/critic loss curves),
// latency_vs_m2.svg (mean max-latency per policy), and
// migration_ratio_vs_m2.svg (per-leader ratios of the ddpg policy) from the
// metrics files in `metrics_dir`, plus summary.txt with the percentage
// improvement (baseline - ddpg)/baseline per baseline and m2. Each file is
// emitted only when its inputs exist; a directory with no metrics at all is
// an error.
void emit_plots(const std::string& metrics_dir);

// train (ddpg) + evaluate every policy + plots, all into config.output_dir.
void run_all(const ExperimentConfig& config);

} // namespace raftmig
