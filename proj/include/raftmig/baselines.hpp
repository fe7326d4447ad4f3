#pragma once

#include "raftmig/env.hpp"
#include "raftmig/rng.hpp"

namespace raftmig {

struct StaticPolicyConfig {
    double migrate_fraction = 0.0; // destinations are uniform over other clusters
};

// All destinations local.
ActionMatrix non_migration_policy(const State& state, const EnvConfig& config);

// Entry n of a row migrates exactly when round(f*n) exceeds round(f*(n-1)), so
// any acted prefix of length c contains exactly round(f*c) migrations;
// destinations are uniform over the other clusters.
ActionMatrix static_ratio_policy(const State& state, const EnvConfig& config,
                                 const StaticPolicyConfig& policy, Rng& rng);

// Every entry i.i.d. uniform over {1..K}.
ActionMatrix random_policy(const State& state, const EnvConfig& config, Rng& rng);

} // namespace raftmig
