#include "raftmig/baselines.hpp"

#include <cmath>

#include "raftmig/error.hpp"

namespace raftmig {

ActionMatrix non_migration_policy(const State&, const EnvConfig& config) {
    return identity_action(config.topology.cluster_count, config.action_budget);
}

ActionMatrix static_ratio_policy(const State& state, const EnvConfig& config,
                                 const StaticPolicyConfig& policy, Rng& rng) {
    const double f = policy.migrate_fraction;
    if (!(f >= 0.0 && f <= 1.0))
        fail("validation-error", "migrate_fraction must lie in [0, 1]");
    const int k_count = config.topology.cluster_count;
    const int budget = config.action_budget;
    ActionMatrix action = non_migration_policy(state, config);
    if (k_count < 2) return action;
    for (int k = 0; k < k_count; ++k) {
        for (int n = 1; n <= budget; ++n) {
            const bool migrate = std::llround(f * static_cast<double>(n)) >
                                 std::llround(f * static_cast<double>(n - 1));
            if (!migrate) continue;
            const std::int64_t pick = rng.uniform_int(0, k_count - 2);
            const int dest = pick >= k ? static_cast<int>(pick) + 1 : static_cast<int>(pick);
            action.at(k, n - 1) = dest + 1;
        }
    }
    return action;
}

ActionMatrix random_policy(const State& state, const EnvConfig& config, Rng& rng) {
    (void)state;
    const int k_count = config.topology.cluster_count;
    const int budget = config.action_budget;
    ActionMatrix action;
    action.clusters = k_count;
    action.budget = budget;
    action.entries.resize(static_cast<std::size_t>(k_count) * budget);
    for (int k = 0; k < k_count; ++k)
        for (int n = 0; n < budget; ++n)
            action.at(k, n) = static_cast<int>(rng.uniform_int(1, k_count));
    return action;
}

} // namespace raftmig
