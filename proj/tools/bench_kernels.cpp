// Times the serial reference kernels against their OpenMP variants on
// synthetic batches and verifies the results are bit-identical. Usage:
//   bench_kernels [reps] [batch] [candidates]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "raftmig/config.hpp"
#include "raftmig/ddpg.hpp"

using namespace raftmig;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    const auto begin = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - begin).count() / reps;
}

bool same_gradients(const GradientSet& a, const GradientSet& b) {
    if (a.dweights != b.dweights) return false;
    return a.dbiases == b.dbiases;
}

} // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 200;
    const int batch_size = argc > 2 ? std::atoi(argv[2]) : 256;
    const int candidate_count = argc > 3 ? std::atoi(argv[3]) : 512;

    const ExperimentConfig config = load_config_text("");
    const EnvConfig env = make_env_config(config, 1);
    Rng init_rng(derive_seed(1, StreamTag::NetInit));
    AgentState agent = make_agent(env, config.hyper, init_rng);

    Rng data_rng(derive_seed(1, StreamTag::BufferSampling));
    const int action_dim = agent.clusters * agent.action_budget;
    std::vector<Experience> store(static_cast<std::size_t>(batch_size));
    std::vector<const Experience*> batch;
    for (Experience& exp : store) {
        exp.state_vec.resize(static_cast<std::size_t>(agent.state_width));
        exp.next_state_vec.resize(static_cast<std::size_t>(agent.state_width));
        for (double& v : exp.state_vec) v = data_rng.uniform01();
        for (double& v : exp.next_state_vec) v = data_rng.uniform01();
        exp.action_flat.resize(static_cast<std::size_t>(action_dim));
        for (double& v : exp.action_flat)
            v = static_cast<double>(data_rng.uniform_int(1, agent.clusters)) - 0.5;
        exp.reward = -0.01 * data_rng.uniform01();
        batch.push_back(&exp);
    }
    std::vector<std::vector<int>> candidates(static_cast<std::size_t>(candidate_count));
    for (auto& cand : candidates) {
        cand.resize(static_cast<std::size_t>(action_dim));
        for (int& v : cand) v = data_rng.uniform_int(1, agent.clusters);
    }
    std::vector<double> state_vec(static_cast<std::size_t>(agent.state_width));
    for (double& v : state_vec) v = data_rng.uniform01();

    std::vector<SampleSlot> slots;
    GradientSet grad_serial, grad_parallel;
    double scalar_serial = 0.0, scalar_parallel = 0.0;
    std::vector<double> values_serial, values_parallel;

    std::printf("batch %d, candidates %d, %d reps per timing, max threads %d\n\n", batch_size,
                candidate_count, reps, omp_get_max_threads());
    std::printf("%-18s %-8s %10s %10s %9s %s\n", "kernel", "threads", "serial ms", "openmp ms",
                "speedup", "identical");

    const int thread_counts[] = {1, 2, 4};
    for (int threads : thread_counts) {
        omp_set_num_threads(threads);

        const double cs = time_ms(reps, [&] {
            critic_batch_gradient_serial(agent.critic, agent.target_actor, agent.target_critic,
                                         batch, config.hyper.discount, slots, grad_serial,
                                         scalar_serial);
        });
        const double cp = time_ms(reps, [&] {
            critic_batch_gradient_parallel(agent.critic, agent.target_actor, agent.target_critic,
                                           batch, config.hyper.discount, slots, grad_parallel,
                                           scalar_parallel);
        });
        const bool c_same = same_gradients(grad_serial, grad_parallel) &&
                            scalar_serial == scalar_parallel;
        std::printf("%-18s %-8d %10.3f %10.3f %8.2fx %s\n", "critic-gradient", threads, cs, cp,
                    cs / cp, c_same ? "yes" : "NO");

        const double as = time_ms(reps, [&] {
            actor_batch_gradient_serial(agent.actor, agent.critic, batch, slots, grad_serial,
                                        scalar_serial);
        });
        const double ap = time_ms(reps, [&] {
            actor_batch_gradient_parallel(agent.actor, agent.critic, batch, slots, grad_parallel,
                                          scalar_parallel);
        });
        const bool a_same = same_gradients(grad_serial, grad_parallel) &&
                            scalar_serial == scalar_parallel;
        std::printf("%-18s %-8d %10.3f %10.3f %8.2fx %s\n", "actor-gradient", threads, as, ap,
                    as / ap, a_same ? "yes" : "NO");

        const double ss = time_ms(reps, [&] {
            score_candidates_serial(agent.critic, state_vec, candidates, values_serial);
        });
        const double sp = time_ms(reps, [&] {
            score_candidates_parallel(agent.critic, state_vec, candidates, values_parallel);
        });
        const bool s_same = values_serial == values_parallel;
        std::printf("%-18s %-8d %10.3f %10.3f %8.2fx %s\n", "candidate-score", threads, ss, sp,
                    ss / sp, s_same ? "yes" : "NO");

        if (!c_same || !a_same || !s_same) {
            std::fprintf(stderr, "kernel outputs diverged\n");
            return 1;
        }
    }
    return 0;
}
