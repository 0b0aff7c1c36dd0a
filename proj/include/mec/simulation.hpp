#pragma once

// Seeded Monte Carlo engine for the MEC cell.
//
// Seed splitting: episode i of a run with master seed s uses
// mix_seed(s, stream, i), where `stream` is 1 + the grid index in a sweep and 0
// otherwise. Within an episode, arrivals come from a std::mt19937_64 seeded
// with mix_seed(episode_seed, kArrivalStream) and fading from a FadingField
// keyed on mix_seed(episode_seed, kFadingStream). All policies evaluated with
// the same master seed therefore see identical arrivals and identical fading
// per (device, frame). Results never depend on the number of worker threads.

#include <cstdint>
#include <optional>
#include <vector>

#include "mec/channel.hpp"
#include "mec/model.hpp"
#include "mec/policies.hpp"
#include "mec/value_function.hpp"

namespace mec {

inline constexpr std::uint64_t kArrivalStream = 0xA771;
inline constexpr std::uint64_t kFadingStream = 0xFAD1;

struct EpisodeResult {
    double discounted_g = 0.0;
    double discounted_g_prime = 0.0;
    double undiscounted_cost = 0.0;
    std::int64_t tasks_arrived = 0;
    std::int64_t tasks_offloaded = 0;
    std::int64_t tasks_completed = 0;
    std::int64_t frames_run = 0;
    // Discounted cost (to frame 1) that local devices present at the start
    // and at the end of the horizon incur outside it.
    double initial_local_cost = 0.0;
    double local_backlog_cost = 0.0;
    double max_stage_cost = 0.0;
};

struct InitialState {
    std::vector<EdgeDevice> edge;
    std::vector<LocalDevice> local;

    static InitialState from(const ReducedState& reduced) { return InitialState{reduced.devices, {}}; }
};

/// Smallest T with gamma^T < 1e-6.
int auto_horizon(double discount);

/// Number of worker threads used by the batch estimators; 0 means hardware concurrency.
void set_worker_threads(unsigned count);

EpisodeResult run_episode(const Policy& policy, const InitialState& initial, int horizon_frames,
                          std::uint64_t seed, const SystemParams& params,
                          const ChannelModel& channel = {});

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;

    double half_width(double z = 1.959963984540054) const { return z * std_error; }
};

/// Sample mean and standard error of an i.i.d. sample (n >= 2).
Estimate summarize(const std::vector<double>& samples);

/// sum(numer) / sum(denom) with a delta-method standard error; nullopt when
/// the denominator total is zero.
std::optional<Estimate> ratio_estimate(const std::vector<double>& numer,
                                       const std::vector<double>& denom);

std::vector<EpisodeResult> run_episodes(const Policy& policy, const InitialState& initial,
                                        int n_episodes, int horizon, std::uint64_t seed,
                                        std::uint64_t stream, const SystemParams& params,
                                        const ChannelModel& channel = {});

/// Discounted g' from `initial` over independent seeded episodes.
Estimate estimate_value(const Policy& policy, const ReducedState& initial, int n_episodes,
                        int horizon, std::uint64_t seed, const SystemParams& params,
                        const ChannelModel& channel = {});

struct PolicyStats {
    PolicyKind policy = PolicyKind::Baseline;
    // Undiscounted cost over the horizon per completed task.
    std::optional<Estimate> per_device_cost;
    // Offloaded tasks over arrived tasks.
    std::optional<Estimate> edge_ratio;
    Estimate discounted_g;
    std::vector<EpisodeResult> episodes;  // filled only on request
};

struct SweepRow {
    double arrival_prob = 0.0;
    std::vector<PolicyStats> policies;

    const PolicyStats& stats(PolicyKind kind) const;
};

PolicyStats summarize_policy(PolicyKind kind, const std::vector<EpisodeResult>& episodes,
                             bool keep_episodes);

std::vector<SweepRow> sweep_arrival_rate(const std::vector<double>& arrival_grid,
                                         const std::vector<PolicyKind>& policies, int n_episodes,
                                         int horizon, std::uint64_t seed,
                                         const SystemParams& params, bool keep_episodes = false);

struct OracleValue {
    double discounted_g_prime = 0.0;
    double discounted_g = 0.0;
    double local_backlog_cost = 0.0;
    std::int64_t nodes = 0;
};

inline constexpr std::int64_t kOracleNodeBudget = 10'000'000;

/// Exact expectation over the outcome tree of a quantized model: at most 4
/// fading atoms, at most 2 pathloss atoms, d_max <= 3, point-valued CPU
/// parameters and horizon <= 4. Throws std::invalid_argument otherwise, and
/// std::length_error if the tree exceeds kOracleNodeBudget nodes.
OracleValue finite_horizon_oracle(const Policy& policy, const InitialState& initial, int horizon,
                                  const SystemParams& params, const ChannelModel& channel);

}  // namespace mec
