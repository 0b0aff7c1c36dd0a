#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mec/model.hpp"
#include "mec/value_function.hpp"

namespace mec {

enum class PolicyKind { Baseline, Improved, AllLocal, AllEdge };

std::string_view to_string(PolicyKind kind);

/// Accepts "baseline", "improved", "alc" and "aec".
std::optional<PolicyKind> parse_policy(std::string_view name);

/// FCFS uplink, link-compensating power p_r / rho clipped to p_max, offload
/// only into an empty edge set.
Action baseline_decide(const SystemState& state, const SystemParams& params);

Action all_local_decide(const SystemState& state);

/// Offload every arrival; uplink as in the baseline policy.
Action all_edge_decide(const SystemState& state, const SystemParams& params);

struct PowerLevel {
    int segments = 0;
    double power_w = 0.0;
};

/// Smallest representable power for which segments_transmitted() returns at
/// least `segments`; +inf when the channel gain is zero.
double min_power_for_segments(int segments, double pathloss, double fading_power,
                              const SystemParams& params);

/// Minimal power for each m = 0..Q, dropping levels above p_max.
std::vector<PowerLevel> candidate_powers(const EdgeDevice& device, double fading_power,
                                         const SystemParams& params);

/// g'(S, a) + gamma W_pi(successor), the objective minimized by the improved
/// policy. With current fading known the reduced successor is deterministic.
double lookahead_cost(const SystemState& state, const Action& action, const ValueModel& model);

/// Reduced successor of `state` under `action`.
ReducedState reduced_successor(const SystemState& state, const Action& action,
                               const SystemParams& params);

/// One-step improvement of the baseline policy: minimizes lookahead_cost over
/// offload decision, uplink device and power. Ties prefer local computing,
/// then the lowest device id, then the lowest power.
Action improved_decide(const SystemState& state, const ValueModel& model);

class Policy {
public:
    /// `model` is required for PolicyKind::Improved and must outlive the policy.
    Policy(PolicyKind kind, const SystemParams& params, const ValueModel* model = nullptr);

    PolicyKind kind() const { return kind_; }
    /// False when decide() reads no fading value; the uplink device's fading
    /// is then only needed to advance the state.
    bool reads_fading() const { return kind_ == PolicyKind::Improved; }
    Action decide(const SystemState& state) const;

private:
    PolicyKind kind_;
    SystemParams params_;
    const ValueModel* model_;
};

}  // namespace mec
