#pragma once

// Statistical checks shared by the `validate` subcommand and the acceptance
// suite: the policy-improvement sandwich on random reduced states, and Monte
// Carlo against the exhaustive oracle on a quantized model.

#include <cstdint>
#include <random>
#include <vector>

#include "mec/channel.hpp"
#include "mec/model.hpp"
#include "mec/policies.hpp"
#include "mec/simulation.hpp"

namespace mec {

/// Uniform device count in [0, max_devices], queues uniform in [1, d_max],
/// pathloss from the spatial law, ids 0, 1, ...
ReducedState random_reduced_state(std::mt19937_64& rng, const SystemParams& params,
                                  int max_devices = 5);

struct SandwichCase {
    ReducedState state;
    double w_pi = 0.0;
    Estimate improved;
    Estimate baseline;
    // improved minus baseline, per shared-seed episode
    Estimate difference;
    bool below_w_pi = false;
    bool below_baseline = false;
};

struct SandwichReport {
    std::vector<SandwichCase> cases;

    int violations() const;
};

/// For each state: improved <= w_pi + its CI half-width, and the paired
/// difference improved - baseline <= its CI half-width.
SandwichReport check_sandwich(const SystemParams& params, int n_states, int n_episodes,
                              int horizon, std::uint64_t seed);

struct TinyModel {
    SystemParams params;
    ChannelModel channel;
    int horizon = 3;
};

/// d in [1, 3], one segment per spectral bit, Exp(1) fading quantized to its
/// quartile means, two pathloss atoms, point CPU parameters.
TinyModel tiny_model();

struct OracleCase {
    PolicyKind policy = PolicyKind::Baseline;
    OracleValue exact;
    Estimate monte_carlo;
    bool within_3_sigma = false;
};

struct OracleReport {
    std::vector<OracleCase> cases;

    bool passed() const;
};

OracleReport check_oracle(const TinyModel& model, const std::vector<PolicyKind>& policies,
                          int n_episodes, std::uint64_t seed);

}  // namespace mec
