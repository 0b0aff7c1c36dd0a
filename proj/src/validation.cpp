#include "mec/validation.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "mec/value_function.hpp"

namespace mec {

namespace {

std::vector<double> g_prime_samples(const std::vector<EpisodeResult>& episodes) {
    std::vector<double> out;
    out.reserve(episodes.size());
    for (const auto& e : episodes) {
        out.push_back(e.discounted_g_prime);
    }
    return out;
}

// Conditional mean of Exp(1) on [a, b).
double exp_segment_mean(double a, double b) {
    const double ea = std::exp(-a);
    const double eb = std::isinf(b) ? 0.0 : std::exp(-b);
    const double b_eb = std::isinf(b) ? 0.0 : b * eb;
    return (a * ea - b_eb + ea - eb) / (ea - eb);
}

}  // namespace

ReducedState random_reduced_state(std::mt19937_64& rng, const SystemParams& params,
                                  int max_devices) {
    ReducedState state;
    const int n = std::uniform_int_distribution<int>(0, max_devices)(rng);
    for (int i = 0; i < n; ++i) {
        EdgeDevice dev;
        dev.id = static_cast<DeviceId>(i);
        dev.pathloss = pathloss_at(sample_distance(rng, params), params);
        dev.queue_segments = std::uniform_int_distribution<int>(1, params.d_max)(rng);
        state.devices.push_back(dev);
    }
    return state;
}

int SandwichReport::violations() const {
    int count = 0;
    for (const auto& c : cases) {
        count += (c.below_w_pi ? 0 : 1) + (c.below_baseline ? 0 : 1);
    }
    return count;
}

SandwichReport check_sandwich(const SystemParams& params, int n_states, int n_episodes,
                              int horizon, std::uint64_t seed) {
    const ValueModel model(params);
    const Policy improved(PolicyKind::Improved, params, &model);
    const Policy baseline(PolicyKind::Baseline, params);
    std::mt19937_64 rng(mix_seed(seed, 0x5A4D));

    SandwichReport report;
    for (int s = 0; s < n_states; ++s) {
        SandwichCase c;
        c.state = random_reduced_state(rng, params);
        c.w_pi = w_pi(c.state, model);
        const auto initial = InitialState::from(c.state);
        const auto stream = static_cast<std::uint64_t>(s) + 1;
        const auto imp = g_prime_samples(
            run_episodes(improved, initial, n_episodes, horizon, seed, stream, params));
        const auto base = g_prime_samples(
            run_episodes(baseline, initial, n_episodes, horizon, seed, stream, params));
        std::vector<double> diff(imp.size());
        for (std::size_t i = 0; i < imp.size(); ++i) {
            diff[i] = imp[i] - base[i];
        }
        c.improved = summarize(imp);
        c.baseline = summarize(base);
        c.difference = summarize(diff);
        c.below_w_pi = c.improved.mean <= c.w_pi + c.improved.half_width();
        c.below_baseline = c.difference.mean <= c.difference.half_width();
        report.cases.push_back(std::move(c));
    }
    return report;
}

TinyModel tiny_model() {
    TinyModel m;
    SystemParams& p = m.params;
    p.segment_bits = 1e5;
    p.d_min = 1;
    p.d_max = 3;
    p.arrival_prob = 0.5;
    p.discount = 0.9;
    p.power_weight = 1000.0;
    p.rx_power_w = 3.0 * p.noise_power_w;

    DiscreteLaw fading;
    const double edges[] = {0.0, std::log(4.0 / 3.0), std::log(2.0), std::log(4.0),
                            std::numeric_limits<double>::infinity()};
    for (int i = 0; i < 4; ++i) {
        fading.values.push_back(exp_segment_mean(edges[i], edges[i + 1]));
        fading.probs.push_back(0.25);
    }
    m.channel.fading_atoms = fading;
    m.channel.pathloss_atoms = DiscreteLaw{{1e-10, 4e-10}, {0.5, 0.5}};
    return m;
}

bool OracleReport::passed() const {
    for (const auto& c : cases) {
        if (!c.within_3_sigma) {
            return false;
        }
    }
    return !cases.empty();
}

OracleReport check_oracle(const TinyModel& model, const std::vector<PolicyKind>& policies,
                          int n_episodes, std::uint64_t seed) {
    std::optional<ValueModel> value_model;
    OracleReport report;
    for (PolicyKind kind : policies) {
        if (kind == PolicyKind::Improved && !value_model) {
            value_model.emplace(model.params);
        }
        const Policy policy(kind, model.params, value_model ? &*value_model : nullptr);
        OracleCase c;
        c.policy = kind;
        c.exact = finite_horizon_oracle(policy, InitialState{}, model.horizon, model.params,
                                        model.channel);
        c.monte_carlo = summarize(g_prime_samples(run_episodes(
            policy, InitialState{}, n_episodes, model.horizon, seed, 0, model.params,
            model.channel)));
        c.within_3_sigma =
            std::abs(c.monte_carlo.mean - c.exact.discounted_g_prime) <= 3.0 * c.monte_carlo.std_error;
        report.cases.push_back(c);
    }
    return report;
}

}  // namespace mec
