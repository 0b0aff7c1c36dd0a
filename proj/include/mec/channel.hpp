#pragma once

// Randomness of the cell: block fading, device arrivals and task parameters,
// plus the expectations over them used by the analytical value function.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "mec/model.hpp"

namespace mec {

// Finite distribution over real values. Used to quantize fading and pathloss
// for the exhaustive finite-horizon oracle.
struct DiscreteLaw {
    std::vector<double> values;
    std::vector<double> probs;

    void validate() const;
    double mean() const;
    double mean_inverse() const;

    template <class Rng>
    double sample(Rng& rng) const {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            acc += probs[i];
            if (u < acc) {
                return values[i];
            }
        }
        return values.back();
    }
};

// Optional overrides of the continuous laws. Empty members mean Exp(1) fading
// and the uniform-annulus spatial law of SystemParams.
struct ChannelModel {
    std::optional<DiscreteLaw> fading_atoms;
    std::optional<DiscreteLaw> pathloss_atoms;
};

/// beta r^-alpha
double pathloss_at(double distance_m, const SystemParams& params);

template <class Rng>
double sample_fading_power(Rng& rng, const ChannelModel& channel = {}) {
    if (channel.fading_atoms) {
        return channel.fading_atoms->sample(rng);
    }
    return std::exponential_distribution<double>(1.0)(rng);
}

/// Radius with density 2r / (R^2 - d0^2) on [d0, R].
template <class Rng>
double sample_distance(Rng& rng, const SystemParams& params) {
    const double r0 = params.min_distance_m * params.min_distance_m;
    const double r1 = params.cell_radius_m * params.cell_radius_m;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return std::sqrt(r0 + u * (r1 - r0));
}

template <class Rng>
std::optional<Arrival> sample_arrival(Rng& rng, DeviceId next_id, const SystemParams& params,
                                      const ChannelModel& channel = {}) {
    if (!std::bernoulli_distribution(params.arrival_prob)(rng)) {
        return std::nullopt;
    }
    Arrival a;
    a.id = next_id;
    a.pathloss = channel.pathloss_atoms ? channel.pathloss_atoms->sample(rng)
                                        : pathloss_at(sample_distance(rng, params), params);
    a.size_segments = std::uniform_int_distribution<int>(params.d_min, params.d_max)(rng);
    a.cpu_hz = params.f_min_hz == params.f_max_hz
                   ? params.f_min_hz
                   : std::uniform_real_distribution<double>(params.f_min_hz, params.f_max_hz)(rng);
    a.cycles_per_bit = params.cycles_per_bit_min == params.cycles_per_bit_max
                           ? params.cycles_per_bit_min
                           : std::uniform_real_distribution<double>(params.cycles_per_bit_min,
                                                                    params.cycles_per_bit_max)(rng);
    return a;
}

// splitmix64 as a UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Stateless 64-bit key mixing: derive independent stream seeds from a
/// master seed and a tuple of counters.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Fading indexed by (device, frame) rather than drawn from a running stream,
// so every policy simulated with the same seed sees the same channel for the
// same device in the same frame.
class FadingField {
public:
    FadingField(std::uint64_t seed, const ChannelModel& channel) : seed_(seed), channel_(&channel) {}

    double operator()(DeviceId id, std::int64_t frame) const {
        SplitMix64 rng(mix_seed(seed_, id, static_cast<std::uint64_t>(frame)));
        return sample_fading_power(rng, *channel_);
    }

private:
    std::uint64_t seed_;
    const ChannelModel* channel_;
};

/// E_h[W log2(1 + p_r |h|^2 / sigma^2)] in bits/s for |h|^2 ~ Exp(1).
double expected_uplink_rate(double rx_power_w, const SystemParams& params);

/// E[1/rho] under the annulus law, i.e. E[r^alpha] / beta.
double expected_inverse_pathloss(const SystemParams& params);

}  // namespace mec
