#pragma once

#include <cmath>
#include <random>

#include "mec/channel.hpp"
#include "mec/model.hpp"

namespace mec::testing {

// Random valid parameters spanning a few decades of SNR and a range of task
// sizes, discount factors and weights.
inline SystemParams random_params(std::mt19937_64& rng, double max_discount = 0.99) {
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto uint = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
    SystemParams p;
    p.arrival_prob = uni(0.01, 1.0);
    p.discount = uni(0.5, max_discount);
    p.power_weight = uni(0.0, 5.0);
    p.rx_power_w = p.noise_power_w * std::pow(10.0, uni(-1.0, 2.0));
    p.d_min = uint(1, 200);
    p.d_max = p.d_min + uint(0, 150);
    p.f_min_hz = uni(0.5e9, 1.5e9);
    p.f_max_hz = p.f_min_hz * uni(1.0, 2.0);
    p.cycles_per_bit_min = uni(200.0, 600.0);
    p.cycles_per_bit_max = p.cycles_per_bit_min * uni(1.0, 1.5);
    p.pathloss_exponent = uni(2.0, 4.0);
    p.cell_radius_m = uni(100.0, 2000.0);
    return p;
}


// Up to `max_devices` edge devices with queues in [1, d_max], fresh fading,
// and an arrival with probability P_N.
inline SystemState random_state(std::mt19937_64& rng, const SystemParams& params,
                                int max_devices = 5) {
    SystemState s;
    const int n = std::uniform_int_distribution<int>(0, max_devices)(rng);
    DeviceId id = std::uniform_int_distribution<DeviceId>(0, 3)(rng);
    for (int i = 0; i < n; ++i) {
        EdgeDevice dev;
        dev.id = id;
        id += std::uniform_int_distribution<DeviceId>(1, 3)(rng);
        dev.pathloss = pathloss_at(sample_distance(rng, params), params);
        dev.queue_segments = std::uniform_int_distribution<int>(1, params.d_max)(rng);
        s.edge.push_back(dev);
        s.fading.push_back(sample_fading_power(rng));
    }
    s.arrival = sample_arrival(rng, id, params);
    return s;
}

}  // namespace mec::testing
