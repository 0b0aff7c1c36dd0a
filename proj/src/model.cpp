#include "mec/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mec {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(std::string("invalid parameters: ") + what);
    }
}

}  // namespace

int ceil_frames(double x) {
    if (x <= 0.0) {
        return 0;
    }
    return static_cast<int>(std::ceil(x * (1.0 - 1e-12)));
}

void SystemParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    require(positive(frame_duration_s), "frame_duration_s must be > 0");
    require(positive(bandwidth_hz), "bandwidth_hz must be > 0");
    require(positive(segment_bits), "segment_bits must be > 0");
    require(positive(noise_power_w), "noise_power_w must be > 0");
    require(arrival_prob > 0.0 && arrival_prob <= 1.0, "arrival_prob must lie in (0, 1]");
    require(discount > 0.0 && discount < 1.0, "discount must lie in (0, 1)");
    require(std::isfinite(power_weight) && power_weight >= 0.0, "power_weight must be >= 0");
    require(positive(rx_power_w), "rx_power_w must be > 0");
    require(positive(kappa), "kappa must be > 0");
    require(d_min >= 1, "d_min must be >= 1");
    require(d_min <= d_max, "d_min must not exceed d_max");
    require(positive(f_min_hz) && positive(f_max_hz), "cpu frequencies must be > 0");
    require(f_min_hz <= f_max_hz, "f_min_hz must not exceed f_max_hz");
    require(positive(cycles_per_bit_min) && positive(cycles_per_bit_max),
            "cycles_per_bit bounds must be > 0");
    require(cycles_per_bit_min <= cycles_per_bit_max,
            "cycles_per_bit_min must not exceed cycles_per_bit_max");
    require(std::isfinite(pathloss_exponent) && pathloss_exponent >= 0.0,
            "pathloss_exponent must be >= 0");
    require(positive(pathloss_ref_gain), "pathloss_ref_gain must be > 0");
    require(positive(cell_radius_m), "cell_radius_m must be > 0");
    require(positive(min_distance_m), "min_distance_m must be > 0");
    require(min_distance_m < cell_radius_m, "min_distance_m must be below cell_radius_m");
    require(positive(max_tx_power_w), "max_tx_power_w must be > 0");
}

int segments_transmitted(double power_w, double pathloss, double fading_power,
                         const SystemParams& params) {
    const double snr = power_w * pathloss * fading_power / params.noise_power_w;
    if (!(snr > 0.0)) {
        return 0;
    }
    return static_cast<int>(std::floor(std::log2(1.0 + snr) * params.segments_per_spectral_bit()));
}

int local_completion_frames(double size_segments, double cpu_hz, double cycles_per_bit,
                            const SystemParams& params) {
    return ceil_frames(size_segments * params.segment_bits * cycles_per_bit /
                       (cpu_hz * params.frame_duration_s));
}

double local_power_w(double cpu_hz, const SystemParams& params) {
    return params.kappa * cpu_hz * cpu_hz * cpu_hz;
}

double discounted_local_cost(int size_segments, double cpu_hz, double cycles_per_bit,
                             const SystemParams& params) {
    const double g = params.discount;
    const int frames = local_completion_frames(size_segments, cpu_hz, cycles_per_bit, params);
    const double per_frame = 1.0 + params.power_weight * local_power_w(cpu_hz, params);
    return per_frame * g * (1.0 - std::pow(g, frames)) / (1.0 - g);
}

double discounted_local_cost(const Arrival& arrival, const SystemParams& params) {
    return discounted_local_cost(arrival.size_segments, arrival.cpu_hz, arrival.cycles_per_bit,
                                 params);
}

double stage_cost(const SystemState& state, const Action& action, const SystemParams& params) {
    double power = action.tx_power_w;
    for (const auto& dev : state.local) {
        power += local_power_w(dev.cpu_hz, params);
    }
    return static_cast<double>(state.edge.size() + state.local.size()) +
           params.power_weight * power;
}

double reduced_stage_cost(const SystemState& state, const Action& action,
                          const SystemParams& params) {
    double cost = static_cast<double>(state.edge.size()) + params.power_weight * action.tx_power_w;
    if (state.arrival && !action.offload) {
        cost += discounted_local_cost(*state.arrival, params);
    }
    return cost;
}

void check_action(const SystemState& state, const Action& action, const SystemParams& params) {
    if (!(action.tx_power_w >= 0.0) || action.tx_power_w > params.max_tx_power_w) {
        throw std::invalid_argument("action: transmit power outside [0, p_max]");
    }
    if (!action.uplink_device) {
        if (action.tx_power_w != 0.0) {
            throw std::invalid_argument("action: nonzero power without an uplink device");
        }
        return;
    }
    const auto it = std::find_if(state.edge.begin(), state.edge.end(), [&](const EdgeDevice& d) {
        return d.id == *action.uplink_device;
    });
    if (it == state.edge.end()) {
        throw std::invalid_argument("action: uplink device " +
                                    std::to_string(*action.uplink_device) +
                                    " is not an edge device");
    }
}

LocalDevice make_local_device(const Arrival& arrival, const SystemParams& params) {
    LocalDevice dev;
    dev.id = arrival.id;
    dev.queue_segments = arrival.size_segments;
    dev.cpu_hz = arrival.cpu_hz;
    dev.cycles_per_bit = arrival.cycles_per_bit;
    dev.frames_remaining = local_completion_frames(arrival.size_segments, arrival.cpu_hz,
                                                   arrival.cycles_per_bit, params);
    return dev;
}

void advance_in_place(SystemState& state, const Action& action,
                      std::optional<Arrival> next_arrival, const SystemParams& params) {
    check_action(state, action, params);
    if (state.fading.size() != state.edge.size()) {
        throw std::invalid_argument("state: fading does not match the edge device set");
    }

    if (action.uplink_device) {
        for (std::size_t i = 0; i < state.edge.size(); ++i) {
            auto& dev = state.edge[i];
            if (dev.id == *action.uplink_device) {
                const int sent =
                    segments_transmitted(action.tx_power_w, dev.pathloss, state.fading[i], params);
                dev.queue_segments = std::max(0, dev.queue_segments - sent);
                break;
            }
        }
    }
    std::erase_if(state.edge, [](const EdgeDevice& d) { return d.queue_segments <= 0; });

    for (auto& dev : state.local) {
        const double drained =
            dev.cpu_hz * params.frame_duration_s / (dev.cycles_per_bit * params.segment_bits);
        dev.queue_segments = std::max(0.0, dev.queue_segments - drained);
        dev.frames_remaining -= 1;
        if (dev.frames_remaining <= 0) {
            dev.queue_segments = 0.0;
        }
    }
    std::erase_if(state.local, [](const LocalDevice& d) { return d.frames_remaining <= 0; });

    if (state.arrival) {
        const Arrival& a = *state.arrival;
        if (action.offload) {
            state.edge.push_back(EdgeDevice{a.id, a.pathloss, a.size_segments});
        } else {
            state.local.push_back(make_local_device(a, params));
        }
    }

    state.frame += 1;
    state.arrival = std::move(next_arrival);
    state.fading.assign(state.edge.size(), 0.0);
}

std::size_t successor_edge_count(const SystemState& state, const Action& action,
                                 const SystemParams& params) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < state.edge.size(); ++i) {
        const auto& dev = state.edge[i];
        int q = dev.queue_segments;
        if (action.uplink_device && *action.uplink_device == dev.id) {
            q -= segments_transmitted(action.tx_power_w, dev.pathloss, state.fading.at(i), params);
        }
        count += q > 0 ? 1 : 0;
    }
    if (state.arrival && action.offload) {
        ++count;
    }
    return count;
}

SystemState advance(const SystemState& state, const Action& action,
                    std::span<const double> next_fading, std::optional<Arrival> next_arrival,
                    const SystemParams& params) {
    SystemState next = state;
    advance_in_place(next, action, std::move(next_arrival), params);
    if (next_fading.size() != next.edge.size()) {
        throw std::invalid_argument("advance: expected " + std::to_string(next.edge.size()) +
                                    " fading values, got " + std::to_string(next_fading.size()));
    }
    std::copy(next_fading.begin(), next_fading.end(), next.fading.begin());
    return next;
}

ReducedState reduce(const SystemState& state) {
    return ReducedState{state.edge};
}

}  // namespace mec
