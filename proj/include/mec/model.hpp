#pragma once

// Domain types and the deterministic per-frame kernel of the MEC cell:
// uplink segment counts, local computing time and power, stage costs and
// the state transition.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mec {

using DeviceId = std::uint64_t;

// -104 dBm
inline constexpr double kDefaultNoisePowerW = 3.981071705534972e-14;

struct SystemParams {
    double frame_duration_s = 0.01;
    double bandwidth_hz = 10e6;
    double segment_bits = 1e4;
    double noise_power_w = kDefaultNoisePowerW;
    double arrival_prob = 0.2;
    double discount = 0.99;
    double power_weight = 1.0;
    double rx_power_w = 8e-14;
    double kappa = 1e-28;
    int d_min = 200;
    int d_max = 300;
    double f_min_hz = 1e9;
    double f_max_hz = 1e9;
    double cycles_per_bit_min = 500.0;
    double cycles_per_bit_max = 500.0;
    double pathloss_exponent = 3.0;
    double pathloss_ref_gain = 1e-3;
    double cell_radius_m = 5000.0;
    double min_distance_m = 1.0;
    double max_tx_power_w = 10.0;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    /// Segments carried per frame per bit/s/Hz of spectral efficiency (W*T_s/b_s).
    double segments_per_spectral_bit() const {
        return bandwidth_hz * frame_duration_s / segment_bits;
    }
};

struct EdgeDevice {
    DeviceId id = 0;
    double pathloss = 0.0;
    int queue_segments = 0;

    friend bool operator==(const EdgeDevice&, const EdgeDevice&) = default;
};

struct LocalDevice {
    DeviceId id = 0;
    double queue_segments = 0.0;
    double cpu_hz = 0.0;
    double cycles_per_bit = 0.0;
    int frames_remaining = 0;

    friend bool operator==(const LocalDevice&, const LocalDevice&) = default;
};

struct Arrival {
    DeviceId id = 0;
    double pathloss = 0.0;
    int size_segments = 0;
    double cpu_hz = 0.0;
    double cycles_per_bit = 0.0;

    friend bool operator==(const Arrival&, const Arrival&) = default;
};

// Full per-frame state. `fading[i]` is the exponential power gain |h|^2 of
// `edge[i]`; both are ordered by ascending id, which is arrival order.
struct SystemState {
    std::int64_t frame = 1;
    std::vector<EdgeDevice> edge;
    std::vector<double> fading;
    std::vector<LocalDevice> local;
    std::optional<Arrival> arrival;

    friend bool operator==(const SystemState&, const SystemState&) = default;
};

// Edge devices without fading; the argument of the value function.
struct ReducedState {
    std::vector<EdgeDevice> devices;

    friend bool operator==(const ReducedState&, const ReducedState&) = default;
};

struct Action {
    std::optional<DeviceId> uplink_device;
    double tx_power_w = 0.0;
    bool offload = false;

    friend bool operator==(const Action&, const Action&) = default;
};

/// ceil(x) for frame counts, absorbing representation error when x is an
/// exact integer; 0 for x <= 0.
int ceil_frames(double x);

/// floor(W log2(1 + p rho |h|^2 / sigma^2) T_s / b_s).
int segments_transmitted(double power_w, double pathloss, double fading_power,
                         const SystemParams& params);

/// ceil(d b_s L / (f T_s)); `size_segments` may be a fractional queue.
int local_completion_frames(double size_segments, double cpu_hz, double cycles_per_bit,
                            const SystemParams& params);

/// kappa f^3
double local_power_w(double cpu_hz, const SystemParams& params);

/// Discounted cost of computing a task locally, charged at admission:
/// sum_{tau=1}^{T_loc} gamma^tau (1 + w kappa f^3).
double discounted_local_cost(int size_segments, double cpu_hz, double cycles_per_bit,
                             const SystemParams& params);

double discounted_local_cost(const Arrival& arrival, const SystemParams& params);

/// |U_E| + |U_L| + w (p + sum kappa f_k^3), devices present at frame start.
double stage_cost(const SystemState& state, const Action& action, const SystemParams& params);

/// |U_E| + w p + I_N (1 - e) C(n_t).
double reduced_stage_cost(const SystemState& state, const Action& action,
                          const SystemParams& params);

/// Throws std::invalid_argument if the action is not admissible in `state`.
void check_action(const SystemState& state, const Action& action, const SystemParams& params);

/// In-place transition. The arrival of the current frame joins the edge or
/// local set according to `action.offload`; `next_arrival` becomes the new
/// frame's arrival. On return `state.fading` has one zeroed slot per
/// surviving edge device, to be filled by the caller.
void advance_in_place(SystemState& state, const Action& action,
                      std::optional<Arrival> next_arrival, const SystemParams& params);

/// Pure transition. `next_fading` must hold one value per edge device of the
/// successor, in ascending id order.
SystemState advance(const SystemState& state, const Action& action,
                    std::span<const double> next_fading, std::optional<Arrival> next_arrival,
                    const SystemParams& params);

/// Number of edge devices in the successor state, for sizing `next_fading`.
std::size_t successor_edge_count(const SystemState& state, const Action& action,
                                 const SystemParams& params);

ReducedState reduce(const SystemState& state);

LocalDevice make_local_device(const Arrival& arrival, const SystemParams& params);

}  // namespace mec
