#include "mec/value_function.hpp"

#include "mec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mec {

namespace {

// Pr(at least m segments in one frame) at receive power p_r with Exp(1) fading.
double prob_at_least(int m, const SystemParams& params) {
    if (m <= 0) {
        return 1.0;
    }
    const double snr_needed =
        std::expm1(m / params.segments_per_spectral_bit() * std::numbers::ln2);
    return std::exp(-snr_needed * params.noise_power_w / params.rx_power_w);
}

// Antiderivatives of h(f) = 1 + c f^3 and of f h(f).
double h_integral(double f, double c) { return f + c * f * f * f * f / 4.0; }
double fh_integral(double f, double c) { return f * f / 2.0 + c * f * f * f * f * f / 5.0; }

// Integral over [a, b] of h(f) * (L_hi - max(L_lo, k f))^+ for slope k >= 0.
double wedge_integral(double a, double b, double k, double l_lo, double l_hi, double c) {
    double total = 0.0;
    if (k <= 0.0) {
        return (l_hi - l_lo) * (h_integral(b, c) - h_integral(a, c));
    }
    const double f1 = l_lo / k;  // below: full length
    const double f2 = l_hi / k;  // above: zero length
    const double full_end = std::clamp(f1, a, b);
    total += (l_hi - l_lo) * (h_integral(full_end, c) - h_integral(a, c));
    const double lin_begin = std::clamp(f1, a, b);
    const double lin_end = std::clamp(f2, a, b);
    if (lin_end > lin_begin) {
        total += l_hi * (h_integral(lin_end, c) - h_integral(lin_begin, c)) -
                 k * (fh_integral(lin_end, c) - fh_integral(lin_begin, c));
    }
    return total;
}

// E_{f,L}[(1 + w kappa f^3) * sum_{tau=1}^{T(d,f,L)} gamma^tau] for one task size.
double expected_cost_for_size(int d, const SystemParams& params) {
    const bool f_point = params.f_min_hz == params.f_max_hz;
    const bool l_point = params.cycles_per_bit_min == params.cycles_per_bit_max;
    if (f_point && l_point) {
        return discounted_local_cost(d, params.f_min_hz, params.cycles_per_bit_min, params);
    }

    const double c = params.power_weight * params.kappa;
    const double gamma = params.discount;
    const double f_lo = params.f_min_hz;
    const double f_hi = params.f_max_hz;
    const double l_lo = params.cycles_per_bit_min;
    const double l_hi = params.cycles_per_bit_max;
    // T = ceil(scale * L / f); T >= tau iff L > (tau - 1) f / scale.
    const double scale = d * params.segment_bits / params.frame_duration_s;
    const int tau_max = local_completion_frames(d, f_lo, l_hi, params);

    // Probability-weighted mass of {T >= tau} with the h(f) weight.
    auto mass = [&](int tau) {
        const double k = (tau - 1) / scale;
        if (f_point) {
            const double h = 1.0 + c * f_lo * f_lo * f_lo;
            const double len = std::max(0.0, l_hi - std::max(l_lo, k * f_lo));
            return h * len / (l_hi - l_lo);
        }
        if (l_point) {
            const double upper = k > 0.0 ? std::min(f_hi, l_lo / k) : f_hi;
            if (upper <= f_lo) {
                return 0.0;
            }
            return (h_integral(upper, c) - h_integral(f_lo, c)) / (f_hi - f_lo);
        }
        return wedge_integral(f_lo, f_hi, k, l_lo, l_hi, c) / ((f_hi - f_lo) * (l_hi - l_lo));
    };

    double total = 0.0;
    double gamma_tau = 1.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
        gamma_tau *= gamma;
        total += gamma_tau * mass(tau);
    }
    return total;
}

}  // namespace

Eigen::MatrixXd build_transition_matrix(const SystemParams& params) {
    const int n = params.d_max + 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);

    m(0, 0) = 1.0 - params.arrival_prob;
    const double per_size = params.arrival_prob / (params.d_max - params.d_min + 1);
    for (int j = params.d_min; j <= params.d_max; ++j) {
        m(0, j) = per_size;
    }

    std::vector<double> tail(static_cast<std::size_t>(n) + 1);
    for (int s = 0; s <= n; ++s) {
        tail[static_cast<std::size_t>(s)] = prob_at_least(s, params);
    }
    for (int i = 1; i < n; ++i) {
        m(i, 0) = tail[static_cast<std::size_t>(i)];
        for (int j = 1; j <= i; ++j) {
            m(i, j) = tail[static_cast<std::size_t>(i - j)] - tail[static_cast<std::size_t>(i - j + 1)];
        }
    }
    return m;
}

Eigen::VectorXd build_cost_vector(const SystemParams& params, double expected_task_cost,
                                  double expected_inv_pathloss) {
    const int n = params.d_max + 1;
    Eigen::VectorXd g = Eigen::VectorXd::Constant(
        n, 1.0 + params.power_weight * params.rx_power_w * expected_inv_pathloss +
               params.arrival_prob * expected_task_cost);
    g(0) = 0.0;
    return g;
}

double solve_w_pi_empty(const Eigen::MatrixXd& transition, const Eigen::VectorXd& cost,
                        double discount) {
    const Eigen::Index n = transition.rows();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - discount * transition;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd x = lu.solve(cost);
    const double residual = (a * x - cost).norm();
    if (!x.allFinite() || residual > 1e-9 * (1.0 + cost.norm())) {
        throw std::runtime_error("value function: (I - gamma M) x = g is singular");
    }
    return x(0);
}

double w_pi_empty(const SystemParams& params) {
    return ValueModel(params).w_pi_empty();
}

double expected_task_cost(const SystemParams& params) {
    double total = 0.0;
    for (int d = params.d_min; d <= params.d_max; ++d) {
        total += expected_cost_for_size(d, params);
    }
    return total / (params.d_max - params.d_min + 1);
}

int frames_to_drain(double queue_segments, double expected_rate, const SystemParams& params) {
    if (queue_segments <= 0.0) {
        return 0;
    }
    return ceil_frames(queue_segments * params.segment_bits /
                       (expected_rate * params.frame_duration_s));
}

ValueModel::ValueModel(const SystemParams& params) : params_(params) {
    params_.validate();
    expected_rate_ = expected_uplink_rate(params_.rx_power_w, params_);
    expected_inv_pathloss_ = expected_inverse_pathloss(params_);
    expected_task_cost_ = mec::expected_task_cost(params_);
    transition_ = build_transition_matrix(params_);
    cost_ = build_cost_vector(params_, expected_task_cost_, expected_inv_pathloss_);
    w_pi_empty_ = solve_w_pi_empty(transition_, cost_, params_.discount);

    constexpr std::size_t kTable = 1 << 15;
    discount_powers_.resize(kTable);
    double p = 1.0;
    for (auto& v : discount_powers_) {
        v = p;
        p *= params_.discount;
    }
    drain_frames_.resize(static_cast<std::size_t>(params_.d_max) + 1);
    for (int q = 0; q <= params_.d_max; ++q) {
        drain_frames_[static_cast<std::size_t>(q)] = mec::frames_to_drain(q, expected_rate_, params_);
    }
}

int ValueModel::max_queue_within(int frames) const {
    const auto it = std::upper_bound(drain_frames_.begin(), drain_frames_.end(), frames);
    return static_cast<int>(it - drain_frames_.begin()) - 1;
}

double w_pi(std::span<const EdgeDevice> devices, const ValueModel& model) {
    const SystemParams& p = model.params();
    const double inv_one_minus = 1.0 / (1.0 - p.discount);
    std::int64_t elapsed = 0;
    double total = 0.0;
    for (std::size_t k = 0; k < devices.size(); ++k) {
        const EdgeDevice& dev = devices[k];
        if (k > 0 && !(devices[k - 1].id < dev.id)) {
            throw std::invalid_argument("w_pi: devices must be in ascending id order");
        }
        const int frames = model.frames_to_drain(dev.queue_segments);
        const double before = model.discount_pow(elapsed);
        elapsed += frames;
        const double after = model.discount_pow(elapsed);
        const double tx_cost = p.power_weight * before * (1.0 - model.discount_pow(frames)) *
                               inv_one_minus * (p.rx_power_w / dev.pathloss);
        total += tx_cost + (1.0 - after) * inv_one_minus;
    }
    const double drained = model.discount_pow(elapsed);
    total += p.arrival_prob * model.expected_task_cost() * (1.0 - drained) * inv_one_minus;
    total += drained * model.w_pi_empty();
    return total;
}

}  // namespace mec
