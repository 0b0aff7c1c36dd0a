#pragma once

// Analytical value function of the baseline policy.
//
// From the empty edge set the baseline policy keeps at most one edge device,
// so its discounted cost follows a (d_max+1)-state Markov chain over that
// device's queue length. From a general state the devices already offloaded
// are drained FCFS with a deterministic drain time each, after which the
// system is back at the empty state.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "mec/model.hpp"

namespace mec {

Eigen::MatrixXd build_transition_matrix(const SystemParams& params);

/// g_1 = 0, g_i = 1 + w p_r E[1/rho] + P_N E[C] for i >= 2.
Eigen::VectorXd build_cost_vector(const SystemParams& params, double expected_task_cost,
                                  double expected_inv_pathloss);

/// First component of (I - gamma M)^-1 g. Throws std::runtime_error if the
/// system is numerically singular.
double solve_w_pi_empty(const Eigen::MatrixXd& transition, const Eigen::VectorXd& cost,
                        double discount);

double w_pi_empty(const SystemParams& params);

/// E[C(n_t)] over task size, CPU frequency and cycles per bit. The size is
/// summed exactly; over (f, L) the integrand is a step function of the local
/// completion time times a cubic in f, which is integrated piecewise in
/// closed form.
double expected_task_cost(const SystemParams& params);

/// ceil(Q b_s / (E[rate] T_s))
int frames_to_drain(double queue_segments, double expected_rate, const SystemParams& params);

class ValueModel {
public:
    explicit ValueModel(const SystemParams& params);

    const SystemParams& params() const { return params_; }
    const Eigen::MatrixXd& transition_matrix() const { return transition_; }
    const Eigen::VectorXd& cost_vector() const { return cost_; }
    double w_pi_empty() const { return w_pi_empty_; }
    double expected_task_cost() const { return expected_task_cost_; }
    double expected_inv_pathloss() const { return expected_inv_pathloss_; }
    double expected_rate() const { return expected_rate_; }

    int frames_to_drain(int queue_segments) const {
        return queue_segments >= 0 && queue_segments <= params_.d_max
                   ? drain_frames_[static_cast<std::size_t>(queue_segments)]
                   : mec::frames_to_drain(queue_segments, expected_rate_, params_);
    }

    /// Largest queue in [0, d_max] that drains within `frames` frames.
    int max_queue_within(int frames) const;

    /// gamma^n
    double discount_pow(std::int64_t n) const {
        return n < static_cast<std::int64_t>(discount_powers_.size())
                   ? discount_powers_[static_cast<std::size_t>(n)]
                   : std::pow(params_.discount, static_cast<double>(n));
    }

private:
    SystemParams params_;
    Eigen::MatrixXd transition_;
    Eigen::VectorXd cost_;
    double w_pi_empty_ = 0.0;
    double expected_task_cost_ = 0.0;
    double expected_inv_pathloss_ = 0.0;
    double expected_rate_ = 0.0;
    std::vector<double> discount_powers_;
    std::vector<int> drain_frames_;
};

/// Value of the baseline policy from a reduced state. Devices must be in
/// ascending id order; the result depends on that order.
double w_pi(std::span<const EdgeDevice> devices, const ValueModel& model);

inline double w_pi(const ReducedState& state, const ValueModel& model) {
    return w_pi(std::span<const EdgeDevice>(state.devices), model);
}

}  // namespace mec
