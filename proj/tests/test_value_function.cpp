#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mec/channel.hpp"
#include "mec/value_function.hpp"
#include "support.hpp"

using namespace mec;

namespace {

// Truncated Neumann series u^T sum_{t<K} (gamma M)^t g.
double neumann_w(const Eigen::MatrixXd& m, const Eigen::VectorXd& g, double gamma, int terms) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m.rows());
    row(0) = 1.0;
    double total = 0.0;
    for (int t = 0; t < terms; ++t) {
        total += row.dot(g);
        row = gamma * (row * m);
    }
    return total;
}

}  // namespace

TEST_CASE("transition matrix structure") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const SystemParams p = testing::random_params(rng);
        const Eigen::MatrixXd m = build_transition_matrix(p);
        REQUIRE(m.rows() == p.d_max + 1);
        CHECK(m(0, 0) == doctest::Approx(1.0 - p.arrival_prob).epsilon(1e-15));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            CHECK(std::abs(m.row(i).sum() - 1.0) <= 1e-12);
            CHECK(m.row(i).minCoeff() >= 0.0);
            CHECK(m.row(i).maxCoeff() <= 1.0);
            for (Eigen::Index j = i + 1; i >= 1 && j < m.cols(); ++j) {
                CHECK(m(i, j) == 0.0);
            }
        }
    }
}

TEST_CASE("one-segment transition probability") {
    SystemParams p;
    p.rx_power_w = p.noise_power_w;
    p.d_min = 1;
    p.d_max = 5;
    const Eigen::MatrixXd m = build_transition_matrix(p);
    const double expected = std::exp(-(std::pow(2.0, 0.1) - 1.0));
    CHECK(m(1, 0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(m(1, 0) == doctest::Approx(0.9307).epsilon(1e-4));
    CHECK(m(1, 1) == doctest::Approx(1.0 - expected).epsilon(1e-13));

    // Monte Carlo: the baseline receive SNR is the fading draw itself.
    std::mt19937_64 rng(99);
    constexpr int n = 200'000;
    int sent = 0;
    for (int i = 0; i < n; ++i) {
        sent += segments_transmitted(p.rx_power_w, 1.0, sample_fading_power(rng), p) >= 1 ? 1 : 0;
    }
    const double freq = static_cast<double>(sent) / n;
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(freq - expected) < 4.0 * se);
}

TEST_CASE("cost vector") {
    SystemParams p;
    const Eigen::VectorXd g = build_cost_vector(p, 50.0, 2e12);
    CHECK(g(0) == 0.0);
    const double expected = 1.0 + p.power_weight * p.rx_power_w * 2e12 + p.arrival_prob * 50.0;
    for (Eigen::Index i = 1; i < g.size(); ++i) {
        CHECK(g(i) == expected);
    }
    p.power_weight = 0.0;
    p.arrival_prob = 1e-300;
    const Eigen::VectorXd h = build_cost_vector(p, 50.0, 2e12);
    CHECK(h(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("empty-state value against the series") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        SystemParams p = testing::random_params(rng);
        p.discount = 0.9;
        const ValueModel model(p);
        const double series =
            neumann_w(model.transition_matrix(), model.cost_vector(), p.discount, 2000);
        CHECK(std::abs(model.w_pi_empty() - series) / series < 1e-8);
    }
}

TEST_CASE("no arrivals: zero value") {
    SystemParams p;
    p.arrival_prob = 0.0;  // outside the validated domain; free functions only
    const Eigen::MatrixXd m = build_transition_matrix(p);
    const Eigen::VectorXd g = build_cost_vector(p, expected_task_cost(p), expected_inverse_pathloss(p));
    CHECK(std::abs(solve_w_pi_empty(m, g, p.discount)) < 1e-10);
}

TEST_CASE("singular system is reported") {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd g = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(solve_w_pi_empty(m, g, 1.0), std::runtime_error);
}

TEST_CASE("expected task cost, point CPU parameters") {
    SystemParams p;
    p.d_min = p.d_max = 250;
    CHECK(expected_task_cost(p) == discounted_local_cost(250, 1e9, 500, p));

    p.d_min = 200;
    p.d_max = 300;
    double sum = 0.0;
    for (int d = 200; d <= 300; ++d) {
        sum += discounted_local_cost(d, 1e9, 500, p);
    }
    CHECK(expected_task_cost(p) == doctest::Approx(sum / 101.0).epsilon(1e-14));

    SystemParams bigger = p;
    bigger.d_max = 320;
    CHECK(expected_task_cost(bigger) > expected_task_cost(p));
}

TEST_CASE("expected task cost, CPU ranges") {
    SystemParams p;
    p.discount = 0.97;
    p.power_weight = 3.0;
    p.d_min = 20;
    p.d_max = 40;

    SUBCASE("frequency range: fine midpoint rule") {
        p.f_min_hz = 0.5e9;
        p.f_max_hz = 2e9;
        constexpr int n = 200'000;
        double total = 0.0;
        for (int d = p.d_min; d <= p.d_max; ++d) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double f = p.f_min_hz + (i + 0.5) * (p.f_max_hz - p.f_min_hz) / n;
                acc += discounted_local_cost(d, f, p.cycles_per_bit_min, p);
            }
            total += acc / n;
        }
        const double oracle = total / (p.d_max - p.d_min + 1);
        CHECK(std::abs(expected_task_cost(p) - oracle) / oracle < 1e-5);
    }

    SUBCASE("cycles-per-bit range: fine midpoint rule") {
        p.cycles_per_bit_min = 300.0;
        p.cycles_per_bit_max = 700.0;
        constexpr int n = 200'000;
        double total = 0.0;
        for (int d = p.d_min; d <= p.d_max; ++d) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double l = p.cycles_per_bit_min +
                                 (i + 0.5) * (p.cycles_per_bit_max - p.cycles_per_bit_min) / n;
                acc += discounted_local_cost(d, p.f_min_hz, l, p);
            }
            total += acc / n;
        }
        const double oracle = total / (p.d_max - p.d_min + 1);
        CHECK(std::abs(expected_task_cost(p) - oracle) / oracle < 1e-5);
    }

    SUBCASE("both ranges: Monte Carlo") {
        p.f_min_hz = 0.5e9;
        p.f_max_hz = 2e9;
        p.cycles_per_bit_min = 300.0;
        p.cycles_per_bit_max = 700.0;
        std::mt19937_64 rng(17);
        constexpr int n = 400'000;
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const int d = std::uniform_int_distribution<int>(p.d_min, p.d_max)(rng);
            const double f = std::uniform_real_distribution<double>(p.f_min_hz, p.f_max_hz)(rng);
            const double l = std::uniform_real_distribution<double>(p.cycles_per_bit_min,
                                                                    p.cycles_per_bit_max)(rng);
            const double c = discounted_local_cost(d, f, l, p);
            sum += c;
            sum_sq += c * c;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sum_sq / n - mean * mean) / n);
        CHECK(std::abs(expected_task_cost(p) - mean) < 4.0 * se);
    }
}

TEST_CASE("frames to drain") {
    SystemParams p;
    const double rate = 10.0 * p.segment_bits / p.frame_duration_s;
    CHECK(frames_to_drain(0, rate, p) == 0);
    CHECK(frames_to_drain(95, rate, p) == 10);
    CHECK(frames_to_drain(100, rate, p) == 10);
    CHECK(frames_to_drain(101, rate, p) == 11);
}

TEST_CASE("value from a reduced state") {
    const SystemParams p;
    const ValueModel model(p);
    const double g = p.discount;

    CHECK(w_pi(ReducedState{}, model) == model.w_pi_empty());

    const EdgeDevice a{1, 2e-12, 120};
    const int t1 = model.frames_to_drain(a.queue_segments);
    CHECK(t1 == frames_to_drain(120, model.expected_rate(), p));
    const double span = (1.0 - std::pow(g, t1)) / (1.0 - g);
    const double one = p.power_weight * span * p.rx_power_w / a.pathloss + span +
                       p.arrival_prob * model.expected_task_cost() * span +
                       std::pow(g, t1) * model.w_pi_empty();
    CHECK(w_pi(ReducedState{{a}}, model) == doctest::Approx(one).epsilon(1e-12));

    // With P_N -> 0 the tail vanishes.
    SystemParams quiet = p;
    quiet.arrival_prob = 1e-12;
    const ValueModel silent(quiet);
    const double bare = quiet.power_weight * span * quiet.rx_power_w / a.pathloss + span;
    CHECK(w_pi(ReducedState{{a}}, silent) == doctest::Approx(bare).epsilon(1e-9));

    // Two devices: hand evaluation with the prefix discount.
    const EdgeDevice b{4, 5e-13, 260};
    const int t2 = model.frames_to_drain(b.queue_segments);
    const double two = p.power_weight * span * p.rx_power_w / a.pathloss + span +
                       p.power_weight * std::pow(g, t1) * (1.0 - std::pow(g, t2)) / (1.0 - g) *
                           p.rx_power_w / b.pathloss +
                       (1.0 - std::pow(g, t1 + t2)) / (1.0 - g) +
                       p.arrival_prob * model.expected_task_cost() *
                           (1.0 - std::pow(g, t1 + t2)) / (1.0 - g) +
                       std::pow(g, t1 + t2) * model.w_pi_empty();
    CHECK(w_pi(ReducedState{{a, b}}, model) == doctest::Approx(two).epsilon(1e-12));

    // Arrival order matters: swap the ids.
    const ReducedState swapped{{EdgeDevice{1, b.pathloss, b.queue_segments},
                                EdgeDevice{4, a.pathloss, a.queue_segments}}};
    CHECK(w_pi(swapped, model) != doctest::Approx(two).epsilon(1e-9));

    CHECK_THROWS_AS(w_pi(ReducedState{{b, a}}, model), std::invalid_argument);
}

TEST_CASE("value grows with queue length when power is free") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 20; ++trial) {
        SystemParams p = testing::random_params(rng);
        p.power_weight = 0.0;
        const ValueModel model(p);
        for (int s = 0; s < 50; ++s) {
            const SystemState state = testing::random_state(rng, p);
            if (state.edge.empty()) {
                continue;
            }
            ReducedState longer{state.edge};
            const auto k = std::uniform_int_distribution<std::size_t>(0, state.edge.size() - 1)(rng);
            longer.devices[k].queue_segments += std::uniform_int_distribution<int>(1, 200)(rng);
            CHECK(w_pi(longer, model) >= w_pi(ReducedState{state.edge}, model));
        }
    }
}

TEST_CASE("value model rejects invalid parameters") {
    SystemParams p;
    p.discount = 1.2;
    CHECK_THROWS_AS(ValueModel{p}, std::invalid_argument);
}
