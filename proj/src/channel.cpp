#include "mec/channel.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <numbers>
#include <numeric>
#include <stdexcept>

namespace mec {

void DiscreteLaw::validate() const {
    if (values.empty() || values.size() != probs.size()) {
        throw std::invalid_argument("discrete law: values and probs must be nonempty and equal length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(probs[i] >= 0.0) || !(values[i] >= 0.0)) {
            throw std::invalid_argument("discrete law: negative value or probability");
        }
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("discrete law: probabilities do not sum to 1");
    }
}

double DiscreteLaw::mean() const {
    return std::inner_product(values.begin(), values.end(), probs.begin(), 0.0);
}

double DiscreteLaw::mean_inverse() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += probs[i] / values[i];
    }
    return acc;
}

double pathloss_at(double distance_m, const SystemParams& params) {
    return params.pathloss_ref_gain * std::pow(distance_m, -params.pathloss_exponent);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    SplitMix64 s0(seed);
    std::uint64_t h = s0();
    SplitMix64 s1(h ^ (a * 0xd1b54a32d192ed03ULL));
    h = s1();
    SplitMix64 s2(h ^ (b * 0xabc98388fb8fac03ULL));
    return s2();
}

double expected_uplink_rate(double rx_power_w, const SystemParams& params) {
    const double c = rx_power_w / params.noise_power_w;
    if (!(c > 0.0)) {
        return 0.0;
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    auto integrand = [c](double x) { return std::exp(-x) * std::log1p(c * x); };
    const double nats = integrator.integrate(integrand, 1e-12);
    return params.bandwidth_hz * nats / std::numbers::ln2;
}

double expected_inverse_pathloss(const SystemParams& params) {
    const double r0 = params.min_distance_m;
    const double r1 = params.cell_radius_m;
    const double alpha = params.pathloss_exponent;
    const double norm = 2.0 / (r1 * r1 - r0 * r0);
    auto integrand = [&](double r) { return norm * r * std::pow(r, alpha); };
    const double moment =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, r0, r1, 15, 1e-13);
    return moment / params.pathloss_ref_gain;
}

}  // namespace mec
