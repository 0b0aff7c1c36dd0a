#include "mec/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>
#include <stdexcept>

namespace mec {

namespace {

constexpr int kMaxNudge = 256;

Action fcfs_uplink(const SystemState& state, const SystemParams& params) {
    Action action;
    if (!state.edge.empty()) {
        const EdgeDevice& head = state.edge.front();
        action.uplink_device = head.id;
        action.tx_power_w = std::min(params.rx_power_w / head.pathloss, params.max_tx_power_w);
    }
    return action;
}

// Candidate transmissions of one edge device, keeping only the cheapest power
// for each distinct drain time of the remaining queue. Any other m leads to
// the same value of the successor at a higher power.
struct Level {
    int segments;
    double power_w;
    int remaining;
};

void drain_levels(const EdgeDevice& dev, double fading, const ValueModel& model,
                  std::vector<Level>& out) {
    const SystemParams& p = model.params();
    out.clear();
    out.push_back(Level{0, 0.0, dev.queue_segments});
    int last_segments = 0;
    const bool tabulated = dev.queue_segments <= p.d_max;
    int remaining = dev.queue_segments;
    for (int frames = model.frames_to_drain(dev.queue_segments) - 1; frames >= 0; --frames) {
        if (tabulated) {
            remaining = model.max_queue_within(frames);
        } else {
            while (remaining > 0 && model.frames_to_drain(remaining) > frames) {
                --remaining;
            }
        }
        const int m = dev.queue_segments - remaining;
        if (m == last_segments) {
            continue;
        }
        const double power = min_power_for_segments(m, dev.pathloss, fading, p);
        if (!(power <= p.max_tx_power_w)) {
            break;
        }
        last_segments = m;
        out.push_back(Level{m, power, remaining});
    }
}

double combine(double edge_count, double weighted_power, bool charge_local, double local_cost,
               double discount, double successor_value) {
    double cost = edge_count + weighted_power;
    if (charge_local) {
        cost += local_cost;
    }
    return cost + discount * successor_value;
}

// w_pi of the edge sets that differ from the current one only in device k
// and an optional appended arrival, in O(1) each from prefix sums. Agrees
// with w_pi up to rounding.
class SuccessorValues {
public:
    SuccessorValues(std::span<const EdgeDevice> edge, const ValueModel& model)
        : edge_(edge), model_(model), inv_one_minus_(1.0 / (1.0 - model.params().discount)) {
        const std::size_t n = edge.size();
        start_.assign(n + 1, 0);
        prefix_.assign(n + 1, 0.0);
        suffix_.assign(n + 1, 0.0);
        std::vector<double> tx(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int frames = model.frames_to_drain(edge[i].queue_segments);
            start_[i + 1] = start_[i] + frames;
            tx[i] = tx_cost(edge[i].pathloss, start_[i], frames);
            prefix_[i + 1] = prefix_[i] + tx[i] + (1.0 - pow(start_[i + 1])) * inv_one_minus_;
        }
        for (std::size_t i = n; i-- > 0;) {
            suffix_[i] = suffix_[i + 1] + tx[i] - pow(start_[i + 1]) * inv_one_minus_;
        }
    }

    /// Device k keeps `remaining` segments (dropped at 0); `appended` joins last.
    double operator()(std::size_t k, int remaining, const EdgeDevice* appended) const {
        const SystemParams& p = model_.params();
        double value = prefix_[k];
        std::int64_t end = start_[k];
        if (remaining > 0) {
            const int frames = model_.frames_to_drain(remaining);
            value += tx_cost(edge_[k].pathloss, end, frames);
            end += frames;
            value += (1.0 - pow(end)) * inv_one_minus_;
        }
        const std::int64_t shift = start_[k + 1] - end;  // >= 0: queues only shrink
        const auto later = static_cast<double>(edge_.size() - k - 1);
        value += suffix_[k + 1] / pow(shift) + later * inv_one_minus_;
        std::int64_t total = start_.back() - shift;
        if (appended != nullptr) {
            const int frames = model_.frames_to_drain(appended->queue_segments);
            value += tx_cost(appended->pathloss, total, frames);
            total += frames;
            value += (1.0 - pow(total)) * inv_one_minus_;
        }
        const double drained = pow(total);
        return value + p.arrival_prob * model_.expected_task_cost() * (1.0 - drained) * inv_one_minus_ +
               drained * model_.w_pi_empty();
    }

private:
    double pow(std::int64_t n) const { return model_.discount_pow(n); }

    double tx_cost(double pathloss, std::int64_t before, int frames) const {
        const SystemParams& p = model_.params();
        return p.power_weight * pow(before) * (1.0 - pow(frames)) * inv_one_minus_ *
               (p.rx_power_w / pathloss);
    }

    std::span<const EdgeDevice> edge_;
    const ValueModel& model_;
    double inv_one_minus_;
    std::vector<std::int64_t> start_;
    std::vector<double> prefix_;
    std::vector<double> suffix_;
};

}  // namespace

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Baseline: return "baseline";
        case PolicyKind::Improved: return "improved";
        case PolicyKind::AllLocal: return "alc";
        case PolicyKind::AllEdge: return "aec";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    for (auto kind : {PolicyKind::Baseline, PolicyKind::Improved, PolicyKind::AllLocal,
                      PolicyKind::AllEdge}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

Action baseline_decide(const SystemState& state, const SystemParams& params) {
    Action action = fcfs_uplink(state, params);
    action.offload = state.arrival.has_value() && state.edge.empty();
    return action;
}

Action all_local_decide(const SystemState&) {
    return Action{};
}

Action all_edge_decide(const SystemState& state, const SystemParams& params) {
    Action action = fcfs_uplink(state, params);
    action.offload = state.arrival.has_value();
    return action;
}

double min_power_for_segments(int segments, double pathloss, double fading_power,
                              const SystemParams& params) {
    if (segments <= 0) {
        return 0.0;
    }
    const double gain = pathloss * fading_power / params.noise_power_w;
    if (!(gain > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    const double snr =
        std::expm1(segments / params.segments_per_spectral_bit() * std::numbers::ln2);
    double power = snr / gain;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kMaxNudge && segments_transmitted(power, pathloss, fading_power, params) < segments;
         ++i) {
        power = std::nextafter(power, inf);
    }
    for (int i = 0; i < kMaxNudge; ++i) {
        const double lower = std::nextafter(power, 0.0);
        if (segments_transmitted(lower, pathloss, fading_power, params) < segments) {
            break;
        }
        power = lower;
    }
    return power;
}

std::vector<PowerLevel> candidate_powers(const EdgeDevice& device, double fading_power,
                                         const SystemParams& params) {
    std::vector<PowerLevel> levels{{0, 0.0}};
    for (int m = 1; m <= device.queue_segments; ++m) {
        const double power = min_power_for_segments(m, device.pathloss, fading_power, params);
        if (!(power <= params.max_tx_power_w)) {
            break;
        }
        levels.push_back(PowerLevel{m, power});
    }
    return levels;
}

ReducedState reduced_successor(const SystemState& state, const Action& action,
                               const SystemParams& params) {
    ReducedState next;
    next.devices.reserve(state.edge.size() + 1);
    for (std::size_t i = 0; i < state.edge.size(); ++i) {
        EdgeDevice dev = state.edge[i];
        if (action.uplink_device && *action.uplink_device == dev.id) {
            const int sent =
                segments_transmitted(action.tx_power_w, dev.pathloss, state.fading.at(i), params);
            dev.queue_segments = std::max(0, dev.queue_segments - sent);
        }
        if (dev.queue_segments > 0) {
            next.devices.push_back(dev);
        }
    }
    if (state.arrival && action.offload) {
        const Arrival& a = *state.arrival;
        next.devices.push_back(EdgeDevice{a.id, a.pathloss, a.size_segments});
    }
    return next;
}

double lookahead_cost(const SystemState& state, const Action& action, const ValueModel& model) {
    const SystemParams& p = model.params();
    const bool charge = state.arrival && !action.offload;
    const double local_cost = charge ? discounted_local_cost(*state.arrival, p) : 0.0;
    const ReducedState next = reduced_successor(state, action, p);
    return combine(static_cast<double>(state.edge.size()), p.power_weight * action.tx_power_w,
                   charge, local_cost, p.discount, w_pi(next, model));
}

Action improved_decide(const SystemState& state, const ValueModel& model) {
    const SystemParams& p = model.params();
    if (state.fading.size() != state.edge.size()) {
        throw std::invalid_argument("improved policy: fading does not match the edge device set");
    }
    const bool has_arrival = state.arrival.has_value();
    if (state.edge.empty() && !has_arrival) {
        return Action{};
    }
    const double local_cost = has_arrival ? discounted_local_cost(*state.arrival, p) : 0.0;
    const double edge_count = static_cast<double>(state.edge.size());
    const EdgeDevice arrival_dev =
        has_arrival ? EdgeDevice{state.arrival->id, state.arrival->pathloss,
                                 state.arrival->size_segments}
                    : EdgeDevice{};
    const int branches = has_arrival ? 2 : 1;
    std::vector<EdgeDevice> next;
    next.reserve(state.edge.size() + 1);

    if (state.edge.empty()) {
        double best = std::numeric_limits<double>::infinity();
        Action best_action;
        for (int b = 0; b < branches; ++b) {
            const bool offload = b == 1;
            next.clear();
            if (offload) {
                next.push_back(arrival_dev);
            }
            const double cost = combine(edge_count, 0.0, has_arrival && !offload, local_cost,
                                        p.discount, w_pi(std::span<const EdgeDevice>(next), model));
            if (cost < best) {
                best = cost;
                best_action = Action{std::nullopt, 0.0, offload};
            }
        }
        return best_action;
    }

    std::vector<std::vector<Level>> levels(state.edge.size());
    std::size_t n_candidates = 0;
    for (std::size_t k = 0; k < state.edge.size(); ++k) {
        drain_levels(state.edge[k], state.fading[k], model, levels[k]);
        n_candidates += levels[k].size();
    }

    struct Scored {
        double cost;
        std::size_t k;
        const Level* level;
        bool offload;
    };
    std::vector<Scored> scored;
    scored.reserve(n_candidates * static_cast<std::size_t>(branches));
    const SuccessorValues values(state.edge, model);
    double best_approx = std::numeric_limits<double>::infinity();
    for (int b = 0; b < branches; ++b) {
        const bool offload = b == 1;
        for (std::size_t k = 0; k < state.edge.size(); ++k) {
            for (const Level& level : levels[k]) {
                const double cost =
                    combine(edge_count, p.power_weight * level.power_w, has_arrival && !offload,
                            local_cost, p.discount,
                            values(k, level.remaining, offload ? &arrival_dev : nullptr));
                scored.push_back(Scored{cost, k, &level, offload});
                best_approx = std::min(best_approx, cost);
            }
        }
    }

    // Candidates near the minimum are rescored with w_pi itself, so the choice
    // is the exact minimizer of lookahead_cost.
    const double tolerance =
        1e-9 * (1.0 + std::abs(best_approx) + edge_count / (1.0 - p.discount));
    double best = std::numeric_limits<double>::infinity();
    Action best_action;
    for (const Scored& c : scored) {
        if (c.cost > best_approx + tolerance) {
            continue;
        }
        next.assign(state.edge.begin(), state.edge.end());
        if (c.level->remaining > 0) {
            next[c.k].queue_segments = c.level->remaining;
        } else {
            next.erase(next.begin() + static_cast<std::ptrdiff_t>(c.k));
        }
        if (c.offload) {
            next.push_back(arrival_dev);
        }
        const double cost =
            combine(edge_count, p.power_weight * c.level->power_w, has_arrival && !c.offload,
                    local_cost, p.discount, w_pi(std::span<const EdgeDevice>(next), model));
        if (cost < best) {
            best = cost;
            best_action = Action{state.edge[c.k].id, c.level->power_w, c.offload};
        }
    }
    return best_action;
}

Policy::Policy(PolicyKind kind, const SystemParams& params, const ValueModel* model)
    : kind_(kind), params_(params), model_(model) {
    if (kind_ == PolicyKind::Improved && model_ == nullptr) {
        throw std::invalid_argument("improved policy requires a value model");
    }
}

Action Policy::decide(const SystemState& state) const {
    switch (kind_) {
        case PolicyKind::Baseline: return baseline_decide(state, params_);
        case PolicyKind::Improved: return improved_decide(state, *model_);
        case PolicyKind::AllLocal: return all_local_decide(state);
        case PolicyKind::AllEdge: return all_edge_decide(state, params_);
    }
    return Action{};
}

}  // namespace mec
