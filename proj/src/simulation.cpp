#include "mec/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace mec {

namespace {

std::atomic<unsigned> g_worker_threads{0};

unsigned worker_count(std::size_t items) {
    unsigned n = g_worker_threads.load();
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, items)));
}

// Runs fn(i) for i in [0, n) over contiguous blocks; fn writes to slot i only.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t block = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * block;
        const std::size_t end = std::min(n, begin + block);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) {
                fn(i);
            }
        });
    }
}

// Discounted cost, weighted from frame `start` (gamma^(start-1)), of the
// remaining frames of every local device.
double local_tail_cost(const std::vector<LocalDevice>& local, std::int64_t start,
                       const SystemParams& params) {
    const double g = params.discount;
    double total = 0.0;
    for (const auto& dev : local) {
        const double per_frame = 1.0 + params.power_weight * local_power_w(dev.cpu_hz, params);
        total += per_frame * std::pow(g, static_cast<double>(start - 1)) *
                 (1.0 - std::pow(g, dev.frames_remaining)) / (1.0 - g);
    }
    return total;
}

DeviceId next_free_id(const InitialState& initial) {
    DeviceId next = 0;
    for (const auto& d : initial.edge) {
        next = std::max(next, d.id + 1);
    }
    for (const auto& d : initial.local) {
        next = std::max(next, d.id + 1);
    }
    return next;
}

void check_initial(const InitialState& initial) {
    for (std::size_t i = 0; i < initial.edge.size(); ++i) {
        if (initial.edge[i].queue_segments <= 0 || !(initial.edge[i].pathloss > 0.0)) {
            throw std::invalid_argument("initial state: edge devices need Q > 0 and pathloss > 0");
        }
        if (i > 0 && !(initial.edge[i - 1].id < initial.edge[i].id)) {
            throw std::invalid_argument("initial state: edge devices must be in ascending id order");
        }
    }
}

}  // namespace

int auto_horizon(double discount) {
    return static_cast<int>(std::floor(std::log(1e-6) / std::log(discount))) + 1;
}

void set_worker_threads(unsigned count) {
    g_worker_threads.store(count);
}

EpisodeResult run_episode(const Policy& policy, const InitialState& initial, int horizon_frames,
                          std::uint64_t seed, const SystemParams& params,
                          const ChannelModel& channel) {
    if (horizon_frames < 1) {
        throw std::invalid_argument("run_episode: horizon must be >= 1");
    }
    check_initial(initial);

    std::mt19937_64 arrivals(mix_seed(seed, kArrivalStream));
    const FadingField fading(mix_seed(seed, kFadingStream), channel);

    SystemState state;
    state.edge = initial.edge;
    state.local = initial.local;
    DeviceId next_id = next_free_id(initial);

    auto draw_arrival = [&] {
        auto a = sample_arrival(arrivals, next_id, params, channel);
        if (a) {
            ++next_id;
        }
        return a;
    };
    const bool full_csi = policy.reads_fading();
    auto draw_fading = [&] {
        state.fading.resize(state.edge.size());
        if (!full_csi) {
            return;
        }
        for (std::size_t i = 0; i < state.edge.size(); ++i) {
            state.fading[i] = fading(state.edge[i].id, state.frame);
        }
    };
    // Lazy draw for policies that ignore fading: the field is keyed by
    // (id, frame), so the realized path is unchanged.
    auto draw_uplink_fading = [&](const Action& action) {
        if (full_csi || !action.uplink_device) {
            return;
        }
        for (std::size_t i = 0; i < state.edge.size(); ++i) {
            if (state.edge[i].id == *action.uplink_device) {
                state.fading[i] = fading(state.edge[i].id, state.frame);
                break;
            }
        }
    };

    EpisodeResult result;
    result.initial_local_cost = local_tail_cost(state.local, 1, params);
    state.arrival = draw_arrival();
    draw_fading();

    double weight = 1.0;
    for (int t = 0; t < horizon_frames; ++t) {
        const Action action = policy.decide(state);
        draw_uplink_fading(action);
        const double g = stage_cost(state, action, params);
        const double g_prime = reduced_stage_cost(state, action, params);
        result.discounted_g += weight * g;
        result.discounted_g_prime += weight * g_prime;
        result.undiscounted_cost += g;
        result.max_stage_cost = std::max(result.max_stage_cost, g);
        if (state.arrival) {
            ++result.tasks_arrived;
            result.tasks_offloaded += action.offload ? 1 : 0;
        }
        const auto before = static_cast<std::int64_t>(state.edge.size() + state.local.size() +
                                                      (state.arrival ? 1 : 0));
        advance_in_place(state, action, draw_arrival(), params);
        result.tasks_completed +=
            before - static_cast<std::int64_t>(state.edge.size() + state.local.size());
        draw_fading();
        weight *= params.discount;
        ++result.frames_run;
    }
    result.local_backlog_cost = local_tail_cost(state.local, state.frame, params);
    return result;
}

Estimate summarize(const std::vector<double>& samples) {
    const auto n = static_cast<double>(samples.size());
    if (samples.size() < 2) {
        throw std::invalid_argument("summarize: need at least two samples");
    }
    double mean = 0.0;
    for (double x : samples) {
        mean += x;
    }
    mean /= n;
    double ss = 0.0;
    for (double x : samples) {
        ss += (x - mean) * (x - mean);
    }
    return Estimate{mean, std::sqrt(ss / (n - 1.0) / n)};
}

std::optional<Estimate> ratio_estimate(const std::vector<double>& numer,
                                       const std::vector<double>& denom) {
    if (numer.size() != denom.size() || numer.size() < 2) {
        throw std::invalid_argument("ratio_estimate: need two equally sized samples, n >= 2");
    }
    double sum_y = 0.0;
    double sum_x = 0.0;
    for (std::size_t i = 0; i < numer.size(); ++i) {
        sum_y += numer[i];
        sum_x += denom[i];
    }
    if (sum_x <= 0.0) {
        return std::nullopt;
    }
    const double ratio = sum_y / sum_x;
    const auto n = static_cast<double>(numer.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < numer.size(); ++i) {
        const double r = numer[i] - ratio * denom[i];
        ss += r * r;
    }
    const double mean_x = sum_x / n;
    return Estimate{ratio, std::sqrt(ss / (n * (n - 1.0))) / mean_x};
}

std::vector<EpisodeResult> run_episodes(const Policy& policy, const InitialState& initial,
                                        int n_episodes, int horizon, std::uint64_t seed,
                                        std::uint64_t stream, const SystemParams& params,
                                        const ChannelModel& channel) {
    std::vector<EpisodeResult> results(static_cast<std::size_t>(std::max(0, n_episodes)));
    parallel_for(results.size(), [&](std::size_t i) {
        results[i] = run_episode(policy, initial, horizon, mix_seed(seed, stream, i), params, channel);
    });
    return results;
}

Estimate estimate_value(const Policy& policy, const ReducedState& initial, int n_episodes,
                        int horizon, std::uint64_t seed, const SystemParams& params,
                        const ChannelModel& channel) {
    if (n_episodes < 2) {
        throw std::invalid_argument("estimate_value: need at least two episodes");
    }
    const auto episodes = run_episodes(policy, InitialState::from(initial), n_episodes, horizon,
                                       seed, 0, params, channel);
    std::vector<double> values;
    values.reserve(episodes.size());
    for (const auto& e : episodes) {
        values.push_back(e.discounted_g_prime);
    }
    return summarize(values);
}

const PolicyStats& SweepRow::stats(PolicyKind kind) const {
    for (const auto& s : policies) {
        if (s.policy == kind) {
            return s;
        }
    }
    throw std::out_of_range("sweep row: policy not simulated");
}

PolicyStats summarize_policy(PolicyKind kind, const std::vector<EpisodeResult>& episodes,
                             bool keep_episodes) {
    std::vector<double> cost, completed, offloaded, arrived, discounted;
    for (const auto& e : episodes) {
        cost.push_back(e.undiscounted_cost);
        completed.push_back(static_cast<double>(e.tasks_completed));
        offloaded.push_back(static_cast<double>(e.tasks_offloaded));
        arrived.push_back(static_cast<double>(e.tasks_arrived));
        discounted.push_back(e.discounted_g);
    }
    PolicyStats stats;
    stats.policy = kind;
    stats.per_device_cost = ratio_estimate(cost, completed);
    stats.edge_ratio = ratio_estimate(offloaded, arrived);
    stats.discounted_g = summarize(discounted);
    if (keep_episodes) {
        stats.episodes = episodes;
    }
    return stats;
}

std::vector<SweepRow> sweep_arrival_rate(const std::vector<double>& arrival_grid,
                                         const std::vector<PolicyKind>& policies, int n_episodes,
                                         int horizon, std::uint64_t seed,
                                         const SystemParams& params, bool keep_episodes) {
    std::vector<SweepRow> rows;
    for (std::size_t gi = 0; gi < arrival_grid.size(); ++gi) {
        const double pn = arrival_grid[gi];
        if (!(pn > 0.0 && pn <= 1.0)) {
            throw std::invalid_argument("sweep: arrival probabilities must lie in (0, 1]");
        }
        SystemParams p = params;
        p.arrival_prob = pn;
        std::optional<ValueModel> model;
        if (std::find(policies.begin(), policies.end(), PolicyKind::Improved) != policies.end()) {
            model.emplace(p);
        }
        SweepRow row;
        row.arrival_prob = pn;
        for (PolicyKind kind : policies) {
            const Policy policy(kind, p, model ? &*model : nullptr);
            const auto episodes =
                run_episodes(policy, InitialState{}, n_episodes, horizon, seed, gi + 1, p);
            row.policies.push_back(summarize_policy(kind, episodes, keep_episodes));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

struct OracleContext {
    const Policy& policy;
    const SystemParams& params;
    const ChannelModel& channel;
    int horizon;
    std::vector<std::pair<double, std::optional<Arrival>>> arrivals;  // id filled per node
    std::int64_t nodes = 0;
};

// Expected discounted (g', g) from frame t on, with `pre` holding the edge and
// local sets at the start of frame t. Values, including the local backlog
// left after the horizon, are discounted to frame t.
std::pair<double, double> expand(OracleContext& ctx, const SystemState& pre, int t,
                                 DeviceId next_id, double& backlog) {
    if (t > ctx.horizon) {
        backlog += local_tail_cost(pre.local, 1, ctx.params);
        return {0.0, 0.0};
    }
    const DiscreteLaw& fading = *ctx.channel.fading_atoms;
    const std::size_t n_edge = pre.edge.size();
    const std::size_t n_atoms = fading.values.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n_edge; ++i) {
        combos *= n_atoms;
    }

    double g_prime = 0.0;
    double g = 0.0;
    std::vector<std::size_t> idx(n_edge, 0);
    for (std::size_t c = 0; c < combos; ++c) {
        double p_fading = 1.0;
        std::size_t code = c;
        for (std::size_t i = 0; i < n_edge; ++i) {
            idx[i] = code % n_atoms;
            code /= n_atoms;
            p_fading *= fading.probs[idx[i]];
        }
        for (const auto& [p_arrival, outcome] : ctx.arrivals) {
            if (++ctx.nodes > kOracleNodeBudget) {
                throw std::length_error("finite_horizon_oracle: outcome tree exceeds node budget");
            }
            const double prob = p_fading * p_arrival;
            if (prob == 0.0) {
                continue;
            }
            SystemState s = pre;
            s.fading.resize(n_edge);
            for (std::size_t i = 0; i < n_edge; ++i) {
                s.fading[i] = fading.values[idx[i]];
            }
            s.arrival = outcome;
            if (s.arrival) {
                s.arrival->id = next_id;
            }
            const Action action = ctx.policy.decide(s);
            const double stage_prime = reduced_stage_cost(s, action, ctx.params);
            const double stage = stage_cost(s, action, ctx.params);
            const DeviceId child_id = next_id + (s.arrival ? 1 : 0);
            advance_in_place(s, action, std::nullopt, ctx.params);
            double child_backlog = 0.0;
            const auto [cont_prime, cont] =
                expand(ctx, s, t + 1, child_id, child_backlog);
            g_prime += prob * (stage_prime + ctx.params.discount * cont_prime);
            g += prob * (stage + ctx.params.discount * cont);
            backlog += prob * ctx.params.discount * child_backlog;
        }
    }
    return {g_prime, g};
}

}  // namespace

OracleValue finite_horizon_oracle(const Policy& policy, const InitialState& initial, int horizon,
                                  const SystemParams& params, const ChannelModel& channel) {
    if (!channel.fading_atoms || !channel.pathloss_atoms) {
        throw std::invalid_argument("oracle: fading and pathloss must both be quantized");
    }
    channel.fading_atoms->validate();
    channel.pathloss_atoms->validate();
    if (channel.fading_atoms->values.size() > 4 || channel.pathloss_atoms->values.size() > 2) {
        throw std::invalid_argument("oracle: at most 4 fading atoms and 2 pathloss atoms");
    }
    if (params.d_max > 3 || horizon < 1 || horizon > 4) {
        throw std::invalid_argument("oracle: requires d_max <= 3 and 1 <= horizon <= 4");
    }
    if (params.f_min_hz != params.f_max_hz ||
        params.cycles_per_bit_min != params.cycles_per_bit_max) {
        throw std::invalid_argument("oracle: CPU frequency and cycles per bit must be point values");
    }
    check_initial(initial);

    OracleContext ctx{policy, params, channel, horizon, {}, 0};
    ctx.arrivals.emplace_back(1.0 - params.arrival_prob, std::nullopt);
    const double p_size = params.arrival_prob / (params.d_max - params.d_min + 1);
    const DiscreteLaw& pathloss = *channel.pathloss_atoms;
    for (int d = params.d_min; d <= params.d_max; ++d) {
        for (std::size_t j = 0; j < pathloss.values.size(); ++j) {
            Arrival a;
            a.pathloss = pathloss.values[j];
            a.size_segments = d;
            a.cpu_hz = params.f_min_hz;
            a.cycles_per_bit = params.cycles_per_bit_min;
            ctx.arrivals.emplace_back(p_size * pathloss.probs[j], a);
        }
    }

    SystemState start;
    start.edge = initial.edge;
    start.local = initial.local;
    OracleValue value;
    double backlog = 0.0;
    const auto [g_prime, g] = expand(ctx, start, 1, next_free_id(initial), backlog);
    value.discounted_g_prime = g_prime;
    value.discounted_g = g;
    value.local_backlog_cost = backlog;
    value.nodes = ctx.nodes;
    return value;
}

}  // namespace mec
