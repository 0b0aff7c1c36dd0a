#include "mec/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "mec/config.hpp"
#include "mec/simulation.hpp"
#include "mec/validation.hpp"
#include "mec/value_function.hpp"

namespace mec {

namespace {

using nlohmann::ordered_json;

constexpr int kValidateStates = 20;
constexpr int kOracleEpisodes = 100'000;

struct Overrides {
    std::string config_path;
    std::optional<std::string> seed;
    std::optional<std::string> policy;
    std::optional<std::string> pn;
    std::optional<std::string> episodes;
    std::optional<std::string> horizon;
    std::optional<std::string> out;
    std::optional<std::string> format;
    bool dump_episodes = false;
};

RunConfig resolve(const Overrides& o, bool pn_sets_grid) {
    RunConfig config = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    auto apply = [&](const std::optional<std::string>& v, std::string_view key,
                     std::string_view flag) {
        if (v) {
            apply_setting(config, key, *v, flag);
        }
    };
    apply(o.seed, "seed", "--seed");
    apply(o.policy, "policy", "--policy");
    apply(o.pn, "arrival_prob", "--pn");
    if (o.pn && pn_sets_grid) {
        apply(o.pn, "p_grid", "--pn");
    }
    apply(o.episodes, "episodes", "--episodes");
    apply(o.horizon, "horizon", "--horizon");
    apply(o.out, "out", "--out");
    apply(o.format, "format", "--format");
    if (o.dump_episodes) {
        config.dump_episodes = true;
    }
    config.validate();
    return config;
}

std::string csv_header(const RunConfig& config) {
    std::string s;
    for (const auto& [key, value] : config_entries(config)) {
        s += "# " + key + " = " + value + "\n";
    }
    return s;
}

ordered_json config_json(const RunConfig& config) {
    ordered_json j = ordered_json::object();
    for (const auto& [key, value] : config_entries(config)) {
        j[key] = value;
    }
    return j;
}

std::string opt_number(const std::optional<Estimate>& e, bool half_width) {
    if (!e) {
        return "";
    }
    return format_number(half_width ? e->half_width() : e->mean);
}

ordered_json estimate_json(const std::optional<Estimate>& e) {
    if (!e) {
        return nullptr;
    }
    return ordered_json{{"mean", e->mean}, {"ci95", e->half_width()}};
}

ordered_json episodes_json(const std::vector<EpisodeResult>& episodes) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : episodes) {
        arr.push_back(ordered_json{{"discounted_g", e.discounted_g},
                                   {"discounted_g_prime", e.discounted_g_prime},
                                   {"undiscounted_cost", e.undiscounted_cost},
                                   {"tasks_arrived", e.tasks_arrived},
                                   {"tasks_offloaded", e.tasks_offloaded},
                                   {"tasks_completed", e.tasks_completed},
                                   {"frames_run", e.frames_run}});
    }
    return arr;
}

ordered_json stats_json(const PolicyStats& s) {
    ordered_json j{{"policy", std::string(to_string(s.policy))},
                   {"cost", estimate_json(s.per_device_cost)},
                   {"edge_ratio", estimate_json(s.edge_ratio)},
                   {"discounted_g", estimate_json(s.discounted_g)}};
    if (!s.episodes.empty()) {
        j["episodes"] = episodes_json(s.episodes);
    }
    return j;
}

std::string run_value(const RunConfig& config) {
    const ValueModel model(config.params);
    ordered_json j;
    j["config"] = config_json(config);
    ordered_json m = ordered_json::array();
    const auto& M = model.transition_matrix();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k) {
            row.push_back(M(i, k));
        }
        m.push_back(std::move(row));
    }
    ordered_json g = ordered_json::array();
    for (Eigen::Index i = 0; i < model.cost_vector().size(); ++i) {
        g.push_back(model.cost_vector()(i));
    }
    j["w_pi_empty"] = model.w_pi_empty();
    j["expected_task_cost"] = model.expected_task_cost();
    j["expected_inverse_pathloss"] = model.expected_inv_pathloss();
    j["expected_rate_bps"] = model.expected_rate();
    j["cost_vector"] = std::move(g);
    j["transition_matrix"] = std::move(m);
    return j.dump(2) + "\n";
}

std::string run_sweep(const RunConfig& config, const std::vector<double>& grid,
                      const std::vector<PolicyKind>& policies) {
    const auto rows = sweep_arrival_rate(grid, policies, config.episodes,
                                         config.effective_horizon(), config.seed, config.params,
                                         config.dump_episodes);
    if (config.format == OutputFormat::Json) {
        ordered_json j;
        j["config"] = config_json(config);
        ordered_json arr = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json r{{"arrival_prob", row.arrival_prob}};
            ordered_json ps = ordered_json::array();
            for (const auto& s : row.policies) {
                ps.push_back(stats_json(s));
            }
            r["policies"] = std::move(ps);
            arr.push_back(std::move(r));
        }
        j["rows"] = std::move(arr);
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << csv_header(config) << "arrival_prob";
    for (PolicyKind kind : policies) {
        const std::string name(to_string(kind));
        os << ',' << name << "_cost_mean," << name << "_cost_ci," << name << "_edge_ratio,"
           << name << "_edge_ratio_ci";
    }
    os << '\n';
    for (const auto& row : rows) {
        os << format_number(row.arrival_prob);
        for (const auto& s : row.policies) {
            os << ',' << opt_number(s.per_device_cost, false) << ','
               << opt_number(s.per_device_cost, true) << ',' << opt_number(s.edge_ratio, false)
               << ',' << opt_number(s.edge_ratio, true);
        }
        os << '\n';
    }
    return os.str();
}

std::pair<std::string, bool> run_validate(const RunConfig& config) {
    const auto sandwich = check_sandwich(config.params, kValidateStates, config.episodes,
                                         config.effective_horizon(), config.seed);
    const auto oracle =
        check_oracle(tiny_model(), {PolicyKind::Baseline, PolicyKind::AllLocal, PolicyKind::AllEdge},
                     kOracleEpisodes, config.seed);
    const bool ok = sandwich.violations() == 0 && oracle.passed();

    if (config.format == OutputFormat::Json) {
        ordered_json j;
        j["config"] = config_json(config);
        ordered_json cases = ordered_json::array();
        for (const auto& c : sandwich.cases) {
            cases.push_back(ordered_json{{"devices", c.state.devices.size()},
                                         {"w_pi", c.w_pi},
                                         {"improved", estimate_json(c.improved)},
                                         {"baseline", estimate_json(c.baseline)},
                                         {"difference", estimate_json(c.difference)},
                                         {"below_w_pi", c.below_w_pi},
                                         {"below_baseline", c.below_baseline}});
        }
        j["sandwich"] = std::move(cases);
        ordered_json oc = ordered_json::array();
        for (const auto& c : oracle.cases) {
            oc.push_back(ordered_json{{"policy", std::string(to_string(c.policy))},
                                      {"exact", c.exact.discounted_g_prime},
                                      {"monte_carlo", c.monte_carlo.mean},
                                      {"std_error", c.monte_carlo.std_error},
                                      {"within_3_sigma", c.within_3_sigma}});
        }
        j["oracle"] = std::move(oc);
        j["passed"] = ok;
        return {j.dump(2) + "\n", ok};
    }
    std::ostringstream os;
    os << csv_header(config);
    os << "check,case,reference,estimate,ci95,pass\n";
    for (std::size_t i = 0; i < sandwich.cases.size(); ++i) {
        const auto& c = sandwich.cases[i];
        os << "improved_below_w_pi," << i << ',' << format_number(c.w_pi) << ','
           << format_number(c.improved.mean) << ',' << format_number(c.improved.half_width())
           << ',' << (c.below_w_pi ? 1 : 0) << '\n';
        os << "improved_below_baseline," << i << ',' << format_number(c.baseline.mean) << ','
           << format_number(c.improved.mean) << ',' << format_number(c.difference.half_width())
           << ',' << (c.below_baseline ? 1 : 0) << '\n';
    }
    for (const auto& c : oracle.cases) {
        os << "oracle," << to_string(c.policy) << ',' << format_number(c.exact.discounted_g_prime)
           << ',' << format_number(c.monte_carlo.mean) << ','
           << format_number(3.0 * c.monte_carlo.std_error) << ',' << (c.within_3_sigma ? 1 : 0)
           << '\n';
    }
    return {os.str(), ok};
}

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
    if (config.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(config.out, std::ios::binary);
    if (!file) {
        throw ConfigError(config.out + ": cannot open output file");
    }
    file << text;
    if (!file) {
        throw ConfigError(config.out + ": write failed");
    }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Offloading and uplink scheduling for a single MEC cell"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config_path, "key = value configuration file");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--policy", o.policy, "baseline|improved|alc|aec (simulate)");
    app.add_option("--pn", o.pn, "arrival probability per frame");
    app.add_option("--episodes", o.episodes, "episodes per estimate");
    app.add_option("--horizon", o.horizon, "frames per episode, or auto");
    app.add_option("--out", o.out, "output file (default stdout)");
    app.add_option("--format", o.format, "csv|json");
    app.add_flag("--dump-episodes", o.dump_episodes, "include per-episode results in JSON");

    auto* value = app.add_subcommand("value", "value function of the baseline policy (JSON)");
    auto* simulate = app.add_subcommand("simulate", "one policy at one arrival probability");
    auto* sweep = app.add_subcommand("sweep", "all configured policies over p_grid");
    auto* validate = app.add_subcommand("validate", "bound and oracle checks");
    for (auto* sub : {value, simulate, sweep, validate}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (value->parsed()) {
            const RunConfig config = resolve(o, false);
            emit(config, run_value(config), out);
            return kExitOk;
        }
        if (simulate->parsed()) {
            const RunConfig config = resolve(o, false);
            emit(config, run_sweep(config, {config.params.arrival_prob}, {config.policy}), out);
            return kExitOk;
        }
        if (sweep->parsed()) {
            const RunConfig config = resolve(o, true);
            emit(config, run_sweep(config, config.p_grid, config.policies), out);
            return kExitOk;
        }
        const RunConfig config = resolve(o, false);
        const auto [text, ok] = run_validate(config);
        emit(config, text, out);
        if (!ok) {
            err << "validation failed\n";
            return kExitValidationFailed;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

}  // namespace mec
