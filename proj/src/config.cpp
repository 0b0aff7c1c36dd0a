#include "mec/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>

#include "mec/simulation.hpp"

namespace mec {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::string_view where, const std::string& what) {
    throw ConfigError(std::string(where) + ": " + what);
}

double parse_double(std::string_view text, std::string_view where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(where, "expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

template <class Int>
Int parse_int(std::string_view text, std::string_view where) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(where, "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> split_list(std::string_view text) {
    std::vector<std::string_view> items;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        if (!item.empty()) {
            items.push_back(item);
        }
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return items;
}

bool parse_bool(std::string_view text, std::string_view where) {
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    fail(where, "expected true or false, got '" + std::string(text) + "'");
}

PolicyKind parse_policy_or_fail(std::string_view text, std::string_view where) {
    if (auto kind = parse_policy(text)) {
        return *kind;
    }
    fail(where, "unknown policy '" + std::string(text) + "' (baseline|improved|alc|aec)");
}

struct Key {
    std::string_view name;
    std::function<void(RunConfig&, std::string_view, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <double SystemParams::*Field>
Key real_param(std::string_view name) {
    return Key{name,
               [](RunConfig& c, std::string_view v, std::string_view w) {
                   c.params.*Field = parse_double(v, w);
               },
               [](const RunConfig& c) { return format_number(c.params.*Field); }};
}

template <int SystemParams::*Field>
Key int_param(std::string_view name) {
    return Key{name,
               [](RunConfig& c, std::string_view v, std::string_view w) {
                   c.params.*Field = parse_int<int>(v, w);
               },
               [](const RunConfig& c) { return std::to_string(c.params.*Field); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        real_param<&SystemParams::frame_duration_s>("frame_duration_s"),
        real_param<&SystemParams::bandwidth_hz>("bandwidth_hz"),
        real_param<&SystemParams::segment_bits>("segment_bits"),
        real_param<&SystemParams::noise_power_w>("noise_power_w"),
        real_param<&SystemParams::arrival_prob>("arrival_prob"),
        real_param<&SystemParams::discount>("discount"),
        real_param<&SystemParams::power_weight>("power_weight"),
        real_param<&SystemParams::rx_power_w>("rx_power_w"),
        real_param<&SystemParams::kappa>("kappa"),
        int_param<&SystemParams::d_min>("d_min"),
        int_param<&SystemParams::d_max>("d_max"),
        real_param<&SystemParams::f_min_hz>("f_min_hz"),
        real_param<&SystemParams::f_max_hz>("f_max_hz"),
        real_param<&SystemParams::cycles_per_bit_min>("cycles_per_bit_min"),
        real_param<&SystemParams::cycles_per_bit_max>("cycles_per_bit_max"),
        real_param<&SystemParams::pathloss_exponent>("pathloss_exponent"),
        real_param<&SystemParams::pathloss_ref_gain>("pathloss_ref_gain"),
        real_param<&SystemParams::cell_radius_m>("cell_radius_m"),
        real_param<&SystemParams::min_distance_m>("min_distance_m"),
        real_param<&SystemParams::max_tx_power_w>("max_tx_power_w"),
        Key{"seed",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                c.seed = parse_int<std::uint64_t>(v, w);
            },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
        Key{"episodes",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                c.episodes = parse_int<int>(v, w);
            },
            [](const RunConfig& c) { return std::to_string(c.episodes); }},
        Key{"horizon",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                if (v == "auto") {
                    c.horizon.reset();
                } else {
                    c.horizon = parse_int<int>(v, w);
                }
            },
            [](const RunConfig& c) {
                return c.horizon ? std::to_string(*c.horizon) : std::string("auto");
            }},
        Key{"p_grid",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                c.p_grid.clear();
                for (auto item : split_list(v)) {
                    c.p_grid.push_back(parse_double(item, w));
                }
            },
            [](const RunConfig& c) {
                std::string s;
                for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
                    s += (i ? ", " : "") + format_number(c.p_grid[i]);
                }
                return s;
            }},
        Key{"policies",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                c.policies.clear();
                for (auto item : split_list(v)) {
                    c.policies.push_back(parse_policy_or_fail(item, w));
                }
            },
            [](const RunConfig& c) {
                std::string s;
                for (std::size_t i = 0; i < c.policies.size(); ++i) {
                    s += (i ? ", " : "") + std::string(to_string(c.policies[i]));
                }
                return s;
            }},
        Key{"policy",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                c.policy = parse_policy_or_fail(v, w);
            },
            [](const RunConfig& c) { return std::string(to_string(c.policy)); }},
        Key{"out", [](RunConfig& c, std::string_view v, std::string_view) { c.out = v; },
            [](const RunConfig& c) { return c.out; }},
        Key{"format",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                if (v == "csv") {
                    c.format = OutputFormat::Csv;
                } else if (v == "json") {
                    c.format = OutputFormat::Json;
                } else {
                    fail(w, "format must be csv or json");
                }
            },
            [](const RunConfig& c) {
                return std::string(c.format == OutputFormat::Csv ? "csv" : "json");
            }},
        Key{"dump_episodes",
            [](RunConfig& c, std::string_view v, std::string_view w) {
                c.dump_episodes = parse_bool(v, w);
            },
            [](const RunConfig& c) { return std::string(c.dump_episodes ? "true" : "false"); }},
    };
    return table;
}

}  // namespace

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

int RunConfig::effective_horizon() const {
    return horizon ? *horizon : auto_horizon(params.discount);
}

void RunConfig::validate() const {
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (episodes < 2) {
        throw ConfigError("invalid run settings: episodes must be >= 2");
    }
    if (horizon && *horizon < 1) {
        throw ConfigError("invalid run settings: horizon must be >= 1 or auto");
    }
    if (p_grid.empty()) {
        throw ConfigError("invalid run settings: p_grid is empty");
    }
    for (double p : p_grid) {
        if (!(p > 0.0 && p <= 1.0)) {
            throw ConfigError("invalid run settings: p_grid values must lie in (0, 1]");
        }
    }
    if (policies.empty()) {
        throw ConfigError("invalid run settings: policies is empty");
    }
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   std::string_view where) {
    for (const auto& k : keys()) {
        if (k.name == key) {
            k.set(config, value, where);
            return;
        }
    }
    fail(where, "unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::istream& in, std::string_view source, RunConfig base) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) {
            continue;
        }
        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            fail(where, "expected 'key = value'");
        }
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty()) {
            fail(where, "expected 'key = value'");
        }
        apply_setting(base, key, value, where);
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    return parse_config(in, path, std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys()) {
        out.emplace_back(std::string(k.name), k.get(config));
    }
    return out;
}

}  // namespace mec
