#pragma once

// Run configuration: a flat `key = value` text file ('#' starts a comment)
// layered over built-in defaults, then command-line overrides.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mec/model.hpp"
#include "mec/policies.hpp"

namespace mec {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
    SystemParams params;
    std::uint64_t seed = 42;
    int episodes = 1000;
    std::optional<int> horizon;  // nullopt: auto
    std::vector<double> p_grid{0.05, 0.1, 0.2, 0.4, 0.7, 1.0};
    std::vector<PolicyKind> policies{PolicyKind::Baseline, PolicyKind::Improved,
                                     PolicyKind::AllLocal, PolicyKind::AllEdge};
    PolicyKind policy = PolicyKind::Improved;
    std::string out;  // empty: stdout
    OutputFormat format = OutputFormat::Csv;
    bool dump_episodes = false;

    int effective_horizon() const;

    /// Throws ConfigError on any invariant violation.
    void validate() const;
};

/// Sets one key; throws ConfigError with `where` as the message prefix.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   std::string_view where);

/// Parses `key = value` lines on top of `base`; errors read "source:LINE: ...".
RunConfig parse_config(std::istream& in, std::string_view source, RunConfig base = {});

RunConfig load_config(const std::string& path, RunConfig base = {});

/// The effective configuration as ordered key/value pairs, in the same
/// syntax parse_config accepts.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

/// Shortest round-trip decimal form.
std::string format_number(double value);

}  // namespace mec
