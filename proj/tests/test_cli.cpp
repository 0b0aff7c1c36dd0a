#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mec/cli.hpp"
#include "mec/config.hpp"
#include "mec/simulation.hpp"

using namespace mec;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "mec_sched");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("mec_cli_test_" + name);
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream in(
        "# comment line\n"
        "\n"
        "discount = 0.95   # trailing comment\n"
        "  power_weight=2\n"
        "horizon = auto\n"
        "p_grid = 0.1, 0.3\n"
        "policies = alc, improved\n"
        "format = json\n"
        "dump_episodes = true\n");
    const RunConfig c = parse_config(in, "test.cfg");
    CHECK(c.params.discount == 0.95);
    CHECK(c.params.power_weight == 2.0);
    CHECK_FALSE(c.horizon.has_value());
    CHECK(c.effective_horizon() == auto_horizon(0.95));
    CHECK(c.p_grid == std::vector<double>{0.1, 0.3});
    CHECK(c.policies == std::vector<PolicyKind>{PolicyKind::AllLocal, PolicyKind::Improved});
    CHECK(c.format == OutputFormat::Json);
    CHECK(c.dump_episodes);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config errors name the line") {
    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_config(in, "bad.cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("seed = 1\n\nfoo = 2\n").rfind("bad.cfg:3: unknown key 'foo'", 0) == 0);
    CHECK(message("discount 0.9\n").rfind("bad.cfg:1:", 0) == 0);
    CHECK(message("discount = 0.9x\n").rfind("bad.cfg:1:", 0) == 0);
    CHECK(message("d_min = 2.5\n").rfind("bad.cfg:1:", 0) == 0);
    CHECK(message("policy = optimal\n").rfind("bad.cfg:1:", 0) == 0);
    CHECK(message("format = xml\n").rfind("bad.cfg:1:", 0) == 0);

    RunConfig c;
    c.params.discount = 1.2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.p_grid = {0.0};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.episodes = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("effective config round-trips") {
    RunConfig c;
    c.params.rx_power_w = 1.2345678901234567e-13;
    c.horizon = 77;
    c.p_grid = {0.05, 1.0};
    c.out = "x.csv";
    std::string text;
    for (const auto& [k, v] : config_entries(c)) {
        text += k + " = " + v + "\n";
    }
    std::istringstream in(text);
    const RunConfig back = parse_config(in, "echo");
    CHECK(config_entries(back) == config_entries(c));
    CHECK(back.params.rx_power_w == c.params.rx_power_w);
}

TEST_CASE("exit codes") {
    const auto bad_gamma = temp_file("gamma.cfg", "discount = 1.2\n");
    Run r = run({"value", "--config", bad_gamma.string()});
    CHECK(r.code == kExitConfigError);
    CHECK(r.err.find("discount") != std::string::npos);

    const auto unknown = temp_file("unknown.cfg", "seed = 3\nbogus = 1\n");
    r = run({"sweep", "--config", unknown.string()});
    CHECK(r.code == kExitConfigError);
    CHECK(r.err.find(":2:") != std::string::npos);

    CHECK(run({"simulate", "--policy", "optimal"}).code == kExitConfigError);
    CHECK(run({"simulate", "--horizon", "-3"}).code == kExitConfigError);
    CHECK(run({"value", "--config", "/nonexistent/mec.cfg"}).code == kExitConfigError);
    CHECK(run({}).code == kExitConfigError);
    CHECK(run({"frobnicate"}).code == kExitConfigError);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("value subcommand") {
    const Run r = run({"value"});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["config"]["discount"] == "0.99");
    CHECK(j["transition_matrix"].size() == 301);
    CHECK(j["cost_vector"][0] == 0.0);
    CHECK(j["w_pi_empty"].get<double>() > 0.0);
}

TEST_CASE("simulate and sweep outputs") {
    const std::vector<std::string> common{"--episodes", "20", "--horizon", "100", "--seed", "5"};
    auto with = [&](std::vector<std::string> head) {
        head.insert(head.end(), common.begin(), common.end());
        return head;
    };

    const Run sim = run(with({"simulate", "--policy", "baseline", "--pn", "0.3"}));
    REQUIRE(sim.code == kExitOk);
    CHECK(sim.out.find("# policy = baseline\n") != std::string::npos);
    CHECK(sim.out.find("# arrival_prob = 0.3\n") != std::string::npos);
    CHECK(sim.out.find("\narrival_prob,baseline_cost_mean,baseline_cost_ci,baseline_edge_ratio,"
                       "baseline_edge_ratio_ci\n0.3,") != std::string::npos);

    const Run a = run(with({"sweep"}));
    const Run b = run(with({"sweep"}));
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.out.find("arrival_prob,baseline_cost_mean") != std::string::npos);

    const auto path = std::filesystem::temp_directory_path() / "mec_cli_test_sweep.json";
    const Run file = run(with({"sweep", "--format", "json", "--dump-episodes", "--pn", "0.4",
                               "--out", path.string()}));
    REQUIRE(file.code == kExitOk);
    CHECK(file.out.empty());
    const auto j = nlohmann::json::parse(slurp(path));
    CHECK(j["config"]["p_grid"] == "0.4");
    REQUIRE(j["rows"].size() == 1);
    CHECK(j["rows"][0]["policies"][0]["episodes"].size() == 20);
}

TEST_CASE("validate subcommand") {
    const auto cfg = temp_file("validate.cfg", "discount = 0.9\nepisodes = 300\n");
    const Run r = run({"validate", "--config", cfg.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("oracle,baseline,") != std::string::npos);
}
