#include "driftbench/config.hpp"

#include <doctest.h>

#include <fstream>
#include <set>

using namespace driftbench;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    fs::path dir = fs::temp_directory_path() / "driftbench_config";
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    return p;
}

} // namespace

TEST_CASE("synth config loads from toml and json alike") {
    const char* toml = R"(
d = 4
periods = 3
samples_per_batch = 50
seed = 9
malware_prior = 0.25

[features]
p_mal_default = 0.1
p_good_default = 0.2

[[features.override]]
index = 2
p_mal = 0.9
p_good = 0.05

[[drift]]
period = 1
feature = 2
)";
    synth::SynthConfig cfg = config::load_synth_config(write_temp("synth.toml", toml));
    CHECK(cfg.d == 4);
    CHECK(cfg.periods == 3);
    CHECK(cfg.malware_prior == std::vector<double>(3, 0.25)); // scalar broadcast
    CHECK(cfg.feature_spec[0].p_mal == 0.1);
    CHECK(cfg.feature_spec[2].p_mal == 0.9);
    REQUIRE(cfg.drift_events.size() == 1);
    CHECK(cfg.drift_events[0].feature == 2);

    synth::SynthConfig cfg2 = config::load_synth_config(write_temp("synth.json", R"({
        "d": 4, "periods": 3, "samples_per_batch": 50, "seed": 9,
        "malware_prior": [0.25, 0.25, 0.25],
        "features": {"p_mal_default": 0.1, "p_good_default": 0.2,
                     "override": [{"index": 2, "p_mal": 0.9, "p_good": 0.05}]},
        "drift": [{"period": 1, "feature": 2}]})"));
    CHECK(cfg2.malware_prior == cfg.malware_prior);
    CHECK(cfg2.feature_spec[2].p_good == cfg.feature_spec[2].p_good);

    CHECK_THROWS_AS(
        config::load_synth_config(write_temp("bad.toml", "d = 4\nperiods = 2\n")),
        ConfigError);
}

TEST_CASE("run spec expands the grid and appends the baselines") {
    write_temp("manifest.json", "{}"); // existence is checked later, at load time
    const char* toml = R"(
manifest = "manifest.json"
out_dir = "results"
seed = 77
fpr_target = 0.02
history = "full"

[train]
epochs = 25
class_weighting = "none"

[grid]
policies = ["AL_ONLY", "SSL_ONLY", "NR"]
al_strategies = ["MS", "BADGE"]
al_budgets = [0.01, 0.1]
ssl_strategies = ["AT"]
ssl_budgets = [0.2]
at_malware_share = 0.75
)";
    config::RunSpec spec = config::load_run_spec(write_temp("runspec.toml", toml));
    // 4 AL + 1 SSL + NR (listed once) + FL
    CHECK(spec.configs.size() == 7);
    CHECK(spec.seed == 77);

    size_t nr = 0, fl = 0;
    for (const auto& nc : spec.configs) {
        nc.config.validate();
        CHECK(nc.config.fpr_target == 0.02);
        CHECK(nc.config.train.epochs == 25);
        if (nc.config.policy == pipeline::Policy::NR) ++nr;
        if (nc.config.policy == pipeline::Policy::FL) ++fl;
        if (nc.config.ssl) CHECK(nc.config.ssl->at_malware_share == 0.75);
    }
    CHECK(nr == 1);
    CHECK(fl == 1);

    // labels are stable and distinct
    std::set<std::string> labels;
    for (const auto& nc : spec.configs) labels.insert(nc.label);
    CHECK(labels.size() == spec.configs.size());
    CHECK(labels.count("AL-MS-0.01") == 1);
    CHECK(labels.count("SSL-AT-0.2") == 1);

    // per-config seeds derive deterministically from the global seed
    config::RunSpec again = config::load_run_spec(write_temp("runspec.toml", toml));
    for (size_t i = 0; i < spec.configs.size(); ++i)
        CHECK(again.configs[i].config.seed == spec.configs[i].config.seed);
}

TEST_CASE("run spec defaults follow the standard budget grids") {
    write_temp("manifest.json", "{}");
    const char* toml = R"(
manifest = "manifest.json"
[grid]
policies = ["AL_ONLY"]
al_strategies = ["RS"]
)";
    config::RunSpec spec = config::load_run_spec(write_temp("runspec2.toml", toml));
    std::set<double> budgets;
    for (const auto& nc : spec.configs)
        if (nc.config.al) budgets.insert(nc.config.al->budget_fraction);
    CHECK(budgets == std::set<double>{0.01, 0.02, 0.05, 0.10});
}

TEST_CASE("run spec rejects inconsistent sources") {
    CHECK_THROWS_AS(config::load_run_spec(write_temp("none.toml", "out_dir = \"x\"\n")),
                    ConfigError);
    CHECK_THROWS_AS(config::load_run_spec(write_temp(
                        "both.toml", "manifest = \"a\"\nsynth = \"b\"\n")),
                    ConfigError);
    CHECK_THROWS_AS(
        config::load_run_spec(write_temp(
            "nostrat.toml", "manifest = \"m\"\n[grid]\npolicies = [\"AL_ONLY\"]\n")),
        ConfigError);
}
