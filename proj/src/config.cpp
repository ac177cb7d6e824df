#include "driftbench/config.hpp"

#include "driftbench/rng.hpp"
#include "driftbench/runio.hpp"
#include "driftbench/toml_lite.hpp"

#include <algorithm>

namespace driftbench::config {

namespace {

double get_double(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("config: missing field '") + key + "'");
    if (!j[key].is_number()) throw ConfigError(std::string("config: '") + key + "' must be numeric");
    return j[key].get<double>();
}

int64_t get_int(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw ConfigError(std::string("config: '") + key + "' must be an integer");
    return j[key].get<int64_t>();
}

} // namespace

synth::SynthConfig synth_config_from_json(const nlohmann::json& j) {
    synth::SynthConfig cfg;
    cfg.d = static_cast<int32_t>(get_int(j, "d"));
    cfg.periods = static_cast<int>(get_int(j, "periods"));
    cfg.samples_per_batch = static_cast<int>(get_int(j, "samples_per_batch"));
    cfg.seed = j.contains("seed") ? j["seed"].get<uint64_t>() : 0;

    if (!j.contains("malware_prior")) throw ConfigError("synth config: missing malware_prior");
    if (j["malware_prior"].is_array()) {
        cfg.malware_prior = j["malware_prior"].get<std::vector<double>>();
    } else {
        cfg.malware_prior.assign(static_cast<size_t>(std::max(cfg.periods, 0)),
                                 j["malware_prior"].get<double>());
    }

    double p_mal_default = 0.0, p_good_default = 0.0;
    if (j.contains("features")) {
        const auto& f = j["features"];
        if (f.contains("p_mal_default")) p_mal_default = f["p_mal_default"].get<double>();
        if (f.contains("p_good_default")) p_good_default = f["p_good_default"].get<double>();
    }
    cfg.feature_spec.assign(static_cast<size_t>(std::max(cfg.d, 0)),
                            {p_mal_default, p_good_default});
    if (j.contains("features") && j["features"].contains("override")) {
        for (const auto& o : j["features"]["override"]) {
            int64_t idx = get_int(o, "index");
            if (idx < 0 || idx >= cfg.d)
                throw ConfigError("synth config: feature override index out of range");
            cfg.feature_spec[static_cast<size_t>(idx)] = {get_double(o, "p_mal"),
                                                          get_double(o, "p_good")};
        }
    }
    if (j.contains("drift")) {
        for (const auto& e : j["drift"])
            cfg.drift_events.push_back({static_cast<int>(get_int(e, "period")),
                                        static_cast<int32_t>(get_int(e, "feature"))});
    }
    cfg.validate();
    return cfg;
}

synth::SynthConfig load_synth_config(const std::filesystem::path& path) {
    return synth_config_from_json(toml_lite::load_config_file(path));
}

namespace {

detector::TrainConfig train_config_from_json(const nlohmann::json& j) {
    detector::TrainConfig cfg; // defaults stand for omitted fields
    if (j.contains("l2_lambda")) cfg.l2_lambda = j["l2_lambda"].get<double>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("class_weighting"))
        cfg.class_weighting =
            detector::class_weighting_from_string(j["class_weighting"].get<std::string>());
    cfg.validate();
    return cfg;
}

std::string format_budget(double b) {
    return runio::format_double(b);
}

} // namespace

RunSpec load_run_spec(const std::filesystem::path& path) {
    nlohmann::json j = toml_lite::load_config_file(path);
    const auto base = path.parent_path();

    RunSpec spec;
    if (j.contains("manifest")) spec.manifest = base / j["manifest"].get<std::string>();
    if (j.contains("synth")) spec.synth_config = base / j["synth"].get<std::string>();
    if (spec.manifest.empty() == spec.synth_config.empty())
        throw ConfigError("run spec: exactly one of 'manifest' or 'synth' is required");
    spec.out_dir = j.contains("out_dir") ? base / j["out_dir"].get<std::string>()
                                         : base / "results";
    spec.seed = j.contains("seed") ? j["seed"].get<uint64_t>() : 0;

    pipeline::ExperimentConfig prototype;
    if (j.contains("train")) prototype.train = train_config_from_json(j["train"]);
    if (j.contains("fpr_target")) prototype.fpr_target = j["fpr_target"].get<double>();
    if (j.contains("history")) {
        const auto& h = j["history"];
        if (h.is_string() && h.get<std::string>() == "full") {
            prototype.history = {pipeline::HistoryPolicy::Kind::Full, 0};
        } else if (h.is_number_integer()) {
            prototype.history = {pipeline::HistoryPolicy::Kind::Window, h.get<int>()};
        } else {
            throw ConfigError("run spec: history must be \"full\" or a window size");
        }
    }

    const nlohmann::json grid = j.contains("grid") ? j["grid"] : nlohmann::json::object();
    std::vector<std::string> policies =
        grid.contains("policies") ? grid["policies"].get<std::vector<std::string>>()
                                  : std::vector<std::string>{};
    std::vector<std::string> al_strategies =
        grid.contains("al_strategies") ? grid["al_strategies"].get<std::vector<std::string>>()
                                       : std::vector<std::string>{};
    std::vector<double> al_budgets = grid.contains("al_budgets")
                                         ? grid["al_budgets"].get<std::vector<double>>()
                                         : std::vector<double>{0.01, 0.02, 0.05, 0.10};
    std::vector<std::string> ssl_strategies =
        grid.contains("ssl_strategies") ? grid["ssl_strategies"].get<std::vector<std::string>>()
                                        : std::vector<std::string>{};
    std::vector<double> ssl_budgets = grid.contains("ssl_budgets")
                                          ? grid["ssl_budgets"].get<std::vector<double>>()
                                          : std::vector<double>{0.10, 0.20, 0.40, 0.80};

    active::ALConfig al_proto;
    if (grid.contains("coreset_init")) {
        std::string init = grid["coreset_init"].get<std::string>();
        if (init == "labeled")
            al_proto.coreset_init = active::CoresetInit::Labeled;
        else if (init == "empty")
            al_proto.coreset_init = active::CoresetInit::Empty;
        else
            throw ConfigError("run spec: coreset_init must be 'labeled' or 'empty'");
    }
    if (grid.contains("clue_max_iter")) al_proto.clue_max_iter = grid["clue_max_iter"].get<int>();
    if (grid.contains("normalize_features"))
        al_proto.normalize_features = grid["normalize_features"].get<bool>();
    if (grid.contains("clue_tol")) al_proto.clue_tol = grid["clue_tol"].get<double>();
    if (grid.contains("eap_candidate_cap"))
        al_proto.eap_candidate_cap = grid["eap_candidate_cap"].get<int>();

    semisup::SSLConfig ssl_proto;
    if (grid.contains("at_malware_share"))
        ssl_proto.at_malware_share = grid["at_malware_share"].get<double>();

    auto add = [&](const std::string& label, pipeline::ExperimentConfig cfg) {
        for (const auto& existing : spec.configs)
            if (existing.label == label) return;
        cfg.seed = mix_seed(spec.seed, runio::fnv1a64(label));
        cfg.validate();
        spec.configs.push_back({label, std::move(cfg)});
    };

    for (const std::string& pol : policies) {
        pipeline::Policy policy = pipeline::policy_from_string(pol);
        switch (policy) {
        case pipeline::Policy::NR:
        case pipeline::Policy::FL: {
            pipeline::ExperimentConfig cfg = prototype;
            cfg.policy = policy;
            add(pol, std::move(cfg));
            break;
        }
        case pipeline::Policy::AL_ONLY: {
            if (al_strategies.empty())
                throw ConfigError("run spec: AL_ONLY requires grid.al_strategies");
            for (const std::string& strat : al_strategies)
                for (double budget : al_budgets) {
                    pipeline::ExperimentConfig cfg = prototype;
                    cfg.policy = policy;
                    cfg.al = al_proto;
                    cfg.al->strategy = active::strategy_from_string(strat);
                    cfg.al->budget_fraction = budget;
                    add("AL-" + strat + "-" + format_budget(budget), std::move(cfg));
                }
            break;
        }
        case pipeline::Policy::SSL_ONLY: {
            if (ssl_strategies.empty())
                throw ConfigError("run spec: SSL_ONLY requires grid.ssl_strategies");
            for (const std::string& strat : ssl_strategies)
                for (double budget : ssl_budgets) {
                    pipeline::ExperimentConfig cfg = prototype;
                    cfg.policy = policy;
                    cfg.ssl = ssl_proto;
                    cfg.ssl->strategy = semisup::ssl_strategy_from_string(strat);
                    cfg.ssl->budget_fraction = budget;
                    add("SSL-" + strat + "-" + format_budget(budget), std::move(cfg));
                }
            break;
        }
        case pipeline::Policy::AL_SSL: {
            if (al_strategies.empty() || ssl_strategies.empty())
                throw ConfigError("run spec: AL_SSL requires AL and SSL strategies");
            for (const std::string& al_strat : al_strategies)
                for (double al_budget : al_budgets)
                    for (const std::string& ssl_strat : ssl_strategies)
                        for (double ssl_budget : ssl_budgets) {
                            pipeline::ExperimentConfig cfg = prototype;
                            cfg.policy = policy;
                            cfg.al = al_proto;
                            cfg.al->strategy = active::strategy_from_string(al_strat);
                            cfg.al->budget_fraction = al_budget;
                            cfg.ssl = ssl_proto;
                            cfg.ssl->strategy = semisup::ssl_strategy_from_string(ssl_strat);
                            cfg.ssl->budget_fraction = ssl_budget;
                            add("ALSSL-" + al_strat + "-" + format_budget(al_budget) + "-" +
                                    ssl_strat + "-" + format_budget(ssl_budget),
                                std::move(cfg));
                        }
            break;
        }
        }
    }

    // reference baselines always run
    {
        pipeline::ExperimentConfig nr = prototype;
        nr.policy = pipeline::Policy::NR;
        add("NR", std::move(nr));
        pipeline::ExperimentConfig fl = prototype;
        fl.policy = pipeline::Policy::FL;
        add("FL", std::move(fl));
    }
    if (spec.configs.empty()) throw ConfigError("run spec: no experiment configs");
    return spec;
}

nlohmann::json experiment_config_to_json(const pipeline::ExperimentConfig& cfg) {
    nlohmann::json j;
    j["policy"] = pipeline::to_string(cfg.policy);
    j["fpr_target"] = cfg.fpr_target;
    j["seed"] = cfg.seed;
    j["train"] = {{"l2_lambda", cfg.train.l2_lambda},
                  {"learning_rate", cfg.train.learning_rate},
                  {"epochs", cfg.train.epochs},
                  {"class_weighting", detector::to_string(cfg.train.class_weighting)}};
    j["history"] = cfg.history.kind == pipeline::HistoryPolicy::Kind::Full
                       ? nlohmann::json{{"kind", "full"}}
                       : nlohmann::json{{"kind", "window"}, {"size", cfg.history.window}};
    if (cfg.al) {
        j["al"] = {{"strategy", active::to_string(cfg.al->strategy)},
                   {"budget_fraction", cfg.al->budget_fraction},
                   {"coreset_init",
                    cfg.al->coreset_init == active::CoresetInit::Labeled ? "labeled" : "empty"},
                   {"clue_max_iter", cfg.al->clue_max_iter},
                   {"clue_tol", cfg.al->clue_tol},
                   {"eap_candidate_cap", cfg.al->eap_candidate_cap},
                   {"normalize_features", cfg.al->normalize_features}};
    }
    if (cfg.ssl) {
        j["ssl"] = {{"strategy", semisup::to_string(cfg.ssl->strategy)},
                    {"budget_fraction", cfg.ssl->budget_fraction},
                    {"at_malware_share", cfg.ssl->at_malware_share}};
    }
    return j;
}

} // namespace driftbench::config
