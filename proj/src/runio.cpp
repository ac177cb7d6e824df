#include "driftbench/runio.hpp"

#include "driftbench/config.hpp"

#include <charconv>
#include <fstream>

namespace driftbench::runio {

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex16(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

namespace {

nlohmann::json opt_to_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

} // namespace

nlohmann::json eval_record_to_json(const metrics::EvalRecord& rec) {
    return {{"t", rec.period},
            {"n", rec.n},
            {"n_mal", rec.n_mal},
            {"n_good", rec.n_good},
            {"tau", rec.tau},
            {"tp", rec.counts.tp},
            {"fp", rec.counts.fp},
            {"tn", rec.counts.tn},
            {"fn", rec.counts.fn},
            {"recall", opt_to_json(rec.recall)},
            {"f1", opt_to_json(rec.f1)},
            {"ap", opt_to_json(rec.ap)}};
}

metrics::EvalRecord eval_record_from_json(const nlohmann::json& j) {
    metrics::EvalRecord rec;
    rec.period = j.at("t").get<int>();
    rec.n = j.at("n").get<int64_t>();
    rec.n_mal = j.at("n_mal").get<int64_t>();
    rec.n_good = j.at("n_good").get<int64_t>();
    rec.tau = j.at("tau").get<double>();
    rec.counts = {j.at("tp").get<int64_t>(), j.at("fp").get<int64_t>(),
                  j.at("tn").get<int64_t>(), j.at("fn").get<int64_t>()};
    rec.recall = opt_from_json(j.at("recall"));
    rec.f1 = opt_from_json(j.at("f1"));
    rec.ap = opt_from_json(j.at("ap"));
    return rec;
}

nlohmann::json steplog_to_json(const pipeline::StepLog& log) {
    nlohmann::json added = nlohmann::json::array();
    for (const auto& a : log.added)
        added.push_back(
            {{"id", a.id}, {"label", a.label}, {"prov", pipeline::to_string(a.provenance)}});
    nlohmann::json j = {{"t", log.t},
                        {"eval", eval_record_to_json(log.eval)},
                        {"n_al", log.n_al},
                        {"n_ssl", log.n_ssl},
                        {"al_seconds", log.al_seconds},
                        {"train_seconds", log.train_seconds},
                        {"beta", opt_to_json(log.beta)},
                        {"checkpoint", log.checkpoint},
                        {"eval_seq", log.eval_seq},
                        {"train_size", log.train_size},
                        {"added", std::move(added)}};
    j["first_label_seq"] = log.first_label_seq ? nlohmann::json(*log.first_label_seq)
                                               : nlohmann::json(nullptr);
    if (log.stability) {
        j["stability"] = {{"preserved", log.stability->preserved},
                          {"flipped", log.stability->flipped},
                          {"half_significant", log.stability->half_significant},
                          {"both_null", log.stability->both_null}};
    } else {
        j["stability"] = nullptr;
    }
    return j;
}

pipeline::StepLog steplog_from_json(const nlohmann::json& j) {
    pipeline::StepLog log;
    log.t = j.at("t").get<int>();
    log.eval = eval_record_from_json(j.at("eval"));
    log.n_al = j.at("n_al").get<size_t>();
    log.n_ssl = j.at("n_ssl").get<size_t>();
    log.al_seconds = j.at("al_seconds").get<double>();
    log.train_seconds = j.at("train_seconds").get<double>();
    log.beta = opt_from_json(j.at("beta"));
    log.checkpoint = j.at("checkpoint").get<std::string>();
    log.eval_seq = j.at("eval_seq").get<uint64_t>();
    if (!j.at("first_label_seq").is_null())
        log.first_label_seq = j["first_label_seq"].get<uint64_t>();
    log.train_size = j.at("train_size").get<size_t>();
    if (!j.at("stability").is_null()) {
        driftstat::StabilityCounts c;
        c.preserved = j["stability"].at("preserved").get<int64_t>();
        c.flipped = j["stability"].at("flipped").get<int64_t>();
        c.half_significant = j["stability"].at("half_significant").get<int64_t>();
        c.both_null = j["stability"].at("both_null").get<int64_t>();
        c.beta = log.beta.value_or(0.0);
        log.stability = c;
    }
    for (const auto& a : j.at("added"))
        log.added.push_back({a.at("id").get<std::string>(), a.at("label").get<int>(),
                             pipeline::provenance_from_string(a.at("prov").get<std::string>())});
    return log;
}

void write_steplogs(const std::filesystem::path& path,
                    const std::vector<pipeline::StepLog>& steps) {
    std::string content;
    for (const auto& s : steps) {
        content += steplog_to_json(s).dump();
        content += '\n';
    }
    atomic_write_file(path, content);
}

std::vector<pipeline::StepLog> read_steplogs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing step log: " + path.string());
    std::vector<pipeline::StepLog> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(steplog_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

} // namespace

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "config,policy,strategy,al_budget,ssl_budget,t,budget,recall,f1,beta,train_size\n";
    for (const auto& r : rows) {
        out += r.config;
        out += ',';
        out += r.policy;
        out += ',';
        out += r.strategy;
        out += ',';
        out += format_double(r.al_budget);
        out += ',';
        out += format_double(r.ssl_budget);
        out += ',';
        out += std::to_string(r.t);
        out += ',';
        out += format_double(r.budget);
        out += ',';
        out += opt_cell(r.recall);
        out += ',';
        out += opt_cell(r.f1);
        out += ',';
        out += opt_cell(r.beta);
        out += ',';
        out += std::to_string(r.train_size);
        out += '\n';
    }
    return out;
}

void write_run_manifest(const std::filesystem::path& path, const RunManifest& m) {
    nlohmann::json configs = nlohmann::json::array();
    for (const auto& c : m.configs) {
        nlohmann::json j = {{"label", c.label},
                            {"dir", c.dir},
                            {"hash", c.hash},
                            {"config", config::experiment_config_to_json(c.config)},
                            {"failed", c.failed}};
        j["error"] = c.error;
        configs.push_back(std::move(j));
    }
    nlohmann::json j = {{"stream_manifest", m.stream_manifest},
                        {"synth_config", m.synth_config},
                        {"seed", m.seed},
                        {"configs", std::move(configs)}};
    atomic_write_file(path, j.dump(2) + "\n");
}

namespace {

pipeline::ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    pipeline::ExperimentConfig cfg;
    cfg.policy = pipeline::policy_from_string(j.at("policy").get<std::string>());
    cfg.fpr_target = j.at("fpr_target").get<double>();
    cfg.seed = j.at("seed").get<uint64_t>();
    const auto& t = j.at("train");
    cfg.train.l2_lambda = t.at("l2_lambda").get<double>();
    cfg.train.learning_rate = t.at("learning_rate").get<double>();
    cfg.train.epochs = t.at("epochs").get<int>();
    cfg.train.class_weighting =
        detector::class_weighting_from_string(t.at("class_weighting").get<std::string>());
    const auto& h = j.at("history");
    if (h.at("kind").get<std::string>() == "full")
        cfg.history = {pipeline::HistoryPolicy::Kind::Full, 0};
    else
        cfg.history = {pipeline::HistoryPolicy::Kind::Window, h.at("size").get<int>()};
    if (j.contains("al") && !j["al"].is_null()) {
        active::ALConfig al;
        al.strategy = active::strategy_from_string(j["al"].at("strategy").get<std::string>());
        al.budget_fraction = j["al"].at("budget_fraction").get<double>();
        al.coreset_init = j["al"].at("coreset_init").get<std::string>() == "labeled"
                              ? active::CoresetInit::Labeled
                              : active::CoresetInit::Empty;
        al.clue_max_iter = j["al"].at("clue_max_iter").get<int>();
        al.clue_tol = j["al"].at("clue_tol").get<double>();
        al.eap_candidate_cap = j["al"].at("eap_candidate_cap").get<int>();
        al.normalize_features = j["al"].at("normalize_features").get<bool>();
        cfg.al = al;
    }
    if (j.contains("ssl") && !j["ssl"].is_null()) {
        semisup::SSLConfig ssl;
        ssl.strategy =
            semisup::ssl_strategy_from_string(j["ssl"].at("strategy").get<std::string>());
        ssl.budget_fraction = j["ssl"].at("budget_fraction").get<double>();
        ssl.at_malware_share = j["ssl"].at("at_malware_share").get<double>();
        cfg.ssl = ssl;
    }
    return cfg;
}

} // namespace

RunManifest read_run_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing run manifest: " + path.string());
    nlohmann::json j;
    in >> j;
    RunManifest m;
    m.stream_manifest = j.at("stream_manifest").get<std::string>();
    m.synth_config = j.at("synth_config").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    for (const auto& c : j.at("configs")) {
        RunConfigInfo info;
        info.label = c.at("label").get<std::string>();
        info.dir = c.at("dir").get<std::string>();
        info.hash = c.at("hash").get<std::string>();
        info.config = experiment_config_from_json(c.at("config"));
        info.failed = c.at("failed").get<bool>();
        info.error = c.at("error").get<std::string>();
        m.configs.push_back(std::move(info));
    }
    return m;
}

} // namespace driftbench::runio
