#include "driftbench/commands.hpp"

#include "driftbench/config.hpp"
#include "driftbench/corpus.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/runio.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

namespace driftbench::commands {

namespace {

using runio::format_double;

TemporalStream load_stream_source(const runio::RunManifest& m) {
    if (!m.synth_config.empty())
        return synth::generate_stream(config::load_synth_config(m.synth_config));
    return corpus::load_manifest(m.stream_manifest);
}

double headline_budget(const pipeline::ExperimentConfig& cfg) {
    switch (cfg.policy) {
    case pipeline::Policy::NR: return 0.0;
    case pipeline::Policy::FL: return 1.0;
    case pipeline::Policy::SSL_ONLY: return cfg.ssl->budget_fraction;
    default: return cfg.al->budget_fraction;
    }
}

std::string strategy_label(const pipeline::ExperimentConfig& cfg) {
    std::string s;
    if (cfg.al) s += active::to_string(cfg.al->strategy);
    if (cfg.ssl) {
        if (!s.empty()) s += "+";
        s += semisup::to_string(cfg.ssl->strategy);
    }
    return s;
}

} // namespace

std::filesystem::path cmd_gen(const std::filesystem::path& config_path,
                              const std::filesystem::path& out_dir) {
    synth::SynthConfig cfg = config::load_synth_config(config_path);
    TemporalStream stream = synth::generate_stream(cfg);
    std::filesystem::path manifest = corpus::write_stream(stream, out_dir);

    std::printf("generated stream: T=%d d=%d samples/batch=%d seed=%llu\n", stream.horizon(),
                stream.d, cfg.samples_per_batch, static_cast<unsigned long long>(cfg.seed));
    for (int t = 0; t <= stream.horizon(); ++t) {
        const Batch& b = stream.batch_at(t);
        int64_t mal = 0;
        for (const Sample& s : b.samples) mal += s.true_label.value_or(0);
        std::printf("  t=%d n=%zu malware_prior=%.4f\n", t, b.samples.size(),
                    static_cast<double>(mal) / static_cast<double>(b.samples.size()));
    }
    std::printf("manifest: %s\n", manifest.string().c_str());
    return manifest;
}

RunOutcome cmd_run(const std::filesystem::path& run_spec_path,
                   const std::optional<std::filesystem::path>& out_override,
                   std::optional<uint64_t> seed_override) {
    config::RunSpec spec = config::load_run_spec(run_spec_path);
    if (out_override) spec.out_dir = *out_override;
    if (seed_override) {
        spec.seed = *seed_override;
        for (auto& nc : spec.configs)
            nc.config.seed = mix_seed(spec.seed, runio::fnv1a64(nc.label));
    }

    TemporalStream stream;
    runio::RunManifest manifest;
    manifest.seed = spec.seed;
    if (!spec.synth_config.empty()) {
        stream = synth::generate_stream(config::load_synth_config(spec.synth_config));
        manifest.synth_config = std::filesystem::absolute(spec.synth_config).string();
    } else {
        stream = corpus::load_manifest(spec.manifest);
        manifest.stream_manifest = std::filesystem::absolute(spec.manifest).string();
    }

    std::filesystem::create_directories(spec.out_dir);

    RunOutcome outcome;
    outcome.results_dir = spec.out_dir;
    std::vector<runio::SummaryRow> rows;

    for (const config::NamedConfig& nc : spec.configs) {
        std::string hash = runio::hex16(
            runio::fnv1a64(config::experiment_config_to_json(nc.config).dump()));
        runio::RunConfigInfo info;
        info.label = nc.label;
        info.hash = hash;
        info.dir = nc.label + "_" + hash.substr(0, 8);
        info.config = nc.config;

        std::filesystem::path cfg_dir = spec.out_dir / info.dir;
        std::filesystem::path log_path = cfg_dir / "steplog.jsonl";
        try {
            if (!std::filesystem::exists(log_path)) { // cached runs are reused
                std::filesystem::create_directories(cfg_dir);
                pipeline::RunResult result = pipeline::run_experiment(stream, nc.config, &cfg_dir);
                runio::write_steplogs(log_path, result.steps);
            }
            std::vector<pipeline::StepLog> steps = runio::read_steplogs(log_path);
            for (const pipeline::StepLog& s : steps) {
                runio::SummaryRow row;
                row.config = nc.label;
                row.policy = pipeline::to_string(nc.config.policy);
                row.strategy = strategy_label(nc.config);
                row.al_budget = nc.config.al ? nc.config.al->budget_fraction : 0.0;
                row.ssl_budget = nc.config.ssl ? nc.config.ssl->budget_fraction : 0.0;
                row.t = s.t;
                row.budget = headline_budget(nc.config);
                row.recall = s.eval.recall;
                row.f1 = s.eval.f1;
                row.beta = s.beta;
                row.train_size = s.train_size;
                rows.push_back(std::move(row));
            }
        } catch (const std::exception& e) {
            info.failed = true;
            info.error = e.what();
            outcome.failed.push_back(nc.label);
            runio::atomic_write_file(cfg_dir / "error.txt", std::string(e.what()) + "\n");
            std::fprintf(stderr, "config %s failed: %s\n", nc.label.c_str(), e.what());
        }
        manifest.configs.push_back(std::move(info));
    }

    runio::atomic_write_file(spec.out_dir / "summary.csv", runio::summary_csv(rows));
    runio::write_run_manifest(spec.out_dir / "run.json", manifest);
    std::printf("results: %s (%zu configs, %zu failed)\n", spec.out_dir.string().c_str(),
                manifest.configs.size(), outcome.failed.size());
    return outcome;
}

namespace {

// Replays the logged additions to rebuild each step's training set, exactly
// as the pipeline maintained it (including window trimming).
std::vector<driftstat::LabeledSet> rebuild_training_sets(
    const TemporalStream& stream, const pipeline::ExperimentConfig& cfg,
    const std::vector<pipeline::StepLog>& steps) {
    std::unordered_map<std::string, const Sample*> by_id;
    for (int t = 0; t <= stream.horizon(); ++t)
        for (const Sample& s : stream.batch_at(t).samples) by_id.emplace(s.id, &s);

    struct Entry {
        const Sample* sample;
        int label;
        int acquired_at;
    };
    std::vector<Entry> entries;
    for (const Sample& s : stream.initial.samples) entries.push_back({&s, *s.true_label, 0});

    std::vector<driftstat::LabeledSet> sets;
    for (const pipeline::StepLog& step : steps) {
        driftstat::LabeledSet set;
        for (const Entry& e : entries) {
            set.xs.push_back(&e.sample->x);
            set.labels.push_back(e.label);
        }
        sets.push_back(std::move(set));

        for (const pipeline::AddedEntry& a : step.added) {
            auto it = by_id.find(a.id);
            if (it == by_id.end()) throw Error("drift: unknown sample id " + a.id);
            entries.push_back({it->second, a.label, step.t});
        }
        if (cfg.policy != pipeline::Policy::NR &&
            cfg.history.kind == pipeline::HistoryPolicy::Kind::Window) {
            int oldest = step.t - cfg.history.window + 1;
            std::erase_if(entries, [&](const Entry& e) { return e.acquired_at < oldest; });
        }
    }
    return sets;
}

} // namespace

void cmd_drift(const std::filesystem::path& results_dir, int resamples) {
    runio::RunManifest manifest = runio::read_run_manifest(results_dir / "run.json");
    TemporalStream stream = load_stream_source(manifest);
    std::filesystem::path drift_dir = results_dir / "drift";
    std::filesystem::create_directories(drift_dir);

    std::vector<double> pooled_beta, pooled_f1;
    nlohmann::json per_config = nlohmann::json::object();

    for (const runio::RunConfigInfo& info : manifest.configs) {
        if (info.failed) continue;
        std::filesystem::path cfg_dir = results_dir / info.dir;
        std::vector<pipeline::StepLog> steps = runio::read_steplogs(cfg_dir / "steplog.jsonl");
        for (const pipeline::StepLog& s : steps)
            if (!s.checkpoint.empty() && !std::filesystem::exists(cfg_dir / s.checkpoint))
                throw Error("drift: missing checkpoint " + (cfg_dir / s.checkpoint).string());

        std::vector<driftstat::LabeledSet> sets = rebuild_training_sets(stream, info.config, steps);
        driftstat::StabilityReport report =
            driftstat::beta_series(stream, sets, pipeline::kStabilityAlpha);

        std::string beta_csv = "t,beta,f1\n";
        std::string assoc_csv =
            "t,j,auc_train,p_train,a_train,auc_test,p_test,a_test,contribution\n";
        std::vector<double> cfg_beta, cfg_f1;
        for (size_t i = 0; i < report.steps.size(); ++i) {
            const driftstat::StepStability& st = report.steps[i];
            const pipeline::StepLog& log = steps.at(i);
            beta_csv += std::to_string(st.t) + ",";
            beta_csv += st.beta ? format_double(*st.beta) : std::string();
            beta_csv += ",";
            beta_csv += log.eval.f1 ? format_double(*log.eval.f1) : std::string();
            beta_csv += "\n";
            if (st.beta && log.eval.f1) {
                cfg_beta.push_back(*st.beta);
                cfg_f1.push_back(*log.eval.f1);
            }
            for (size_t j = 0; j < st.train_features.size(); ++j) {
                const auto& tr = st.train_features[j];
                const auto& ts = st.test_features[j];
                int contribution = tr.a * ts.a -
                                   ((std::abs(tr.a) + std::abs(ts.a) == 1) ? 1 : 0);
                assoc_csv += std::to_string(st.t) + "," + std::to_string(j) + "," +
                             format_double(tr.auc) + "," + format_double(tr.p) + "," +
                             std::to_string(tr.a) + "," + format_double(ts.auc) + "," +
                             format_double(ts.p) + "," + std::to_string(ts.a) + "," +
                             std::to_string(contribution) + "\n";
            }
        }
        runio::atomic_write_file(drift_dir / (info.label + "_beta.csv"), beta_csv);
        runio::atomic_write_file(drift_dir / (info.label + "_assoc.csv"), assoc_csv);

        nlohmann::json stability = nlohmann::json::array();
        for (const driftstat::StepStability& st : report.steps) {
            nlohmann::json step = {{"t", st.t},
                                   {"preserved", st.counts.preserved},
                                   {"flipped", st.counts.flipped},
                                   {"half_significant", st.counts.half_significant},
                                   {"both_null", st.counts.both_null}};
            step["beta"] = st.beta ? nlohmann::json(*st.beta) : nlohmann::json(nullptr);
            stability.push_back(std::move(step));
        }
        runio::atomic_write_file(drift_dir / (info.label + "_stability.json"),
                                 stability.dump(2) + "\n");

        pooled_beta.insert(pooled_beta.end(), cfg_beta.begin(), cfg_beta.end());
        pooled_f1.insert(pooled_f1.end(), cfg_f1.begin(), cfg_f1.end());

        // per-policy correlation alongside the pooled one
        try {
            driftstat::CorrelationReport r =
                driftstat::correlate(cfg_beta, cfg_f1, resamples,
                                     mix_seed(manifest.seed, runio::fnv1a64(info.label)));
            per_config[info.label] = {{"pearson_r", r.pearson_r}, {"p_r", r.p_r},
                                      {"kendall_tau", r.kendall_tau}, {"p_tau", r.p_tau}};
        } catch (const Error& e) {
            per_config[info.label] = {{"error", e.what()}};
        }
    }

    nlohmann::json out;
    out["resamples"] = resamples;
    out["seed"] = manifest.seed;
    out["per_config"] = std::move(per_config);
    try {
        driftstat::CorrelationReport pooled =
            driftstat::correlate(pooled_beta, pooled_f1, resamples, manifest.seed);
        out["pooled"] = {{"pearson_r", pooled.pearson_r},
                         {"p_r", pooled.p_r},
                         {"kendall_tau", pooled.kendall_tau},
                         {"p_tau", pooled.p_tau},
                         {"pairs", pooled_beta.size()}};
        std::printf("pooled beta~F1: r=%.3f (p=%.4g), tau=%.3f (p=%.4g), %zu pairs\n",
                    pooled.pearson_r, pooled.p_r, pooled.kendall_tau, pooled.p_tau,
                    pooled_beta.size());
    } catch (const Error& e) {
        out["pooled"] = {{"error", e.what()}};
        std::fprintf(stderr, "pooled correlation unavailable: %s\n", e.what());
    }
    runio::atomic_write_file(drift_dir / "correlation.json", out.dump(2) + "\n");
}

void cmd_report(const std::filesystem::path& results_dir) {
    runio::RunManifest manifest = runio::read_run_manifest(results_dir / "run.json");
    std::filesystem::path report_dir = results_dir / "report";
    std::filesystem::create_directories(report_dir);

    struct Avg {
        std::string label, policy, strategy;
        double al_budget = 0.0, ssl_budget = 0.0, budget = 0.0;
        std::optional<double> recall, f1;
    };
    std::vector<Avg> table;
    std::optional<double> nr_f1;

    std::string f1_curves = "config,t,f1\n";
    std::string beta_curves = "config,t,beta\n";

    for (const runio::RunConfigInfo& info : manifest.configs) {
        if (info.failed) continue;
        std::vector<pipeline::StepLog> steps =
            runio::read_steplogs(results_dir / info.dir / "steplog.jsonl");
        double recall_sum = 0.0, f1_sum = 0.0;
        int64_t recall_n = 0, f1_n = 0;
        for (const pipeline::StepLog& s : steps) {
            if (s.eval.recall) {
                recall_sum += *s.eval.recall;
                ++recall_n;
            }
            if (s.eval.f1) {
                f1_sum += *s.eval.f1;
                ++f1_n;
            }
            f1_curves += info.label + "," + std::to_string(s.t) + "," +
                         (s.eval.f1 ? format_double(*s.eval.f1) : std::string()) + "\n";
            beta_curves += info.label + "," + std::to_string(s.t) + "," +
                           (s.beta ? format_double(*s.beta) : std::string()) + "\n";
        }
        Avg avg;
        avg.label = info.label;
        avg.policy = pipeline::to_string(info.config.policy);
        avg.strategy = strategy_label(info.config);
        avg.al_budget = info.config.al ? info.config.al->budget_fraction : 0.0;
        avg.ssl_budget = info.config.ssl ? info.config.ssl->budget_fraction : 0.0;
        avg.budget = headline_budget(info.config);
        if (recall_n > 0) avg.recall = recall_sum / static_cast<double>(recall_n);
        if (f1_n > 0) avg.f1 = f1_sum / static_cast<double>(f1_n);
        if (info.config.policy == pipeline::Policy::NR) nr_f1 = avg.f1;
        table.push_back(std::move(avg));
    }

    std::string csv = "config,policy,strategy,al_budget,ssl_budget,avg_recall,avg_f1,below_nr\n";
    for (const Avg& a : table) {
        bool below = nr_f1 && a.f1 && *a.f1 < *nr_f1;
        csv += a.label + "," + a.policy + "," + a.strategy + "," + format_double(a.al_budget) +
               "," + format_double(a.ssl_budget) + "," +
               (a.recall ? format_double(*a.recall) : std::string()) + "," +
               (a.f1 ? format_double(*a.f1) : std::string()) + "," + (below ? "1" : "0") + "\n";
    }
    runio::atomic_write_file(report_dir / "avg_table.csv", csv);
    runio::atomic_write_file(report_dir / "f1_curves.csv", f1_curves);
    runio::atomic_write_file(report_dir / "beta_curves.csv", beta_curves);

    // aligned text pivot: rows policy+strategy, columns headline budget
    std::set<double> budgets;
    for (const Avg& a : table)
        if (a.policy != "NR" && a.policy != "FL") budgets.insert(a.budget);
    std::map<std::string, std::map<double, const Avg*>> pivot;
    for (const Avg& a : table) {
        std::string row = a.policy + (a.strategy.empty() ? "" : " + " + a.strategy);
        pivot[row][a.budget] = &a;
    }

    std::string text;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-28s", "policy/strategy");
    text += buf;
    for (double b : budgets) {
        std::snprintf(buf, sizeof(buf), "  %8s%%", format_double(b * 100.0).c_str());
        text += buf;
    }
    text += "\n";
    auto cell = [&](const Avg* a) {
        if (!a || !a->f1) return std::string("         -");
        std::string mark = (nr_f1 && *a->f1 < *nr_f1) ? "*" : " ";
        std::snprintf(buf, sizeof(buf), "  %5.1f/%4.1f%s",
                      a->recall ? *a->recall * 100.0 : 0.0, *a->f1 * 100.0, mark.c_str());
        return std::string(buf);
    };
    for (const auto& [row, cells] : pivot) {
        std::snprintf(buf, sizeof(buf), "%-28s", row.c_str());
        text += buf;
        if (row == "NR" || row == "FL") {
            const Avg* a = cells.begin()->second;
            text += cell(a);
            text += "  (all budgets)";
        } else {
            for (double b : budgets) {
                auto it = cells.find(b);
                text += cell(it == cells.end() ? nullptr : it->second);
            }
        }
        text += "\n";
    }
    text += "\ncells: recall/F1 at the fixed FPR, averaged over steps; * below the NR baseline\n";
    runio::atomic_write_file(report_dir / "avg_table.txt", text);
    std::printf("%s", text.c_str());
}

} // namespace driftbench::commands
