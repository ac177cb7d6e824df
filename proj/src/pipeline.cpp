#include "driftbench/pipeline.hpp"

#include "driftbench/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace driftbench::pipeline {

namespace {

bool uses_al(Policy p) { return p == Policy::AL_ONLY || p == Policy::AL_SSL; }
bool uses_ssl(Policy p) { return p == Policy::SSL_ONLY || p == Policy::AL_SSL; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct LabeledViews {
    std::vector<const SparseVector*> features;
    std::vector<detector::TrainExample> examples;
    std::vector<int> labels;
};

LabeledViews make_views(const std::vector<LabeledEntry>& labeled) {
    LabeledViews v;
    v.features.reserve(labeled.size());
    v.examples.reserve(labeled.size());
    v.labels.reserve(labeled.size());
    for (const LabeledEntry& e : labeled) {
        v.features.push_back(&e.sample->x);
        v.examples.push_back({&e.sample->x, e.label});
        v.labels.push_back(e.label);
    }
    return v;
}

std::optional<driftstat::StabilityCounts> step_stability(const LabeledViews& train_view,
                                                         const Batch& batch,
                                                         const std::vector<int>& batch_labels,
                                                         int32_t d) {
    auto single_class = [](std::span<const int> ys) {
        bool pos = false, neg = false;
        for (int y : ys) (y != 0 ? pos : neg) = true;
        return !(pos && neg);
    };
    if (single_class(train_view.labels) || single_class(batch_labels)) return std::nullopt;

    std::vector<const SparseVector*> test_xs;
    test_xs.reserve(batch.samples.size());
    for (const Sample& s : batch.samples) test_xs.push_back(&s.x);

    driftstat::AssociationVector tr = driftstat::association_vector(
        train_view.features, train_view.labels, d, kStabilityAlpha);
    driftstat::AssociationVector ts =
        driftstat::association_vector(test_xs, batch_labels, d, kStabilityAlpha);
    std::vector<int> a_tr(tr.features.size()), a_ts(ts.features.size());
    for (size_t j = 0; j < tr.features.size(); ++j) a_tr[j] = tr.features[j].a;
    for (size_t j = 0; j < ts.features.size(); ++j) a_ts[j] = ts.features[j].a;
    return driftstat::stability_counts(a_tr, a_ts);
}

} // namespace

void ExperimentConfig::validate() const {
    if (uses_al(policy) != al.has_value())
        throw ConfigError("experiment: AL config must be present exactly for AL policies");
    if (uses_ssl(policy) != ssl.has_value())
        throw ConfigError("experiment: SSL config must be present exactly for SSL policies");
    if (!(fpr_target > 0.0 && fpr_target < 1.0))
        throw ConfigError("experiment: fpr_target must lie in (0,1)");
    if (history.kind == HistoryPolicy::Kind::Window && history.window < 1)
        throw ConfigError("experiment: history window must be >= 1");
    train.validate();
    if (al) al->validate();
    if (ssl) ssl->validate();
}

std::vector<int> Oracle::evaluation_labels(int t) {
    const Batch& b = stream_->batch_at(t);
    std::vector<int> labels;
    labels.reserve(b.samples.size());
    for (const Sample& s : b.samples) {
        if (!s.true_label) throw Error("oracle: sample " + s.id + " has no withheld label");
        labels.push_back(*s.true_label);
    }
    log_->record(t, EventLog::Kind::Eval, labels.size());
    return labels;
}

std::vector<int> Oracle::acquire(int t, std::span<const size_t> pool_indices) {
    const Batch& b = stream_->batch_at(t);
    std::vector<int> labels;
    labels.reserve(pool_indices.size());
    for (size_t i : pool_indices) {
        const Sample& s = b.samples.at(i);
        if (!s.true_label) throw Error("oracle: sample " + s.id + " has no withheld label");
        labels.push_back(*s.true_label);
    }
    log_->record(t, EventLog::Kind::OracleLabel, labels.size());
    return labels;
}

std::vector<LabeledEntry> apply_history(std::vector<LabeledEntry> labeled,
                                        const HistoryPolicy& policy, int t) {
    if (policy.kind == HistoryPolicy::Kind::Full) return labeled;
    const int oldest = t - policy.window + 1;
    std::erase_if(labeled, [&](const LabeledEntry& e) { return e.acquired_at < oldest; });
    return labeled;
}

StepOutcome update_step(const detector::DetectorModel& model,
                        const std::vector<LabeledEntry>& labeled, const TemporalStream& stream,
                        int t, const ExperimentConfig& cfg, Oracle& oracle, EventLog& log) {
    cfg.validate();
    const Batch& batch = stream.batch_at(t);
    if (batch.samples.empty()) throw Error("update_step: empty batch");
    const uint64_t step_seed = mix_seed(cfg.seed, static_cast<uint64_t>(t));

    StepOutcome out;
    out.log.t = t;

    // label-stripped pool view
    std::vector<const SparseVector*> pool;
    pool.reserve(batch.samples.size());
    for (const Sample& s : batch.samples) pool.push_back(&s.x);

    LabeledViews views = make_views(labeled);

    // (1) prequential evaluation of the incoming model
    std::vector<double> scores = detector::score_batch(model, pool);
    std::vector<int> eval_labels = oracle.evaluation_labels(t);
    out.log.eval_seq = log.events.back().seq;
    out.log.eval = metrics::evaluate_batch(t, scores, eval_labels, cfg.fpr_target);

    // feature-stability diagnostics between the training set of the
    // evaluated model and the incoming batch
    if (auto stab = step_stability(views, batch, eval_labels, stream.d)) {
        out.log.stability = *stab;
        out.log.beta = stab->beta;
    }

    detector::TrainConfig step_train = cfg.train;
    step_train.seed = mix_seed(step_seed, 0);

    auto retrain = [&](const std::vector<LabeledEntry>& entries) {
        LabeledViews v = make_views(entries);
        auto t0 = std::chrono::steady_clock::now();
        detector::DetectorModel m = detector::train(v.examples, stream.d, step_train);
        out.log.train_seconds += seconds_since(t0);
        return m;
    };

    std::vector<LabeledEntry> next = labeled;
    auto note_added = [&](const LabeledEntry& e) {
        out.log.added.push_back({e.sample->id, e.label, e.provenance});
    };
    auto first_label_seq = [&](uint64_t seq) {
        if (!out.log.first_label_seq) out.log.first_label_seq = seq;
    };

    // (2)-(3) query + intermediate retrain
    std::vector<char> in_al(batch.samples.size(), 0);
    detector::DetectorModel intermediate;
    bool have_intermediate = false;
    if (cfg.policy == Policy::FL) {
        std::vector<size_t> all(batch.samples.size());
        for (size_t i = 0; i < all.size(); ++i) all[i] = i;
        std::vector<int> labels = oracle.acquire(t, all);
        first_label_seq(log.events.back().seq);
        for (size_t i = 0; i < all.size(); ++i) {
            LabeledEntry e{&batch.samples[i], labels[i], Provenance::Oracle, t};
            next.push_back(e);
            note_added(e);
        }
        out.log.n_al = all.size();
    } else if (uses_al(cfg.policy)) {
        active::ALConfig al = *cfg.al;
        al.seed = mix_seed(step_seed, 1);
        auto t0 = std::chrono::steady_clock::now();
        active::SelectionResult sel =
            active::select(al, pool, scores, views.features, views.examples, step_train);
        out.log.al_seconds = seconds_since(t0);
        std::vector<int> labels = oracle.acquire(t, sel.selected);
        first_label_seq(log.events.back().seq);
        for (size_t i = 0; i < sel.selected.size(); ++i) {
            LabeledEntry e{&batch.samples[sel.selected[i]], labels[i], Provenance::Oracle, t};
            next.push_back(e);
            note_added(e);
            in_al[sel.selected[i]] = 1;
        }
        out.log.n_al = sel.selected.size();
        if (uses_ssl(cfg.policy) && out.log.n_al > 0) {
            intermediate = retrain(next);
            have_intermediate = true;
        }
    }

    // (4) pseudo-labeling on the remainder
    if (uses_ssl(cfg.policy)) {
        std::vector<size_t> remainder;
        remainder.reserve(batch.samples.size());
        for (size_t i = 0; i < batch.samples.size(); ++i)
            if (!in_al[i]) remainder.push_back(i);

        std::vector<double> ssl_scores;
        if (cfg.policy == Policy::SSL_ONLY) {
            ssl_scores = scores; // pseudo-labels come straight from the evaluated model
        } else {
            std::vector<const SparseVector*> rest;
            rest.reserve(remainder.size());
            for (size_t i : remainder) rest.push_back(pool[i]);
            ssl_scores = detector::score_batch(have_intermediate ? intermediate : model, rest);
        }

        size_t k = active::budget_k(remainder.size(), cfg.ssl->budget_fraction);
        semisup::PseudoLabelResult res = semisup::pseudo_label(*cfg.ssl, ssl_scores, k);
        if (!res.assignments.empty()) {
            uint64_t seq = log.record(t, EventLog::Kind::PseudoLabel, res.assignments.size());
            first_label_seq(seq);
        }
        for (const auto& a : res.assignments) {
            size_t pool_index = cfg.policy == Policy::SSL_ONLY ? a.index : remainder[a.index];
            LabeledEntry e{&batch.samples[pool_index], a.pseudo_label, Provenance::Pseudo, t};
            next.push_back(e);
            note_added(e);
        }
        out.log.n_ssl = res.assignments.size();
    }

    // (5) final retrain; skipped when nothing changed (NR, or empty additions
    // where retraining would reproduce the incoming parameters bit for bit)
    if (cfg.policy == Policy::NR) {
        out.next_model = model;
    } else if (out.log.n_al == 0 && out.log.n_ssl == 0) {
        out.next_model = model;
    } else if (out.log.n_ssl == 0 && have_intermediate) {
        out.next_model = std::move(intermediate);
    } else {
        out.next_model = retrain(next);
    }

    // (6) history policy
    if (cfg.policy != Policy::NR) next = apply_history(std::move(next), cfg.history, t);
    out.log.train_size = next.size();
    out.next_labeled = std::move(next);
    return out;
}

RunResult run_experiment(const TemporalStream& stream, const ExperimentConfig& cfg,
                         const std::filesystem::path* run_dir) {
    cfg.validate();
    if (stream.initial.samples.empty()) throw Error("run_experiment: empty initial batch");

    RunResult result;
    Oracle oracle(stream, result.events);

    std::vector<LabeledEntry> labeled;
    labeled.reserve(stream.initial.samples.size());
    for (const Sample& s : stream.initial.samples) {
        if (!s.true_label) throw Error("run_experiment: unlabeled sample in period 0");
        labeled.push_back({&s, *s.true_label, Provenance::Initial, 0});
    }

    detector::TrainConfig initial_train = cfg.train;
    initial_train.seed = mix_seed(cfg.seed, 0);
    LabeledViews v0 = make_views(labeled);
    detector::DetectorModel model = detector::train(v0.examples, stream.d, initial_train);

    if (run_dir) std::filesystem::create_directories(*run_dir / "checkpoints");

    for (int t = 1; t <= stream.horizon(); ++t) {
        StepOutcome out = update_step(model, labeled, stream, t, cfg, oracle, result.events);
        if (run_dir) {
            char name[48];
            std::snprintf(name, sizeof(name), "checkpoints/step_%03d.json", t);
            detector::save_checkpoint(model, *run_dir / name); // the model evaluated at t
            out.log.checkpoint = name;
        }
        labeled = std::move(out.next_labeled);
        model = std::move(out.next_model);
        result.steps.push_back(std::move(out.log));
    }
    return result;
}

std::string to_string(Policy p) {
    switch (p) {
    case Policy::NR: return "NR";
    case Policy::FL: return "FL";
    case Policy::AL_ONLY: return "AL_ONLY";
    case Policy::SSL_ONLY: return "SSL_ONLY";
    case Policy::AL_SSL: return "AL_SSL";
    }
    return "NR";
}

Policy policy_from_string(const std::string& s) {
    if (s == "NR") return Policy::NR;
    if (s == "FL") return Policy::FL;
    if (s == "AL_ONLY") return Policy::AL_ONLY;
    if (s == "SSL_ONLY") return Policy::SSL_ONLY;
    if (s == "AL_SSL") return Policy::AL_SSL;
    throw ConfigError("unknown policy: " + s);
}

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::Initial: return "initial";
    case Provenance::Oracle: return "oracle";
    case Provenance::Pseudo: return "pseudo";
    }
    return "initial";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "initial") return Provenance::Initial;
    if (s == "oracle") return Provenance::Oracle;
    if (s == "pseudo") return Provenance::Pseudo;
    throw Error("unknown provenance: " + s);
}

} // namespace driftbench::pipeline
