#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "relval/classifiers/train.hpp"
#include "relval/dataset.hpp"
#include "relval/error.hpp"
#include "relval/metrics.hpp"
#include "relval/rng.hpp"

namespace relval {

enum class TechniqueKind { WalkForward, RepeatedKFold, OutOfSampleBootstrap };

inline std::string to_string(TechniqueKind k) {
    switch (k) {
    case TechniqueKind::WalkForward: return "walk-forward";
    case TechniqueKind::RepeatedKFold: return "repeated-kfold";
    case TechniqueKind::OutOfSampleBootstrap: return "bootstrap";
    }
    throw ConfigError("unknown technique kind");
}

inline TechniqueKind technique_kind_from_string(const std::string& s) {
    if (s == "walk-forward") return TechniqueKind::WalkForward;
    if (s == "repeated-kfold") return TechniqueKind::RepeatedKFold;
    if (s == "bootstrap") return TechniqueKind::OutOfSampleBootstrap;
    throw ConfigError("unknown technique: " + s);
}

struct TechniqueConfig {
    TechniqueKind kind = TechniqueKind::WalkForward;
    int folds = 10;
    int repeats = 10;
    bool stratified = false;
    int bootstrap_iterations = 100;
    bool optimism_reduced = false;
    uint64_t seed = 0;

    std::string id() const {
        std::string s = relval::to_string(kind);
        if (optimism_reduced) s += "-optimism-reduced";
        return s;
    }

    void validate() const {
        if (folds < 2) throw ConfigError("folds must be >= 2");
        if (repeats < 1) throw ConfigError("repeats must be >= 1");
        if (bootstrap_iterations < 1) throw ConfigError("bootstrap_iterations must be >= 1");
    }

    nlohmann::json to_json() const {
        return {{"kind", relval::to_string(kind)},
                {"folds", folds},
                {"repeats", repeats},
                {"stratified", stratified},
                {"bootstrap_iterations", bootstrap_iterations},
                {"optimism_reduced", optimism_reduced},
                {"seed", seed}};
    }
};

struct SplitRun {
    std::vector<int> train; // multiset for bootstrap (duplicates preserved)
    std::vector<int> test;
};

struct SplitPlan {
    std::string technique;
    std::vector<SplitRun> runs;
    uint64_t seed = 0;
    nlohmann::json parameters = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& r : runs) jr.push_back({{"train", r.train}, {"test", r.test}});
        return {{"technique", technique},
                {"seed", seed},
                {"parameters", parameters},
                {"runs", jr}};
    }
};

// Walk-forward: run i trains on releases 1..i and tests release i+1. Indices
// refer to rows of matrix_from_dataset(a), which concatenates releases in
// order. Deterministic; consumes no randomness.
inline SplitPlan walk_forward_plan(const ProjectDataset& a) {
    if (a.releases.size() < 2)
        throw TooFewReleasesError("walk-forward needs >= 2 releases, got " +
                                  std::to_string(a.releases.size()));
    std::vector<int> starts{0};
    for (const auto& rel : a.releases)
        starts.push_back(starts.back() + static_cast<int>(rel.rows.size()));

    SplitPlan plan;
    plan.technique = "walk-forward";
    plan.parameters = {{"releases", a.releases.size()}};
    for (size_t i = 1; i < a.releases.size(); ++i) {
        SplitRun run;
        for (int r = 0; r < starts[i]; ++r) run.train.push_back(r);
        for (int r = starts[i]; r < starts[i + 1]; ++r) run.test.push_back(r);
        plan.runs.push_back(std::move(run));
    }
    return plan;
}

// Repeated k-fold cross-validation over `rows` rows. Per repeat the rows are
// shuffled with a seeded substream and cut into folds of size floor(N/k) or
// ceil(N/k); run j of a repeat tests fold j and trains on the rest. With
// stratification, each class's shuffled rows are dealt round-robin so per-fold
// defect counts stay within one of balance. `labels` is only consulted when
// stratified.
inline SplitPlan kfold_plan(size_t rows, int folds, int repeats, bool stratified,
                            uint64_t seed, const std::vector<char>& labels = {}) {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (rows < static_cast<size_t>(folds))
        throw TooFewRowsError("k-fold needs rows >= folds (" + std::to_string(rows) + " < " +
                              std::to_string(folds) + ")");
    if (stratified && labels.size() != rows)
        throw ConfigError("stratified k-fold requires one label per row");

    SplitPlan plan;
    plan.technique = "repeated-kfold";
    plan.seed = seed;
    plan.parameters = {{"folds", folds}, {"repeats", repeats}, {"stratified", stratified}};

    const size_t k = static_cast<size_t>(folds);
    for (int rep = 0; rep < repeats; ++rep) {
        Rng rng = StreamKey(seed).mix("kfold").mix(static_cast<uint64_t>(rep)).rng();
        const auto order = shuffled_indices(static_cast<int>(rows), rng);

        std::vector<std::vector<int>> fold_rows(k);
        if (stratified) {
            size_t next[2] = {0, 0};
            for (size_t i = 0; i < rows; ++i) {
                const int cls = labels[order[i]] ? 1 : 0;
                fold_rows[next[cls]++ % k].push_back(static_cast<int>(order[i]));
                next[cls] %= k;
            }
        } else {
            const size_t base = rows / k, extra = rows % k;
            size_t pos = 0;
            for (size_t j = 0; j < k; ++j) {
                const size_t size = base + (j < extra ? 1 : 0);
                for (size_t i = 0; i < size; ++i)
                    fold_rows[j].push_back(static_cast<int>(order[pos++]));
            }
        }

        for (size_t j = 0; j < k; ++j) {
            SplitRun run;
            run.test = fold_rows[j];
            for (size_t o = 0; o < k; ++o)
                if (o != j) run.train.insert(run.train.end(), fold_rows[o].begin(),
                                             fold_rows[o].end());
            plan.runs.push_back(std::move(run));
        }
    }
    return plan;
}

// Out-of-sample bootstrap: each run trains on N draws with replacement
// (duplicates kept) and tests on the rows never drawn. A run whose test set is
// empty — or single-class, when labels are supplied — is regenerated from the
// same stream up to 10 times before erroring, so results stay deterministic.
inline SplitPlan bootstrap_plan(size_t rows, int iterations, uint64_t seed,
                                const std::vector<char>& labels = {}) {
    if (rows < 2) throw TooFewRowsError("bootstrap needs >= 2 rows");
    if (!labels.empty() && labels.size() != rows)
        throw ConfigError("bootstrap labels must match row count");

    SplitPlan plan;
    plan.technique = "bootstrap";
    plan.seed = seed;
    plan.parameters = {{"iterations", iterations}};

    Rng rng = StreamKey(seed).mix("bootstrap").rng();
    for (int it = 0; it < iterations; ++it) {
        constexpr int max_attempts = 10;
        bool accepted = false;
        for (int attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
            SplitRun run;
            std::vector<char> drawn(rows, 0);
            run.train.reserve(rows);
            for (size_t i = 0; i < rows; ++i) {
                const size_t pick = static_cast<size_t>(rng.below(rows));
                run.train.push_back(static_cast<int>(pick));
                drawn[pick] = 1;
            }
            for (size_t i = 0; i < rows; ++i)
                if (!drawn[i]) run.test.push_back(static_cast<int>(i));

            bool degenerate = run.test.empty();
            if (!degenerate && !labels.empty()) {
                bool any_pos = false, any_neg = false;
                for (int t : run.test) (labels[static_cast<size_t>(t)] ? any_pos : any_neg) = true;
                degenerate = !(any_pos && any_neg);
            }
            if (!degenerate) {
                plan.runs.push_back(std::move(run));
                accepted = true;
            }
        }
        if (!accepted)
            throw ExhaustedRetriesError("bootstrap iteration " + std::to_string(it) +
                                        " stayed degenerate after " +
                                        std::to_string(max_attempts) + " attempts");
    }
    return plan;
}

inline SplitPlan make_plan(const TechniqueConfig& cfg, const ProjectDataset& part_a,
                           const LabeledMatrix& matrix_a) {
    cfg.validate();
    switch (cfg.kind) {
    case TechniqueKind::WalkForward: return walk_forward_plan(part_a);
    case TechniqueKind::RepeatedKFold:
        return kfold_plan(matrix_a.rows(), cfg.folds, cfg.repeats, cfg.stratified, cfg.seed,
                          cfg.stratified ? matrix_a.labels : std::vector<char>{});
    case TechniqueKind::OutOfSampleBootstrap:
        return bootstrap_plan(matrix_a.rows(), cfg.bootstrap_iterations, cfg.seed,
                              matrix_a.labels);
    }
    throw ConfigError("unknown technique kind");
}

struct EstimatedAccuracy {
    double estimate = 0.0; // unweighted mean over computable runs
    std::vector<double> run_values;
    int skipped = 0;
    int runs_total = 0;
};

// Train/score every run of a plan and average the per-run AUC. Runs whose
// test set is single-class are skipped and counted. With optimism_reduced,
// each run's value is test-AUC minus the optimism (train-set AUC minus
// test-AUC); runs where the train-set AUC is uncomputable fall back to the
// uncorrected value. Per-run training seeds come from named substreams of
// `seed`, so evaluation order (or parallelism above this call) cannot change
// results. An optional deadline aborts between runs with BudgetExceededError.
inline EstimatedAccuracy estimate_auc(
    const SplitPlan& plan, const ClassifierSpec& spec, const LabeledMatrix& data,
    uint64_t seed, bool optimism_reduced = false,
    std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt) {
    EstimatedAccuracy out;
    out.runs_total = static_cast<int>(plan.runs.size());

    for (size_t r = 0; r < plan.runs.size(); ++r) {
        if (deadline && std::chrono::steady_clock::now() > *deadline)
            throw BudgetExceededError("cell budget exceeded at run " + std::to_string(r) +
                                      " of " + std::to_string(plan.runs.size()));
        const auto& run = plan.runs[r];
        const LabeledMatrix train_m = data.select(run.train);
        const LabeledMatrix test_m = data.select(run.test);

        const uint64_t run_seed =
            StreamKey(seed).mix("run").mix(static_cast<uint64_t>(r)).seed();
        const TrainedModel model = train(spec, train_m, run_seed);

        double value;
        try {
            value = auc(model.score_all(test_m));
        } catch (const SingleClassError&) {
            ++out.skipped;
            continue;
        }
        if (optimism_reduced) {
            try {
                const double train_auc = auc(model.score_all(train_m));
                value = value - (train_auc - value);
            } catch (const SingleClassError&) {
                // constant-model training sets have no computable optimism
            }
        }
        out.run_values.push_back(value);
    }

    if (out.run_values.empty())
        throw AllRunsSkippedError("no run of " + plan.technique +
                                  " produced a computable AUC for " + spec.name);
    double sum = 0.0;
    for (double v : out.run_values) sum += v;
    out.estimate = sum / static_cast<double>(out.run_values.size());
    return out;
}

} // namespace relval
