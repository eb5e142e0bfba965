#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relval/classifiers/train.hpp"
#include "relval/dataset.hpp"
#include "relval/error.hpp"
#include "relval/metrics.hpp"
#include "relval/rng.hpp"
#include "relval/validation.hpp"

namespace relval {

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

// Substream seeds: every randomized step is keyed by what it is, never by
// when it runs, so worker scheduling cannot change a single byte of output.
inline uint64_t plan_seed(uint64_t master, const std::string& dataset,
                          const std::string& technique) {
    return StreamKey(master).mix(dataset).mix(technique).mix("plan").seed();
}
inline uint64_t estimate_seed(uint64_t master, const std::string& dataset,
                              const std::string& technique, const std::string& classifier) {
    return StreamKey(master).mix(dataset).mix(technique).mix(classifier).mix("estimate").seed();
}
inline uint64_t actual_seed(uint64_t master, const std::string& dataset,
                            const std::string& classifier) {
    return StreamKey(master).mix(dataset).mix(classifier).mix("actual").seed();
}

// Train on all of part A (releases merged, release tags stripped from the
// feature space) and report AUC on part B.
inline double actual_auc_on_b(const ClassifierSpec& spec, const ProjectDataset& part_a,
                              const ReleaseTable& part_b, uint64_t seed) {
    const LabeledMatrix b = matrix_from_release(part_b);
    const long pos = b.positives();
    if (pos == 0 || pos == static_cast<long>(b.rows()))
        throw SingleClassTestReleaseError("last release of " + part_a.project_name +
                                          " has a single class");
    const TrainedModel model = train(spec, matrix_from_dataset(part_a), seed);
    return auc(model.score_all(b));
}

struct SelectionResult {
    std::string technique;
    std::map<std::string, double> estimates; // classifier name -> estimated AUC on A
    std::map<std::string, std::string> excluded; // classifier name -> reason
    std::string selected;
    double selected_estimate = 0.0;

    nlohmann::json to_json() const {
        return {{"technique", technique},
                {"estimates", estimates},
                {"excluded", excluded},
                {"selected", selected},
                {"selected_estimate", selected_estimate}};
    }

    static SelectionResult from_json(const nlohmann::json& j) {
        SelectionResult s;
        s.technique = j.at("technique").get<std::string>();
        s.estimates = j.at("estimates").get<std::map<std::string, double>>();
        s.excluded = j.at("excluded").get<std::map<std::string, std::string>>();
        s.selected = j.at("selected").get<std::string>();
        s.selected_estimate = j.at("selected_estimate").get<double>();
        return s;
    }
};

// Signature of the per-classifier estimator, injectable so selection policy
// can be exercised against a perfect oracle.
using Estimator = std::function<double(const TechniqueConfig&, const ClassifierSpec&,
                                       const ProjectDataset& part_a, uint64_t seed)>;

inline Estimator default_estimator(Deadline deadline = std::nullopt) {
    return [deadline](const TechniqueConfig& cfg, const ClassifierSpec& spec,
                      const ProjectDataset& part_a, uint64_t seed) {
        TechniqueConfig plan_cfg = cfg;
        plan_cfg.seed = plan_seed(cfg.seed, part_a.project_name, cfg.id());
        const LabeledMatrix a = matrix_from_dataset(part_a);
        const SplitPlan plan = make_plan(plan_cfg, part_a, a);
        return estimate_auc(plan, spec, a,
                            estimate_seed(cfg.seed, part_a.project_name, cfg.id(), spec.name),
                            cfg.optimism_reduced, deadline)
            .estimate;
    };
}

// Estimate every roster member under the technique and pick the argmax, ties
// broken alphabetically by classifier name. Classifiers whose estimate is
// uncomputable are excluded with the reason recorded.
inline SelectionResult select_classifier(const TechniqueConfig& cfg,
                                         const ProjectDataset& part_a,
                                         const std::vector<ClassifierSpec>& roster,
                                         uint64_t master_seed,
                                         const Estimator& estimator) {
    if (roster.empty()) throw ConfigError("classifier roster is empty");
    TechniqueConfig keyed = cfg;
    keyed.seed = master_seed;

    SelectionResult out;
    out.technique = cfg.id();
    for (const auto& spec : roster) {
        try {
            out.estimates[spec.name] = estimator(keyed, spec, part_a, master_seed);
        } catch (const BudgetExceededError&) {
            throw;
        } catch (const Error& e) {
            out.excluded[spec.name] = e.what();
        }
    }
    if (out.estimates.empty())
        throw AllExcludedError("no classifier produced a computable estimate under " +
                               out.technique + " on " + part_a.project_name);

    // std::map iterates name-ascending; strict > keeps the first (alphabetically
    // smallest) name on ties.
    for (const auto& [name, est] : out.estimates) {
        if (out.selected.empty() || est > out.selected_estimate) {
            out.selected = name;
            out.selected_estimate = est;
        }
    }
    return out;
}

inline SelectionResult select_classifier(const TechniqueConfig& cfg,
                                         const ProjectDataset& part_a,
                                         const std::vector<ClassifierSpec>& roster,
                                         uint64_t master_seed, Deadline deadline = std::nullopt) {
    return select_classifier(cfg, part_a, roster, master_seed, default_estimator(deadline));
}

struct TechniqueEvaluation {
    std::string dataset;
    std::string technique;
    std::string selected;
    double estimated_auc = 0.0;
    double actual_auc = 0.0;
    double bias = 0.0;          // estimated - actual
    double absolute_bias = 0.0; // |bias|
    SelectionResult selection;

    nlohmann::json to_json() const {
        return {{"dataset", dataset},
                {"technique", technique},
                {"selected", selected},
                {"estimated_auc", estimated_auc},
                {"actual_auc", actual_auc},
                {"bias", bias},
                {"absolute_bias", absolute_bias},
                {"selection", selection.to_json()}};
    }

    static TechniqueEvaluation from_json(const nlohmann::json& j) {
        TechniqueEvaluation e;
        e.dataset = j.at("dataset").get<std::string>();
        e.technique = j.at("technique").get<std::string>();
        e.selected = j.at("selected").get<std::string>();
        e.estimated_auc = j.at("estimated_auc").get<double>();
        e.actual_auc = j.at("actual_auc").get<double>();
        e.bias = j.at("bias").get<double>();
        e.absolute_bias = j.at("absolute_bias").get<double>();
        e.selection = SelectionResult::from_json(j.at("selection"));
        return e;
    }
};

inline TechniqueEvaluation evaluate_technique(const TechniqueConfig& cfg,
                                              const ProjectDataset& dataset,
                                              const std::vector<ClassifierSpec>& roster,
                                              uint64_t master_seed,
                                              Deadline deadline = std::nullopt) {
    if (!eligible_for_experiment(dataset))
        throw TooFewReleasesError(dataset.project_name + " has fewer than 3 releases");
    const auto [part_a, part_b] = split_last_release(dataset);

    TechniqueEvaluation ev;
    ev.dataset = dataset.project_name;
    ev.technique = cfg.id();
    ev.selection = select_classifier(cfg, part_a, roster, master_seed, deadline);
    ev.selected = ev.selection.selected;
    ev.estimated_auc = ev.selection.selected_estimate;

    const ClassifierSpec* spec = nullptr;
    for (const auto& s : roster)
        if (s.name == ev.selected) spec = &s;
    ev.actual_auc = actual_auc_on_b(*spec, part_a, part_b,
                                    actual_seed(master_seed, dataset.project_name, spec->name));
    ev.bias = ev.estimated_auc - ev.actual_auc;
    ev.absolute_bias = std::fabs(ev.bias);
    return ev;
}

struct BaselineTriple {
    double best_auc = 0.0, medium_auc = 0.0, worst_auc = 0.0;
    std::string best_name, medium_name, worst_name;
    std::map<std::string, double> actual_aucs; // per classifier
    std::map<std::string, std::string> excluded;

    nlohmann::json to_json() const {
        return {{"best_auc", best_auc},       {"medium_auc", medium_auc},
                {"worst_auc", worst_auc},     {"best_name", best_name},
                {"medium_name", medium_name}, {"worst_name", worst_name},
                {"actual_aucs", actual_aucs}, {"excluded", excluded}};
    }

    static BaselineTriple from_json(const nlohmann::json& j) {
        BaselineTriple b;
        b.best_auc = j.at("best_auc").get<double>();
        b.medium_auc = j.at("medium_auc").get<double>();
        b.worst_auc = j.at("worst_auc").get<double>();
        b.best_name = j.at("best_name").get<std::string>();
        b.medium_name = j.at("medium_name").get<std::string>();
        b.worst_name = j.at("worst_name").get<std::string>();
        b.actual_aucs = j.at("actual_aucs").get<std::map<std::string, double>>();
        b.excluded = j.at("excluded").get<std::map<std::string, std::string>>();
        return b;
    }
};

// Hypothetical always-best / always-median / always-worst recommenders,
// ranked by actual B-side AUC. Even candidate counts take the lower-middle
// value so the medium baseline is a real selectable classifier.
inline BaselineTriple baselines(const ProjectDataset& dataset,
                                const std::vector<ClassifierSpec>& roster,
                                uint64_t master_seed) {
    const auto [part_a, part_b] = split_last_release(dataset);

    BaselineTriple out;
    for (const auto& spec : roster) {
        try {
            out.actual_aucs[spec.name] = actual_auc_on_b(
                spec, part_a, part_b, actual_seed(master_seed, dataset.project_name, spec.name));
        } catch (const Error& e) {
            out.excluded[spec.name] = e.what();
        }
    }
    if (out.actual_aucs.empty())
        throw AllExcludedError("no classifier has a computable actual AUC on " +
                               dataset.project_name);

    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [name, v] : out.actual_aucs) ranked.emplace_back(v, name);
    std::sort(ranked.begin(), ranked.end());
    const size_t mid = (ranked.size() - 1) / 2;
    out.worst_auc = ranked.front().first;
    out.worst_name = ranked.front().second;
    out.best_auc = ranked.back().first;
    out.best_name = ranked.back().second;
    out.medium_auc = ranked[mid].first;
    out.medium_name = ranked[mid].second;
    return out;
}

struct Rq1Row {
    std::string dataset;
    std::string classifier;
    bool computed = false;
    std::string failure; // reason when !computed
    double auc = 0.0, precision = 0.0, recall = 0.0, mcc = 0.0;
    std::string epv_group;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"dataset", dataset},
                            {"classifier", classifier},
                            {"epv_group", epv_group},
                            {"computed", computed}};
        if (computed) {
            j["auc"] = auc;
            j["precision"] = precision;
            j["recall"] = recall;
            j["mcc"] = mcc;
        } else {
            j["failure"] = failure;
        }
        return j;
    }

    static Rq1Row from_json(const nlohmann::json& j) {
        Rq1Row r;
        r.dataset = j.at("dataset").get<std::string>();
        r.classifier = j.at("classifier").get<std::string>();
        r.epv_group = j.at("epv_group").get<std::string>();
        r.computed = j.at("computed").get<bool>();
        if (r.computed) {
            r.auc = j.at("auc").get<double>();
            r.precision = j.at("precision").get<double>();
            r.recall = j.at("recall").get<double>();
            r.mcc = j.at("mcc").get<double>();
        } else {
            r.failure = j.at("failure").get<std::string>();
        }
        return r;
    }
};

// One row per dataset x classifier: B-side AUC plus threshold-0.5 precision,
// recall and MCC, tagged with the dataset's Low/High EPV group. Per-cell
// failures are recorded, not fatal.
inline std::vector<Rq1Row> run_rq1(const std::vector<const ProjectDataset*>& datasets,
                                   const std::vector<ClassifierSpec>& roster,
                                   uint64_t master_seed) {
    if (datasets.size() < 2) throw TooFewError("RQ1 needs at least 2 datasets");
    const auto groups = epv_group(datasets);

    std::vector<Rq1Row> rows;
    for (const auto* ds : datasets) {
        const auto [part_a, part_b] = split_last_release(*ds);
        const LabeledMatrix a = matrix_from_dataset(part_a);
        const LabeledMatrix b = matrix_from_release(part_b);
        for (const auto& spec : roster) {
            Rq1Row row;
            row.dataset = ds->project_name;
            row.classifier = spec.name;
            row.epv_group = to_string(groups.at(ds->project_name));
            try {
                const TrainedModel model =
                    train(spec, a, actual_seed(master_seed, ds->project_name, spec.name));
                const ScoredSet scored = model.score_all(b);
                row.auc = auc(scored);
                const auto tm = precision_recall_mcc(confusion(scored, 0.5));
                row.precision = tm.precision;
                row.recall = tm.recall;
                row.mcc = tm.mcc;
                row.computed = true;
            } catch (const Error& e) {
                row.failure = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace relval
