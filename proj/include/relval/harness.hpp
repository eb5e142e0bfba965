#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "relval/metaval.hpp"
#include "relval/report.hpp"
#include "relval/validation.hpp"

namespace relval {

// --- file helpers ---

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

// --- dataset loading ---

// Relative release paths in a manifest resolve against the manifest's
// directory, so manifests are relocatable together with their data.
inline ProjectDataset load_dataset(const DatasetManifest& manifest,
                                   const std::filesystem::path& base_dir) {
    std::vector<ReleaseTable> tables;
    for (const auto& [label, path] : manifest.releases) {
        std::filesystem::path p(path);
        if (p.is_relative()) p = base_dir / p;
        ReleaseTable rel;
        try {
            rel = parse_release_csv(read_file(p), manifest.mapping);
        } catch (const Error& e) {
            throw ConfigError(manifest.project_name + " release '" + label + "' (" +
                              p.string() + "): " + e.what());
        }
        rel.release_label = label;
        tables.push_back(std::move(rel));
    }
    return merge_releases(std::move(tables), manifest.project_name);
}

inline ProjectDataset load_dataset_from_manifest_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest '" + path.string() + "': " + e.what());
    }
    return load_dataset(manifest_from_json(j), path.parent_path());
}

// --- ingest summary (release/observation/feature/EPV counts) ---

struct IngestSummary {
    std::string project;
    long releases = 0;
    long observations = 0;
    long features = 0;
    long defective = 0;
    double epv = 0.0;

    nlohmann::json to_json() const {
        return {{"project", project},       {"releases", releases},
                {"observations", observations}, {"features", features},
                {"defective", defective},   {"epv", epv},
                {"epv_rounded", std::llround(epv)}};
    }

    std::string to_text() const {
        return project + ": " + std::to_string(releases) + " releases, " +
               std::to_string(observations) + " observations, " +
               std::to_string(features + 1) + " columns (" + std::to_string(features) +
               " features + label), " + std::to_string(defective) + " defective, EPV " +
               fmt_f(epv, 2) + " (~" + std::to_string(std::llround(epv)) + ")";
    }
};

inline IngestSummary summarize(const ProjectDataset& ds) {
    IngestSummary s;
    s.project = ds.project_name;
    s.releases = static_cast<long>(ds.releases.size());
    s.observations = ds.total_units();
    s.features = static_cast<long>(ds.feature_names.size());
    s.defective = ds.total_defective();
    s.epv = ds.epv;
    return s;
}

// --- run configuration ---

struct RunConfig {
    std::vector<std::string> manifest_paths;
    std::vector<ClassifierSpec> roster;
    std::vector<TechniqueConfig> techniques;
    uint64_t seed = 0;
    double budget_minutes = 30.0;
    std::string output_dir = "out";
    std::vector<std::string> formats = {"csv", "json", "markdown", "svg"};
    int workers = 1;

    void validate() const {
        if (manifest_paths.empty()) throw ConfigError("config lists no datasets");
        if (roster.empty()) throw ConfigError("config lists no classifiers");
        if (techniques.empty()) throw ConfigError("config lists no techniques");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (budget_minutes <= 0.0) throw ConfigError("budget_minutes must be positive");
        for (const auto& f : formats)
            if (f != "csv" && f != "json" && f != "markdown" && f != "svg")
                throw UnknownFormatError("unknown report format '" + f + "'");
        for (const auto& t : techniques) t.validate();
    }

    // Echo of everything that can influence results. Worker count and output
    // location are execution details, deliberately excluded, so reruns under
    // different parallelism compare byte-identical.
    nlohmann::json echo() const {
        nlohmann::json roster_j = nlohmann::json::array();
        for (const auto& s : roster) roster_j.push_back(s.to_json());
        nlohmann::json tech_j = nlohmann::json::array();
        for (const auto& t : techniques) tech_j.push_back(t.to_json());
        return {{"datasets", manifest_paths}, {"roster", roster_j},
                {"techniques", tech_j},       {"seed", seed},
                {"budget_minutes", budget_minutes}, {"formats", formats}};
    }
};

namespace detail {
inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> known,
                                const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
    }
}
} // namespace detail

inline TechniqueConfig technique_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j,
                                {"kind", "folds", "repeats", "stratified",
                                 "bootstrap_iterations", "optimism_reduced"},
                                "technique");
    TechniqueConfig t;
    t.kind = technique_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("folds")) t.folds = j.at("folds").get<int>();
    if (j.contains("repeats")) t.repeats = j.at("repeats").get<int>();
    if (j.contains("stratified")) t.stratified = j.at("stratified").get<bool>();
    if (j.contains("bootstrap_iterations"))
        t.bootstrap_iterations = j.at("bootstrap_iterations").get<int>();
    if (j.contains("optimism_reduced"))
        t.optimism_reduced = j.at("optimism_reduced").get<bool>();
    t.validate();
    return t;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j,
                                {"datasets", "roster", "techniques", "seed", "budget_minutes",
                                 "output_dir", "formats", "workers"},
                                "config");
    RunConfig cfg;
    for (const auto& p : j.at("datasets")) cfg.manifest_paths.push_back(p.get<std::string>());

    if (!j.contains("seed")) throw ConfigError("config requires an explicit seed");
    cfg.seed = j.at("seed").get<uint64_t>();

    const auto& roster = j.at("roster");
    if (roster.is_string() && roster.get<std::string>() == "default") {
        cfg.roster = default_roster();
    } else if (roster.is_array()) {
        for (const auto& s : roster) cfg.roster.push_back(ClassifierSpec::from_json(s));
    } else {
        throw ConfigError("roster must be \"default\" or an array of classifier specs");
    }
    {
        std::vector<std::string> names;
        for (const auto& s : cfg.roster) names.push_back(s.name);
        std::sort(names.begin(), names.end());
        if (std::adjacent_find(names.begin(), names.end()) != names.end())
            throw ConfigError("classifier names in the roster must be distinct");
    }

    for (const auto& t : j.at("techniques")) cfg.techniques.push_back(technique_from_json(t));

    if (j.contains("budget_minutes")) cfg.budget_minutes = j.at("budget_minutes").get<double>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("formats")) {
        cfg.formats.clear();
        for (const auto& f : j.at("formats")) cfg.formats.push_back(f.get<std::string>());
    }
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    cfg.validate();
    return cfg;
}

// --- orchestration ---

namespace detail {

struct CellResult {
    bool ok = false;
    std::string error;
    double auc = 0.0, precision = 0.0, recall = 0.0, mcc = 0.0; // actual cells
    double estimate = 0.0;                                      // estimate cells
};

struct CellTask {
    enum Kind { Actual, Estimate } kind = Actual;
    size_t dataset = 0, classifier = 0, technique = 0;
};

} // namespace detail

// Execute the full meta-validation over pre-loaded datasets. Every
// (dataset x classifier) actual cell and (dataset x technique x classifier)
// estimate cell is independent; a fixed task list is distributed over
// `workers` threads and merged by key, so the result does not depend on
// scheduling. Failing cells (including per-cell budget overruns) land in the
// exclusion log instead of aborting the run.
inline ExperimentReport run_experiment(const RunConfig& cfg,
                                       const std::vector<ProjectDataset>& datasets) {
    cfg.validate();
    for (const auto& ds : datasets)
        if (!eligible_for_experiment(ds))
            throw ConfigError(ds.project_name + " has fewer than 3 releases");

    const auto budget = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double, std::ratio<60>>(cfg.budget_minutes));

    // per-dataset A/B split and matrices, shared read-only across workers
    struct Prepared {
        ProjectDataset part_a;
        ReleaseTable part_b;
        LabeledMatrix a, b;
        std::vector<SplitPlan> plans; // per technique
    };
    std::vector<Prepared> prep(datasets.size());
    for (size_t d = 0; d < datasets.size(); ++d) {
        auto [a, b] = split_last_release(datasets[d]);
        prep[d].part_a = std::move(a);
        prep[d].part_b = std::move(b);
        prep[d].a = matrix_from_dataset(prep[d].part_a);
        prep[d].b = matrix_from_release(prep[d].part_b);
        for (const auto& tech : cfg.techniques) {
            TechniqueConfig keyed = tech;
            keyed.seed = plan_seed(cfg.seed, datasets[d].project_name, tech.id());
            prep[d].plans.push_back(make_plan(keyed, prep[d].part_a, prep[d].a));
        }
    }

    std::vector<detail::CellTask> tasks;
    for (size_t d = 0; d < datasets.size(); ++d)
        for (size_t c = 0; c < cfg.roster.size(); ++c)
            tasks.push_back({detail::CellTask::Actual, d, c, 0});
    for (size_t d = 0; d < datasets.size(); ++d)
        for (size_t t = 0; t < cfg.techniques.size(); ++t)
            for (size_t c = 0; c < cfg.roster.size(); ++c)
                tasks.push_back({detail::CellTask::Estimate, d, c, t});

    std::vector<detail::CellResult> results(tasks.size());
    std::atomic<size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const auto& task = tasks[i];
            auto& res = results[i];
            const auto& ds = datasets[task.dataset];
            const auto& spec = cfg.roster[task.classifier];
            const auto deadline = std::chrono::steady_clock::now() + budget;
            try {
                if (task.kind == detail::CellTask::Actual) {
                    const auto& p = prep[task.dataset];
                    const long pos = p.b.positives();
                    if (pos == 0 || pos == static_cast<long>(p.b.rows()))
                        throw SingleClassTestReleaseError("last release of " + ds.project_name +
                                                          " has a single class");
                    const TrainedModel model =
                        train(spec, p.a, actual_seed(cfg.seed, ds.project_name, spec.name));
                    const ScoredSet scored = model.score_all(p.b);
                    res.auc = auc(scored);
                    const auto tm = precision_recall_mcc(confusion(scored, 0.5));
                    res.precision = tm.precision;
                    res.recall = tm.recall;
                    res.mcc = tm.mcc;
                } else {
                    const auto& tech = cfg.techniques[task.technique];
                    res.estimate =
                        estimate_auc(prep[task.dataset].plans[task.technique], spec,
                                     prep[task.dataset].a,
                                     estimate_seed(cfg.seed, ds.project_name, tech.id(),
                                                   spec.name),
                                     tech.optimism_reduced, deadline)
                            .estimate;
                }
                res.ok = true;
            } catch (const std::exception& e) {
                res.error = e.what();
            }
        }
    };
    {
        std::vector<std::thread> pool;
        const int n = std::min<int>(cfg.workers, static_cast<int>(tasks.size()));
        for (int w = 1; w < n; ++w) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
    }

    // --- single-threaded deterministic merge ---
    ExperimentReport rep;
    rep.config_echo = cfg.echo();

    // index results by key
    std::map<std::pair<size_t, size_t>, const detail::CellResult*> actual_cells;
    std::map<std::tuple<size_t, size_t, size_t>, const detail::CellResult*> estimate_cells;
    for (size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        if (t.kind == detail::CellTask::Actual)
            actual_cells[{t.dataset, t.classifier}] = &results[i];
        else
            estimate_cells[{t.dataset, t.technique, t.classifier}] = &results[i];
    }
    auto log_exclusion = [&](const std::string& cell, const std::string& reason) {
        rep.exclusions.push_back({cell, reason});
    };

    std::vector<const ProjectDataset*> ds_ptrs;
    for (const auto& ds : datasets) ds_ptrs.push_back(&ds);
    const auto groups = epv_group(ds_ptrs);

    // RQ1 rows and baselines from the actual cells
    for (size_t d = 0; d < datasets.size(); ++d) {
        BaselineTriple base;
        for (size_t c = 0; c < cfg.roster.size(); ++c) {
            const auto* res = actual_cells.at({d, c});
            const auto& name = cfg.roster[c].name;
            Rq1Row row;
            row.dataset = datasets[d].project_name;
            row.classifier = name;
            row.epv_group = to_string(groups.at(row.dataset));
            if (res->ok) {
                row.computed = true;
                row.auc = res->auc;
                row.precision = res->precision;
                row.recall = res->recall;
                row.mcc = res->mcc;
                base.actual_aucs[name] = res->auc;
            } else {
                row.failure = res->error;
                base.excluded[name] = res->error;
                log_exclusion(row.dataset + "/actual/" + name, res->error);
            }
            rep.rq1.push_back(std::move(row));
        }
        if (base.actual_aucs.empty()) {
            log_exclusion(datasets[d].project_name + "/baselines",
                          "no classifier has a computable actual AUC");
            continue;
        }
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& [name, v] : base.actual_aucs) ranked.emplace_back(v, name);
        std::sort(ranked.begin(), ranked.end());
        const size_t mid = (ranked.size() - 1) / 2;
        base.worst_auc = ranked.front().first;
        base.worst_name = ranked.front().second;
        base.best_auc = ranked.back().first;
        base.best_name = ranked.back().second;
        base.medium_auc = ranked[mid].first;
        base.medium_name = ranked[mid].second;
        rep.baselines[datasets[d].project_name] = std::move(base);
    }

    // technique evaluations from the estimate cells
    for (size_t d = 0; d < datasets.size(); ++d) {
        for (size_t t = 0; t < cfg.techniques.size(); ++t) {
            TechniqueEvaluation ev;
            ev.dataset = datasets[d].project_name;
            ev.technique = cfg.techniques[t].id();
            ev.selection.technique = ev.technique;
            for (size_t c = 0; c < cfg.roster.size(); ++c) {
                const auto* res = estimate_cells.at({d, t, c});
                const auto& name = cfg.roster[c].name;
                if (res->ok) {
                    ev.selection.estimates[name] = res->estimate;
                } else {
                    ev.selection.excluded[name] = res->error;
                    log_exclusion(ev.dataset + "/" + ev.technique + "/" + name, res->error);
                }
            }
            if (ev.selection.estimates.empty()) {
                log_exclusion(ev.dataset + "/" + ev.technique,
                              "no classifier produced a computable estimate");
                continue;
            }
            for (const auto& [name, est] : ev.selection.estimates) {
                if (ev.selection.selected.empty() || est > ev.selection.selected_estimate) {
                    ev.selection.selected = name;
                    ev.selection.selected_estimate = est;
                }
            }
            ev.selected = ev.selection.selected;
            ev.estimated_auc = ev.selection.selected_estimate;

            const auto bit = rep.baselines.find(ev.dataset);
            if (bit == rep.baselines.end() ||
                !bit->second.actual_aucs.count(ev.selected)) {
                log_exclusion(ev.dataset + "/" + ev.technique,
                              "selected classifier '" + ev.selected +
                                  "' has no computable actual AUC");
                continue;
            }
            ev.actual_auc = bit->second.actual_aucs.at(ev.selected);
            ev.bias = ev.estimated_auc - ev.actual_auc;
            ev.absolute_bias = std::fabs(ev.bias);
            rep.evaluations.push_back(std::move(ev));
        }
    }

    // H01: two-way ANOVA over the computed RQ1 cells
    {
        std::vector<stats::AnovaRow> rows;
        for (const auto& r : rep.rq1)
            if (r.computed) rows.push_back({r.auc, r.classifier, r.epv_group});
        try {
            rep.anova = stats::two_way_anova(rows, "classifier", "epv");
            rep.hypotheses["H01_classifier"] = rep.anova->factor_a;
            rep.hypotheses["H01_epv"] = rep.anova->factor_b;
        } catch (const Error& e) {
            log_exclusion("H01", e.what());
        }
    }

    // H02a / H02b: walk-forward vs the non-time-series techniques, paired by
    // dataset on technique AUC
    {
        std::map<std::string, std::map<std::string, double>> tech_auc; // technique -> ds -> auc
        for (const auto& ev : rep.evaluations) tech_auc[ev.technique][ev.dataset] = ev.actual_auc;
        auto compare = [&](const char* hyp, const std::string& x, const std::string& y) {
            if (!tech_auc.count(x) || !tech_auc.count(y)) return;
            std::vector<std::pair<double, double>> pairs;
            for (const auto& [ds, vx] : tech_auc[x]) {
                auto it = tech_auc[y].find(ds);
                if (it != tech_auc[y].end()) pairs.emplace_back(vx, it->second);
            }
            try {
                rep.hypotheses[hyp] = stats::compare_paired(x, y, pairs);
            } catch (const Error& e) {
                log_exclusion(hyp, e.what());
            }
        };
        compare("H02a", "walk-forward", "repeated-kfold");
        compare("H02b", "walk-forward", "bootstrap");
    }

    // H03: sanity check per dataset
    {
        int significant = 0;
        for (const auto& ds : datasets) {
            SanityRow row;
            try {
                row = sanity_check_dataset(ds);
                significant += row.significant ? 1 : 0;
            } catch (const Error& e) {
                row.dataset = ds.project_name;
                row.failure = e.what();
                log_exclusion(ds.project_name + "/sanity", e.what());
            }
            rep.sanity.push_back(std::move(row));
        }
        rep.runtime["sanity_significant"] = significant;
    }

    rep.runtime["cells_total"] = tasks.size();
    size_t failed = 0;
    for (const auto& r : results) failed += r.ok ? 0 : 1;
    rep.runtime["cells_failed"] = failed;
    return rep;
}

// Fatal iff some configured technique produced no evaluation at all.
inline bool has_fatal_failure(const RunConfig& cfg, const ExperimentReport& rep) {
    for (const auto& tech : cfg.techniques) {
        bool any = false;
        for (const auto& ev : rep.evaluations)
            if (ev.technique == tech.id()) any = true;
        if (!any) return true;
    }
    return false;
}

// Emit the report in every requested format under out_dir.
inline std::vector<std::string> write_report_files(const ExperimentReport& rep,
                                                   const std::vector<std::string>& formats,
                                                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file(out_dir / name, content);
        written.push_back((out_dir / name).string());
    };
    for (const auto& f : formats) {
        if (f == "json") {
            emit("report.json", rep.to_json().dump(2) + "\n");
        } else if (f == "csv") {
            emit("rq1.csv", rq1_csv(rep));
            emit("evaluations.csv", evaluations_csv(rep));
            emit("rq2_long.csv", rq2_long_csv(rep));
            emit("sanity.csv", sanity_csv(rep.sanity));
        } else if (f == "markdown") {
            emit("report.md", markdown_report(rep));
        } else if (f == "svg") {
            std::map<std::string, std::vector<double>> bias, abs_bias, tech_aucs;
            for (const auto& ev : rep.evaluations) {
                bias[ev.technique].push_back(ev.bias);
                abs_bias[ev.technique].push_back(ev.absolute_bias);
                tech_aucs[ev.technique].push_back(ev.actual_auc);
            }
            auto as_groups = [](const std::map<std::string, std::vector<double>>& m) {
                std::vector<std::pair<std::string, std::vector<double>>> g(m.begin(), m.end());
                return g;
            };
            if (!bias.empty()) {
                emit("bias.svg", svg_boxplot("Bias by technique", as_groups(bias)));
                emit("absolute_bias.svg",
                     svg_boxplot("Absolute bias by technique", as_groups(abs_bias)));
            }
            std::vector<std::pair<std::string, double>> bars;
            for (const auto& [tech, vals] : tech_aucs) {
                double sum = 0.0;
                for (double v : vals) sum += v;
                bars.emplace_back(tech, sum / static_cast<double>(vals.size()));
            }
            auto baseline_mean = [&](auto pick) {
                double sum = 0.0;
                for (const auto& [name, b] : rep.baselines) sum += pick(b);
                return sum / static_cast<double>(rep.baselines.size());
            };
            if (!rep.baselines.empty()) {
                bars.emplace_back("Best", baseline_mean([](const BaselineTriple& b) {
                                      return b.best_auc;
                                  }));
                bars.emplace_back("Medium", baseline_mean([](const BaselineTriple& b) {
                                      return b.medium_auc;
                                  }));
                bars.emplace_back("Worst", baseline_mean([](const BaselineTriple& b) {
                                      return b.worst_auc;
                                  }));
            }
            if (!bars.empty())
                emit("technique_auc.svg", svg_bars("Mean technique AUC", bars));
        } else {
            throw UnknownFormatError("unknown report format '" + f + "'");
        }
    }
    return written;
}

} // namespace relval
