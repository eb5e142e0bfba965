#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "relval/harness.hpp"
#include "relval/rng.hpp"

using namespace relval;

namespace {

ProjectDataset load_public(const std::string& name) {
    return load_dataset_from_manifest_file(std::filesystem::path(RELVAL_SOURCE_DIR) /
                                           "data/manifests" / (name + ".json"));
}

ReleaseTable release_of(const std::string& label,
                        std::vector<std::pair<double, bool>> rows) {
    ReleaseTable rel;
    rel.release_label = label;
    rel.feature_names = {"f"};
    for (auto [v, defective] : rows) {
        CodeUnit u;
        u.unit_name = label + "#" + std::to_string(rel.rows.size());
        u.features = {v};
        u.defect_count = defective ? 1 : 0;
        u.defective = defective;
        rel.rows.push_back(std::move(u));
    }
    return rel;
}

ProjectDataset synthetic_dataset(uint64_t seed, const std::string& name) {
    Rng rng(seed);
    std::vector<ReleaseTable> rels;
    for (int r = 0; r < 3; ++r) {
        std::vector<std::pair<double, bool>> rows;
        for (int i = 0; i < 20; ++i) {
            const bool defective = rng.below(3) == 0;
            rows.emplace_back((defective ? 0.7 : 0.3) + rng.uniform(), defective);
        }
        rows[0].second = true;
        rows[1].second = false;
        rels.push_back(release_of("r" + std::to_string(r + 1), rows));
    }
    return merge_releases(rels, name);
}

RunConfig small_config() {
    RunConfig cfg;
    cfg.manifest_paths = {"a.json", "b.json"}; // echo only; datasets passed directly
    for (auto kind : {ClassifierKind::IB1, ClassifierKind::Logistic,
                      ClassifierKind::NaiveBayes}) {
        ClassifierSpec s;
        s.kind = kind;
        s.name = to_string(kind);
        cfg.roster.push_back(s);
    }
    TechniqueConfig wf;
    wf.kind = TechniqueKind::WalkForward;
    TechniqueConfig kf;
    kf.kind = TechniqueKind::RepeatedKFold;
    kf.folds = 5;
    kf.repeats = 2;
    TechniqueConfig bs;
    bs.kind = TechniqueKind::OutOfSampleBootstrap;
    bs.bootstrap_iterations = 10;
    cfg.techniques = {wf, kf, bs};
    cfg.seed = 321;
    return cfg;
}

nlohmann::json valid_config_json() {
    return {
        {"datasets", {"a.json", "b.json"}},
        {"roster", "default"},
        {"techniques", {{{"kind", "walk-forward"}}}},
        {"seed", 7},
    };
}

} // namespace

TEST(Ingest, AntSummaryText) {
    const auto s = summarize(load_public("ant"));
    EXPECT_EQ(s.to_text(),
              "ant: 5 releases, 1692 observations, 21 columns (20 features + label), "
              "350 defective, EPV 17.50 (~18)");
    EXPECT_EQ(s.to_json().at("epv_rounded").get<long>(), 18);
}

TEST(Ingest, IvyCounts) {
    const auto s = summarize(load_public("ivy"));
    EXPECT_EQ(s.releases, 3);
    EXPECT_EQ(s.observations, 704);
    EXPECT_EQ(s.features, 20);
}

TEST(LoadDataset, BadManifestPathsFail) {
    DatasetManifest m;
    m.project_name = "p";
    m.releases = {{"r1", "does-not-exist.csv"}};
    m.mapping = promise_mapping();
    EXPECT_THROW(load_dataset(m, "/tmp"), ConfigError);
}

TEST(RunConfigJson, ParsesDefaults) {
    const auto cfg = run_config_from_json(valid_config_json());
    EXPECT_EQ(cfg.roster.size(), 9u); // default roster
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.workers, 1);
    EXPECT_DOUBLE_EQ(cfg.budget_minutes, 30.0);
    EXPECT_EQ(cfg.formats,
              (std::vector<std::string>{"csv", "json", "markdown", "svg"}));
}

TEST(RunConfigJson, RejectsBadInputs) {
    auto j = valid_config_json();
    j["surprise"] = 1;
    EXPECT_THROW(run_config_from_json(j), ConfigError);

    j = valid_config_json();
    j.erase("seed");
    EXPECT_THROW(run_config_from_json(j), ConfigError);

    j = valid_config_json();
    j["roster"] = {{{"kind", "NaiveBayes"}}, {{"kind", "NaiveBayes"}}}; // duplicate names
    EXPECT_THROW(run_config_from_json(j), ConfigError);

    j = valid_config_json();
    j["formats"] = {"csv", "pdf"};
    EXPECT_THROW(run_config_from_json(j), UnknownFormatError);

    j = valid_config_json();
    j["techniques"] = {{{"kind", "walk-forward"}, {"oops", 1}}};
    EXPECT_THROW(run_config_from_json(j), ConfigError);

    j = valid_config_json();
    j["workers"] = 0;
    EXPECT_THROW(run_config_from_json(j), ConfigError);
}

TEST(RunConfigJson, TechniqueParsing) {
    const auto t = technique_from_json({{"kind", "bootstrap"},
                                        {"bootstrap_iterations", 25},
                                        {"optimism_reduced", true}});
    EXPECT_EQ(t.kind, TechniqueKind::OutOfSampleBootstrap);
    EXPECT_EQ(t.bootstrap_iterations, 25);
    EXPECT_EQ(t.id(), "bootstrap-optimism-reduced");
    EXPECT_THROW(technique_from_json({{"kind", "nope"}}), ConfigError);
    EXPECT_THROW(technique_from_json({{"kind", "repeated-kfold"}, {"folds", 1}}), ConfigError);
}

TEST(RunConfig, EchoOmitsExecutionDetails) {
    auto cfg = small_config();
    cfg.workers = 8;
    cfg.output_dir = "somewhere";
    const auto echo = cfg.echo();
    EXPECT_FALSE(echo.contains("workers"));
    EXPECT_FALSE(echo.contains("output_dir"));
    EXPECT_EQ(echo.at("seed").get<uint64_t>(), 321u);
    auto other = cfg;
    other.workers = 1;
    other.output_dir = "elsewhere";
    EXPECT_EQ(echo.dump(), other.echo().dump());
}

TEST(RunExperiment, ProducesCompleteReport) {
    const auto cfg = small_config();
    std::vector<ProjectDataset> datasets = {synthetic_dataset(1, "alpha"),
                                            synthetic_dataset(2, "beta")};
    const auto rep = run_experiment(cfg, datasets);

    EXPECT_EQ(rep.rq1.size(), 6u); // 2 datasets x 3 classifiers
    EXPECT_EQ(rep.baselines.size(), 2u);
    EXPECT_EQ(rep.evaluations.size(), 6u); // 2 datasets x 3 techniques
    EXPECT_EQ(rep.sanity.size(), 2u);
    EXPECT_TRUE(rep.anova.has_value());
    EXPECT_TRUE(rep.hypotheses.count("H01_classifier"));
    EXPECT_TRUE(rep.hypotheses.count("H01_epv"));
    EXPECT_EQ(rep.runtime.at("cells_total").get<size_t>(), 6u + 18u);
    EXPECT_FALSE(has_fatal_failure(cfg, rep));

    // structural invariant: worst <= technique actual <= best
    for (const auto& ev : rep.evaluations) {
        const auto& b = rep.baselines.at(ev.dataset);
        EXPECT_GE(ev.actual_auc, b.worst_auc - 1e-12);
        EXPECT_LE(ev.actual_auc, b.best_auc + 1e-12);
        EXPECT_DOUBLE_EQ(ev.bias, ev.estimated_auc - ev.actual_auc);
    }
}

TEST(RunExperiment, WorkerCountDoesNotChangeOutput) {
    auto cfg = small_config();
    std::vector<ProjectDataset> datasets = {synthetic_dataset(1, "alpha"),
                                            synthetic_dataset(2, "beta")};
    cfg.workers = 1;
    const auto rep1 = run_experiment(cfg, datasets);
    cfg.workers = 4;
    const auto rep4 = run_experiment(cfg, datasets);
    EXPECT_EQ(rep1.to_json().dump(), rep4.to_json().dump());
    EXPECT_EQ(rq1_csv(rep1), rq1_csv(rep4));
    EXPECT_EQ(evaluations_csv(rep1), evaluations_csv(rep4));
    EXPECT_EQ(rq2_long_csv(rep1), rq2_long_csv(rep4));
}

TEST(RunExperiment, RejectsShortDatasets) {
    const auto cfg = small_config();
    std::vector<ProjectDataset> datasets = {
        synthetic_dataset(1, "alpha"),
        merge_releases({release_of("r1", {{0, false}, {1, true}}),
                        release_of("r2", {{0, false}, {1, true}})},
                       "short")};
    EXPECT_THROW(run_experiment(cfg, datasets), ConfigError);
}

TEST(RunExperiment, SingleClassLastReleaseIsExcludedNotFatal) {
    const auto cfg = small_config();
    auto bad_rows = [](bool defective) {
        std::vector<std::pair<double, bool>> rows;
        for (int i = 0; i < 10; ++i) rows.emplace_back(i * 0.1, defective || i % 2 == 0);
        return rows;
    };
    std::vector<ReleaseTable> rels = {release_of("r1", bad_rows(false)),
                                      release_of("r2", bad_rows(false)),
                                      release_of("r3", {{0.1, true}, {0.2, true}})};
    std::vector<ProjectDataset> datasets = {synthetic_dataset(1, "alpha"),
                                            merge_releases(rels, "oneclass")};
    const auto rep = run_experiment(cfg, datasets);
    // the degenerate dataset contributes exclusions, the healthy one results
    EXPECT_FALSE(rep.exclusions.empty());
    bool alpha_ok = false;
    for (const auto& ev : rep.evaluations) alpha_ok |= ev.dataset == "alpha";
    EXPECT_TRUE(alpha_ok);
    for (const auto& ev : rep.evaluations) EXPECT_NE(ev.dataset, "oneclass");
    EXPECT_FALSE(has_fatal_failure(cfg, rep)); // every technique still evaluated on alpha
}

TEST(Report, JsonRoundTripIsExact) {
    const auto cfg = small_config();
    std::vector<ProjectDataset> datasets = {synthetic_dataset(1, "alpha"),
                                            synthetic_dataset(2, "beta")};
    const auto rep = run_experiment(cfg, datasets);
    const auto j = rep.to_json();
    EXPECT_EQ(ExperimentReport::from_json(j).to_json().dump(2), j.dump(2));
}

TEST(Report, WriteFilesPerFormat) {
    const auto cfg = small_config();
    std::vector<ProjectDataset> datasets = {synthetic_dataset(1, "alpha"),
                                            synthetic_dataset(2, "beta")};
    const auto rep = run_experiment(cfg, datasets);
    const auto dir = std::filesystem::temp_directory_path() / "relval_report_test";
    std::filesystem::remove_all(dir);

    const auto written = write_report_files(rep, {"csv", "json", "markdown", "svg"}, dir);
    std::set<std::string> names;
    for (const auto& w : written) names.insert(std::filesystem::path(w).filename().string());
    EXPECT_EQ(names, (std::set<std::string>{"report.json", "rq1.csv", "evaluations.csv",
                                            "rq2_long.csv", "sanity.csv", "report.md",
                                            "bias.svg", "absolute_bias.svg",
                                            "technique_auc.svg"}));
    for (const auto& w : written) EXPECT_TRUE(std::filesystem::exists(w)) << w;
    EXPECT_THROW(write_report_files(rep, {"pdf"}, dir), UnknownFormatError);
    std::filesystem::remove_all(dir);
}

TEST(Report, HasFatalFailureWhenATechniqueVanishes) {
    const auto cfg = small_config();
    ExperimentReport rep;
    TechniqueEvaluation ev;
    ev.dataset = "d";
    ev.technique = "walk-forward";
    rep.evaluations.push_back(ev); // kfold and bootstrap missing entirely
    EXPECT_TRUE(has_fatal_failure(cfg, rep));
}

TEST(Directional, ChecksFollowTheData) {
    ExperimentReport rep;
    BaselineTriple b;
    b.best_auc = 0.9;
    b.medium_auc = 0.6;
    b.worst_auc = 0.3;
    rep.baselines["d1"] = b;
    rep.baselines["d2"] = b;
    auto ev = [](const std::string& ds, const std::string& tech, double est, double act) {
        TechniqueEvaluation e;
        e.dataset = ds;
        e.technique = tech;
        e.estimated_auc = est;
        e.actual_auc = act;
        e.bias = est - act;
        return e;
    };
    rep.evaluations = {ev("d1", "walk-forward", 0.75, 0.7),
                       ev("d2", "walk-forward", 0.58, 0.55),
                       ev("d1", "bootstrap", 0.8, 0.9),
                       ev("d2", "bootstrap", 0.95, 0.85)};
    const auto d = directional_checks(rep);
    EXPECT_TRUE(d.have_walk_forward);
    EXPECT_NEAR(d.walk_forward_mean_auc, 0.625, 1e-12);
    EXPECT_NEAR(d.medium_mean_auc, 0.6, 1e-12);
    EXPECT_TRUE(d.walk_forward_beats_medium_mean);
    EXPECT_EQ(d.walk_forward_beats_medium_datasets, 1); // only d1 exceeds 0.6
    EXPECT_EQ(d.datasets_total, 2);
    EXPECT_NEAR(d.median_bias.at("walk-forward"), 0.04, 1e-12);
    EXPECT_NEAR(d.median_bias.at("bootstrap"), 0.0, 1e-12); // (-0.1 + 0.1) / 2
    EXPECT_FALSE(d.all_median_bias_positive);
}

TEST(BoxStats, QuartilesAndWhiskers) {
    const auto b = box_stats({9, 1, 5, 3, 7, 2, 8, 4, 6});
    EXPECT_DOUBLE_EQ(b.q1, 3.0);
    EXPECT_DOUBLE_EQ(b.median, 5.0);
    EXPECT_DOUBLE_EQ(b.q3, 7.0);
    EXPECT_DOUBLE_EQ(b.whisker_lo, 1.0);
    EXPECT_DOUBLE_EQ(b.whisker_hi, 9.0);
    EXPECT_TRUE(b.outliers.empty());
}

TEST(BoxStats, TukeyOutliers) {
    const auto b = box_stats({1, 2, 3, 4, 5, 6, 7, 8, 100});
    EXPECT_DOUBLE_EQ(b.q1, 3.0);
    EXPECT_DOUBLE_EQ(b.q3, 7.0);
    EXPECT_DOUBLE_EQ(b.whisker_hi, 8.0); // 100 is past the 1.5*IQR fence
    ASSERT_EQ(b.outliers.size(), 1u);
    EXPECT_DOUBLE_EQ(b.outliers[0], 100.0);
    EXPECT_THROW(box_stats({}), EmptyError);
}

TEST(BoxStats, InterpolatedQuantiles) {
    const auto b = box_stats({1, 2, 3, 4}); // h = 0.25 * 3 = 0.75 for q1
    EXPECT_DOUBLE_EQ(b.q1, 1.75);
    EXPECT_DOUBLE_EQ(b.median, 2.5);
    EXPECT_DOUBLE_EQ(b.q3, 3.25);
}

TEST(Svg, DeterministicOutput) {
    const std::vector<std::pair<std::string, std::vector<double>>> groups = {
        {"a", {0.1, 0.2, 0.3, 0.25}}, {"b", {0.5, 0.4, 0.45}}};
    EXPECT_EQ(svg_boxplot("t", groups), svg_boxplot("t", groups));
    EXPECT_NE(svg_boxplot("t", groups).find("<svg"), std::string::npos);
    const std::vector<std::pair<std::string, double>> bars = {{"x", 0.5}, {"y", 0.7}};
    EXPECT_EQ(svg_bars("t", bars), svg_bars("t", bars));
    EXPECT_NE(svg_bars("t", bars).find("</svg>"), std::string::npos);
}

TEST(Sanity, TableOrientation) {
    // second-half defect odds over first-half defect odds
    std::vector<ReleaseTable> rels = {
        release_of("r1", {{0, false}, {1, false}, {2, false}, {3, true}}),
        release_of("r2", {{0, true}, {1, true}, {2, true}, {3, false}}),
    };
    const auto row = sanity_check_dataset(merge_releases(rels, "drift"));
    EXPECT_EQ(row.first_defective, 1);
    EXPECT_EQ(row.first_total, 4);
    EXPECT_EQ(row.second_defective, 3);
    EXPECT_EQ(row.second_total, 4);
    EXPECT_DOUBLE_EQ(row.first_rate, 0.25);
    EXPECT_DOUBLE_EQ(row.second_rate, 0.75);
    EXPECT_DOUBLE_EQ(row.difference, 0.5);
    EXPECT_DOUBLE_EQ(row.relative_difference, 2.0);
    EXPECT_GT(row.fisher.effect_size, 1.0); // defect odds rose
    // round trip
    EXPECT_EQ(SanityRow::from_json(row.to_json()).to_json().dump(), row.to_json().dump());
}
