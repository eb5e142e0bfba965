#include <gtest/gtest.h>

#include <cmath>

#include "relval/classifiers/train.hpp"
#include "relval/metrics.hpp"
#include "relval/rng.hpp"

using namespace relval;

namespace {

ClassifierSpec spec_of(ClassifierKind kind) {
    for (const auto& s : default_roster())
        if (s.kind == kind) return s;
    throw std::logic_error("kind not in roster");
}

LabeledMatrix matrix_of(const std::vector<std::pair<std::vector<double>, bool>>& rows) {
    LabeledMatrix m;
    for (size_t i = 0; i < rows.size(); ++i)
        m.add_row(rows[i].first, rows[i].second, 1, "u" + std::to_string(i));
    return m;
}

// 1-D linearly separable with a margin: negatives near 0, positives near 10
LabeledMatrix separable_1d() {
    std::vector<std::pair<std::vector<double>, bool>> rows;
    for (int i = 0; i < 8; ++i) rows.push_back({{0.1 * i}, false});
    for (int i = 0; i < 8; ++i) rows.push_back({{10.0 + 0.1 * i}, true});
    return matrix_of(rows);
}

} // namespace

TEST(Roster, NineDistinctAlphabeticalSpecs) {
    const auto roster = default_roster();
    ASSERT_EQ(roster.size(), 9u);
    for (size_t i = 1; i < roster.size(); ++i) EXPECT_LT(roster[i - 1].name, roster[i].name);
    ClassifierSpec ib1, ibk;
    for (const auto& s : roster) {
        if (s.name == "IB1") ib1 = s;
        if (s.name == "IBk") ibk = s;
    }
    EXPECT_DOUBLE_EQ(ib1.param("k", 0), 1.0);
    EXPECT_DOUBLE_EQ(ibk.param("k", 0), 3.0);
}

TEST(Train, EveryKindSeparatesItsTrainingData) {
    const LabeledMatrix data = separable_1d();
    for (const auto& spec : default_roster()) {
        const TrainedModel model = train(spec, data, 42);
        const double a = auc(model.score_all(data));
        EXPECT_DOUBLE_EQ(a, 1.0) << spec.name;
    }
}

TEST(Train, ScoresStayInUnitInterval) {
    const LabeledMatrix data = separable_1d();
    Rng rng(5);
    for (const auto& spec : default_roster()) {
        const TrainedModel model = train(spec, data, 1);
        for (int i = 0; i < 50; ++i) {
            const double x = rng.uniform() * 30.0 - 10.0;
            const double s = model.score({&x, 1});
            EXPECT_GE(s, 0.0) << spec.name;
            EXPECT_LE(s, 1.0) << spec.name;
        }
    }
}

TEST(Train, SingleClassGivesConstantModel) {
    const auto all_neg = matrix_of({{{1.0}, false}, {{2.0}, false}});
    const auto all_pos = matrix_of({{{1.0}, true}, {{2.0}, true}});
    for (const auto& spec : default_roster()) {
        const double x = 1.5;
        EXPECT_DOUBLE_EQ(train(spec, all_neg, 0).score({&x, 1}), 0.0) << spec.name;
        EXPECT_DOUBLE_EQ(train(spec, all_pos, 0).score({&x, 1}), 1.0) << spec.name;
    }
}

TEST(Train, ZeroRowsAndWidthMismatchAreErrors) {
    LabeledMatrix empty;
    EXPECT_THROW(train(spec_of(ClassifierKind::NaiveBayes), empty, 0), DegenerateDataError);
    const TrainedModel model = train(spec_of(ClassifierKind::NaiveBayes), separable_1d(), 0);
    const double two[2] = {1.0, 2.0};
    EXPECT_THROW(model.score({two, 2}), WidthMismatchError);
}

TEST(Train, DeterministicGivenSeed) {
    const LabeledMatrix data = separable_1d();
    for (const auto& spec : default_roster()) {
        const TrainedModel a = train(spec, data, 123);
        const TrainedModel b = train(spec, data, 123);
        for (double x : {-1.0, 0.5, 5.0, 10.5, 20.0})
            EXPECT_EQ(a.score({&x, 1}), b.score({&x, 1})) << spec.name;
    }
}

TEST(RandomForest, SeedChangesModel) {
    // noisy data so tree structure depends on the bootstrap draws
    std::vector<std::pair<std::vector<double>, bool>> rows;
    Rng rng(9);
    for (int i = 0; i < 60; ++i)
        rows.push_back({{rng.uniform(), rng.uniform()}, rng.below(2) == 1});
    const LabeledMatrix data = matrix_of(rows);
    const auto spec = spec_of(ClassifierKind::RandomForest);
    const TrainedModel a = train(spec, data, 1);
    const TrainedModel b = train(spec, data, 2);
    bool any_diff = false;
    for (int i = 0; i < 20 && !any_diff; ++i) {
        const double x[2] = {rng.uniform(), rng.uniform()};
        any_diff = a.score({x, 2}) != b.score({x, 2});
    }
    EXPECT_TRUE(any_diff);
}

TEST(NaiveBayes, TwoClusterPosterior) {
    std::vector<std::pair<std::vector<double>, bool>> rows;
    for (int i = 0; i < 5; ++i) rows.push_back({{0.0}, false});
    for (int i = 0; i < 5; ++i) rows.push_back({{10.0}, true});
    const TrainedModel model = train(spec_of(ClassifierKind::NaiveBayes), matrix_of(rows), 0);
    const double hi = 10.0, lo = 0.0;
    EXPECT_GT(model.score({&hi, 1}), 0.99);
    EXPECT_LT(model.score({&lo, 1}), 0.01);
}

TEST(Ib1, NearestNeighborDefinition) {
    const auto data = matrix_of({{{0.0}, false}, {{1.0}, true}});
    const TrainedModel model = train(spec_of(ClassifierKind::IB1), data, 0);
    const double x = 0.9;
    EXPECT_DOUBLE_EQ(model.score({&x, 1}), 1.0);
    const double y = 0.1;
    EXPECT_DOUBLE_EQ(model.score({&y, 1}), 0.0);
}

TEST(Ibk, KOfOneMatchesIb1) {
    const LabeledMatrix data = separable_1d();
    ClassifierSpec ibk = spec_of(ClassifierKind::IBk);
    ibk.parameters["k"] = 1;
    const TrainedModel a = train(ibk, data, 0);
    const TrainedModel b = train(spec_of(ClassifierKind::IB1), data, 0);
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform() * 12.0 - 1.0;
        EXPECT_EQ(a.score({&x, 1}), b.score({&x, 1}));
    }
}

TEST(Ibk, FractionOfDefectiveNeighbors) {
    // k=3: query at 0 has neighbors {0 neg, 1 neg, 2 pos} -> 1/3
    const auto data = matrix_of({{{0.0}, false}, {{1.0}, false}, {{2.0}, true}, {{10.0}, true}});
    const TrainedModel model = train(spec_of(ClassifierKind::IBk), data, 0);
    const double x = 0.0;
    EXPECT_NEAR(model.score({&x, 1}), 1.0 / 3.0, 1e-12);
}

TEST(Ibk, DistanceTiesBrokenByRowOrder) {
    // query at 5: rows 0 (4, neg) and 1 (6, pos) are equidistant; k=1 keeps
    // the earlier training row
    const auto data = matrix_of({{{4.0}, false}, {{6.0}, true}, {{0.0}, false}, {{10.0}, true}});
    ClassifierSpec ibk = spec_of(ClassifierKind::IBk);
    ibk.parameters["k"] = 1;
    const TrainedModel model = train(ibk, data, 0);
    const double x = 5.0;
    EXPECT_DOUBLE_EQ(model.score({&x, 1}), 0.0);
}

TEST(HyperPipes, ContainmentRule) {
    // pos bounds loc in [5,10]; neg bounds loc in [0,4]; instance 7 -> score 1
    const auto data = matrix_of({{{0.0}, false}, {{4.0}, false}, {{5.0}, true}, {{10.0}, true}});
    const TrainedModel model = train(spec_of(ClassifierKind::HyperPipes), data, 0);
    const double in_pos = 7.0;
    EXPECT_DOUBLE_EQ(model.score({&in_pos, 1}), 1.0);
    const double in_neg = 2.0;
    EXPECT_DOUBLE_EQ(model.score({&in_neg, 1}), 0.0);
    const double outside = 42.0; // contained by neither box -> uniform 0.5
    EXPECT_DOUBLE_EQ(model.score({&outside, 1}), 0.5);
}

TEST(Logistic, MonotoneInSignalDirection) {
    const TrainedModel model = train(spec_of(ClassifierKind::Logistic), separable_1d(), 0);
    double prev = -1.0;
    for (double x = -2.0; x <= 12.0; x += 0.5) {
        const double s = model.score({&x, 1});
        EXPECT_GE(s, prev);
        prev = s;
    }
}

TEST(J48, PruningNeverGrowsTheTree) {
    Rng rng(17);
    std::vector<std::pair<std::vector<double>, bool>> rows;
    for (int i = 0; i < 120; ++i) {
        const double x = rng.uniform();
        rows.push_back({{x, rng.uniform()}, x > 0.5 ? rng.below(10) < 8 : rng.below(10) < 2});
    }
    const LabeledMatrix data = matrix_of(rows);
    const auto unpruned = DecisionTreeModel(data, 2, 1.0); // cf=1 disables replacement
    const auto pruned = DecisionTreeModel(data, 2, 0.25);
    EXPECT_LE(pruned.node_count(), unpruned.node_count());
}

TEST(J48, LaplaceLeafScores) {
    // one pure split: leaf of 8 positives scores (8+1)/(8+2)
    std::vector<std::pair<std::vector<double>, bool>> rows;
    for (int i = 0; i < 8; ++i) rows.push_back({{0.0 + i * 0.01}, false});
    for (int i = 0; i < 8; ++i) rows.push_back({{1.0 + i * 0.01}, true});
    const TrainedModel model = train(spec_of(ClassifierKind::J48), matrix_of(rows), 0);
    const double x = 1.05;
    EXPECT_NEAR(model.score({&x, 1}), 9.0 / 10.0, 1e-12);
}

TEST(Vfi, PointIntervalVotes) {
    const auto data = matrix_of({{{0.0}, false}, {{0.0}, false}, {{1.0}, true}});
    const TrainedModel model = train(spec_of(ClassifierKind::VFI), data, 0);
    const double neg_pt = 0.0, pos_pt = 1.0;
    EXPECT_DOUBLE_EQ(model.score({&neg_pt, 1}), 0.0);
    EXPECT_DOUBLE_EQ(model.score({&pos_pt, 1}), 1.0);
}

TEST(VotedPerceptron, LearnsAMargin) {
    const TrainedModel model = train(spec_of(ClassifierKind::VotedPerceptron), separable_1d(), 0);
    const double lo = 0.2, hi = 10.2;
    EXPECT_GT(model.score({&hi, 1}), model.score({&lo, 1}));
}

TEST(Scaler, LeakageGuardClampsTestRows) {
    MinMaxScaler s = MinMaxScaler::fit(matrix_of({{{2.0}, false}, {{4.0}, true}}));
    EXPECT_DOUBLE_EQ(s.scale_one(0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(s.scale_one(0, 4.0), 1.0);
    EXPECT_DOUBLE_EQ(s.scale_one(0, 3.0), 0.5);
    EXPECT_DOUBLE_EQ(s.scale_one(0, -100.0), 0.0); // clamp below
    EXPECT_DOUBLE_EQ(s.scale_one(0, 100.0), 1.0);  // clamp above
}

TEST(Spec, JsonRoundTripAndValidation) {
    ClassifierSpec spec = spec_of(ClassifierKind::RandomForest);
    const ClassifierSpec back = ClassifierSpec::from_json(spec.to_json());
    EXPECT_EQ(back.kind, spec.kind);
    EXPECT_EQ(back.name, spec.name);
    EXPECT_EQ(back.parameters, spec.parameters);

    ClassifierSpec bad = spec;
    bad.parameters["trees"] = 0;
    EXPECT_THROW(ClassifierSpec::validate(bad), ConfigError);
    EXPECT_THROW(classifier_kind_from_string("Boosting"), ConfigError);
}
