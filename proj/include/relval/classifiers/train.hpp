#pragma once

#include <memory>
#include <string>
#include <vector>

#include "relval/classifiers/classifier.hpp"
#include "relval/classifiers/decision_tree.hpp"
#include "relval/classifiers/hyperpipes.hpp"
#include "relval/classifiers/knn.hpp"
#include "relval/classifiers/logistic.hpp"
#include "relval/classifiers/naive_bayes.hpp"
#include "relval/classifiers/random_forest.hpp"
#include "relval/classifiers/vfi.hpp"
#include "relval/classifiers/voted_perceptron.hpp"

namespace relval {

// The nine classifier configurations, in stable alphabetical order by name.
inline std::vector<ClassifierSpec> default_roster() {
    auto make = [](ClassifierKind kind, std::map<std::string, double> params) {
        ClassifierSpec s;
        s.kind = kind;
        s.parameters = std::move(params);
        s.name = to_string(kind);
        return s;
    };
    return {
        make(ClassifierKind::HyperPipes, {}),
        make(ClassifierKind::IB1, {{"k", 1}}),
        make(ClassifierKind::IBk, {{"k", 3}}),
        make(ClassifierKind::J48, {{"min_leaf", 2}, {"cf", 0.25}}),
        make(ClassifierKind::Logistic, {{"ridge", 1e-8}, {"max_iter", 200}, {"tol", 1e-6}}),
        make(ClassifierKind::NaiveBayes, {{"var_floor_ratio", 1e-6}}),
        make(ClassifierKind::RandomForest, {{"trees", 100}}),
        make(ClassifierKind::VFI, {}),
        make(ClassifierKind::VotedPerceptron, {{"epochs", 10}}),
    };
}

// Train a model for the spec. Deterministic given (spec, data, seed); only
// stochastic kinds (RandomForest) consume the seed. Single-class training
// data yields a constant-score model rather than an error.
inline TrainedModel train(const ClassifierSpec& spec, const LabeledMatrix& data,
                          uint64_t seed) {
    ClassifierSpec::validate(spec);
    if (data.rows() == 0) throw DegenerateDataError("cannot train on zero rows");

    const long pos = data.positives();
    if (pos == 0 || pos == static_cast<long>(data.rows())) {
        return TrainedModel(spec, data.width, std::nullopt,
                            std::make_shared<ConstantModel>(pos == 0 ? 0.0 : 1.0));
    }

    // distance/margin-based kinds see min-max-normalized features
    const bool normalized = spec.kind == ClassifierKind::IB1 ||
                            spec.kind == ClassifierKind::IBk ||
                            spec.kind == ClassifierKind::VotedPerceptron;
    std::optional<MinMaxScaler> scaler;
    LabeledMatrix scaled;
    const LabeledMatrix* input = &data;
    if (normalized) {
        scaler = MinMaxScaler::fit(data);
        scaled = scaler->transform(data);
        input = &scaled;
    }

    std::shared_ptr<const ModelImpl> impl;
    switch (spec.kind) {
    case ClassifierKind::HyperPipes: impl = train_hyperpipes(*input); break;
    case ClassifierKind::IB1: impl = train_knn(spec, *input, 1); break;
    case ClassifierKind::IBk: impl = train_knn(spec, *input, 3); break;
    case ClassifierKind::J48: impl = train_j48(spec, *input); break;
    case ClassifierKind::Logistic: impl = train_logistic(spec, *input); break;
    case ClassifierKind::NaiveBayes: impl = train_naive_bayes(spec, *input); break;
    case ClassifierKind::RandomForest: impl = train_random_forest(spec, *input, seed); break;
    case ClassifierKind::VFI: impl = train_vfi(*input); break;
    case ClassifierKind::VotedPerceptron: impl = train_voted_perceptron(spec, *input); break;
    }
    return TrainedModel(spec, data.width, std::move(scaler), std::move(impl));
}

} // namespace relval
