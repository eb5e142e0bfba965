#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"

namespace relval {

// Voted perceptron (survival-count voting) on min-max-normalized features
// with a bias input, trained for a fixed number of epochs in fixed data
// order. The score maps the average signed vote into [0, 1].
class VotedPerceptronModel final : public ModelImpl {
public:
    VotedPerceptronModel(const LabeledMatrix& scaled_train, int epochs) {
        const size_t d = scaled_train.width + 1; // bias last
        std::vector<double> w(d, 0.0);
        double survived = 0.0;

        for (int e = 0; e < epochs; ++e) {
            for (size_t r = 0; r < scaled_train.rows(); ++r) {
                auto x = scaled_train.row(r);
                const double y = scaled_train.labels[r] ? 1.0 : -1.0;
                double a = w[d - 1];
                for (size_t f = 0; f + 1 < d; ++f) a += w[f] * x[f];
                if (y * a <= 0.0) {
                    if (survived > 0.0) {
                        weights_.push_back(w);
                        counts_.push_back(survived);
                    }
                    for (size_t f = 0; f + 1 < d; ++f) w[f] += y * x[f];
                    w[d - 1] += y;
                    survived = 1.0;
                } else {
                    survived += 1.0;
                }
            }
        }
        if (survived > 0.0) {
            weights_.push_back(w);
            counts_.push_back(survived);
        }
        if (weights_.empty()) { // no update ever fired on an all-correct zero vector
            weights_.push_back(std::vector<double>(d, 0.0));
            counts_.push_back(1.0);
        }
    }

    double score(std::span<const double> x) const override {
        double vote = 0.0, total = 0.0;
        for (size_t i = 0; i < weights_.size(); ++i) {
            const auto& w = weights_[i];
            double a = w.back();
            for (size_t f = 0; f < x.size(); ++f) a += w[f] * x[f];
            vote += counts_[i] * (a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0));
            total += counts_[i];
        }
        return 0.5 * (1.0 + vote / total);
    }

private:
    std::vector<std::vector<double>> weights_;
    std::vector<double> counts_;
};

inline std::shared_ptr<const ModelImpl> train_voted_perceptron(const ClassifierSpec& spec,
                                                               const LabeledMatrix& scaled_train) {
    return std::make_shared<VotedPerceptronModel>(
        scaled_train, static_cast<int>(spec.param("epochs", 10)));
}

} // namespace relval
