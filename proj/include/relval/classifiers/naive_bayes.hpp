#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"

namespace relval {

// Gaussian naive Bayes on raw features. Per-class per-feature normal
// densities with a variance floor proportional to the feature's training
// range; Laplace-smoothed class priors; score is the normalized posterior of
// the defective class.
class NaiveBayesModel final : public ModelImpl {
public:
    NaiveBayesModel(const LabeledMatrix& train, double floor_ratio) {
        const size_t d = train.width;
        const size_t n = train.rows();
        const long pos = train.positives();
        log_prior_[0] = std::log((static_cast<double>(n - pos) + 1.0) / (static_cast<double>(n) + 2.0));
        log_prior_[1] = std::log((static_cast<double>(pos) + 1.0) / (static_cast<double>(n) + 2.0));

        for (int c = 0; c < 2; ++c) {
            mean_[c].assign(d, 0.0);
            var_[c].assign(d, 0.0);
        }
        std::vector<double> count(2, 0.0);
        for (size_t r = 0; r < n; ++r) {
            const int c = train.labels[r] ? 1 : 0;
            count[c] += 1.0;
            auto x = train.row(r);
            for (size_t f = 0; f < d; ++f) mean_[c][f] += x[f];
        }
        for (int c = 0; c < 2; ++c)
            for (size_t f = 0; f < d; ++f) mean_[c][f] /= std::max(count[c], 1.0);
        for (size_t r = 0; r < n; ++r) {
            const int c = train.labels[r] ? 1 : 0;
            auto x = train.row(r);
            for (size_t f = 0; f < d; ++f) {
                const double dlt = x[f] - mean_[c][f];
                var_[c][f] += dlt * dlt;
            }
        }
        // variance floor: floor_ratio x feature range, with a small absolute
        // backstop for constant features
        for (size_t f = 0; f < d; ++f) {
            double lo = train.row(0)[f], hi = lo;
            for (size_t r = 1; r < n; ++r) {
                lo = std::min(lo, train.row(r)[f]);
                hi = std::max(hi, train.row(r)[f]);
            }
            const double floor = std::max(floor_ratio * (hi - lo), 1e-12);
            for (int c = 0; c < 2; ++c) {
                var_[c][f] = count[c] > 1 ? var_[c][f] / (count[c] - 1.0) : 0.0;
                var_[c][f] = std::max(var_[c][f], floor);
            }
        }
    }

    double score(std::span<const double> x) const override {
        double log_p[2];
        for (int c = 0; c < 2; ++c) {
            double lp = log_prior_[c];
            for (size_t f = 0; f < x.size(); ++f) {
                const double dlt = x[f] - mean_[c][f];
                lp += -0.5 * (std::log(2.0 * M_PI * var_[c][f]) + dlt * dlt / var_[c][f]);
            }
            log_p[c] = lp;
        }
        const double m = std::max(log_p[0], log_p[1]);
        const double e0 = std::exp(log_p[0] - m), e1 = std::exp(log_p[1] - m);
        return e1 / (e0 + e1);
    }

private:
    double log_prior_[2];
    std::vector<double> mean_[2], var_[2];
};

inline std::shared_ptr<const ModelImpl> train_naive_bayes(const ClassifierSpec& spec,
                                                          const LabeledMatrix& train) {
    return std::make_shared<NaiveBayesModel>(train, spec.param("var_floor_ratio", 1e-6));
}

} // namespace relval
