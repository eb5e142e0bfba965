#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"

namespace relval {

// k-nearest-neighbours on min-max-normalized features (the caller applies
// the scaler). Score is the defective fraction among the k nearest; distance
// ties break by training-row order. IB1 is the k=1 case.
class KnnModel final : public ModelImpl {
public:
    KnnModel(const LabeledMatrix& train, int k)
        : train_(train), k_(std::min<size_t>(static_cast<size_t>(k), train.rows())) {}

    double score(std::span<const double> x) const override {
        const size_t n = train_.rows();
        thread_local std::vector<std::pair<double, size_t>> dist;
        dist.clear();
        dist.reserve(n);
        for (size_t r = 0; r < n; ++r) {
            auto t = train_.row(r);
            double d2 = 0.0;
            for (size_t f = 0; f < x.size(); ++f) {
                const double dlt = x[f] - t[f];
                d2 += dlt * dlt;
            }
            dist.emplace_back(d2, r);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_), dist.end());
        long pos = 0;
        for (size_t i = 0; i < k_; ++i) pos += train_.labels[dist[i].second] ? 1 : 0;
        return static_cast<double>(pos) / static_cast<double>(k_);
    }

private:
    LabeledMatrix train_;
    size_t k_;
};

inline std::shared_ptr<const ModelImpl> train_knn(const ClassifierSpec& spec,
                                                  const LabeledMatrix& scaled_train,
                                                  int default_k) {
    const int k = static_cast<int>(spec.param("k", default_k));
    return std::make_shared<KnnModel>(scaled_train, k);
}

} // namespace relval
