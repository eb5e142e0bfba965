#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"
#include "relval/rng.hpp"

namespace relval {

namespace rf_detail {

// Unpruned binary gini tree over a row subset, sampling `mtry` candidate
// features at each node.
class RandomTree {
public:
    RandomTree(const LabeledMatrix& data, std::vector<int> sample, size_t mtry, Rng& rng)
        : mtry_(std::max<size_t>(1, std::min(mtry, data.width))) {
        root_ = build(data, sample, rng);
    }

    double score(std::span<const double> x) const {
        size_t node = root_;
        while (!nodes_[node].is_leaf())
            node = x[static_cast<size_t>(nodes_[node].feature)] <= nodes_[node].threshold
                       ? nodes_[node].left
                       : nodes_[node].right;
        return (nodes_[node].pos + 1.0) / (nodes_[node].n + 2.0);
    }

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        size_t left = 0, right = 0;
        double n = 0.0, pos = 0.0;
        bool is_leaf() const { return feature < 0; }
    };

    size_t mtry_;
    std::vector<Node> nodes_;
    size_t root_ = 0;

    static double gini_impurity(double n, double pos) {
        if (n <= 0.0) return 0.0;
        const double p = pos / n;
        return 2.0 * p * (1.0 - p);
    }

    size_t build(const LabeledMatrix& data, const std::vector<int>& idx, Rng& rng) {
        double pos = 0.0;
        for (int i : idx) pos += data.labels[static_cast<size_t>(i)] ? 1.0 : 0.0;
        const double n = static_cast<double>(idx.size());

        int best_feature = -1;
        double best_threshold = 0.0, best_score = gini_impurity(n, pos) - 1e-12;

        if (pos > 0.0 && pos < n && idx.size() >= 2) {
            // sample mtry features without replacement
            std::vector<size_t> feats(data.width);
            for (size_t f = 0; f < data.width; ++f) feats[f] = f;
            for (size_t f = 0; f < mtry_; ++f) {
                const size_t j = f + static_cast<size_t>(rng.below(data.width - f));
                std::swap(feats[f], feats[j]);
            }

            std::vector<std::pair<double, char>> vals(idx.size());
            for (size_t fi = 0; fi < mtry_; ++fi) {
                const size_t f = feats[fi];
                for (size_t i = 0; i < idx.size(); ++i) {
                    const size_t r = static_cast<size_t>(idx[i]);
                    vals[i] = {data.row(r)[f], data.labels[r]};
                }
                std::sort(vals.begin(), vals.end());
                double left_n = 0.0, left_pos = 0.0;
                for (size_t i = 0; i + 1 < vals.size(); ++i) {
                    left_n += 1.0;
                    left_pos += vals[i].second ? 1.0 : 0.0;
                    if (vals[i].first == vals[i + 1].first) continue;
                    const double right_n = n - left_n, right_pos = pos - left_pos;
                    const double weighted = (left_n / n) * gini_impurity(left_n, left_pos) +
                                            (right_n / n) * gini_impurity(right_n, right_pos);
                    if (weighted < best_score) {
                        best_score = weighted;
                        best_feature = static_cast<int>(f);
                        best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                    }
                }
            }
        }

        if (best_feature < 0) {
            nodes_.push_back({-1, 0.0, 0, 0, n, pos});
            return nodes_.size() - 1;
        }
        std::vector<int> left, right;
        for (int i : idx) {
            const size_t r = static_cast<size_t>(i);
            (data.row(r)[static_cast<size_t>(best_feature)] <= best_threshold ? left : right)
                .push_back(i);
        }
        const size_t l = build(data, left, rng);
        const size_t rgt = build(data, right, rng);
        nodes_.push_back({best_feature, best_threshold, l, rgt, n, pos});
        return nodes_.size() - 1;
    }
};

// n draws with replacement; tree t of a forest seeded `seed` uses the stream
// keyed by (seed, t).
inline std::vector<int> bootstrap_sample(size_t n, Rng& rng) {
    std::vector<int> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = static_cast<int>(rng.below(n));
    return out;
}

} // namespace rf_detail

// Bagged ensemble of random gini trees; the forest score is the mean of the
// trees' Laplace-smoothed leaf probabilities.
class RandomForestModel final : public ModelImpl {
public:
    RandomForestModel(const LabeledMatrix& train, int trees, size_t mtry, uint64_t seed) {
        trees_.reserve(static_cast<size_t>(trees));
        for (int t = 0; t < trees; ++t) {
            Rng rng = StreamKey(seed).mix("tree").mix(static_cast<uint64_t>(t)).rng();
            auto sample = rf_detail::bootstrap_sample(train.rows(), rng);
            trees_.emplace_back(train, std::move(sample), mtry, rng);
        }
    }

    double score(std::span<const double> x) const override {
        double s = 0.0;
        for (const auto& t : trees_) s += t.score(x);
        return s / static_cast<double>(trees_.size());
    }

private:
    std::vector<rf_detail::RandomTree> trees_;
};

inline std::shared_ptr<const ModelImpl> train_random_forest(const ClassifierSpec& spec,
                                                            const LabeledMatrix& train,
                                                            uint64_t seed) {
    const int trees = static_cast<int>(spec.param("trees", 100));
    const size_t mtry = spec.parameters.count("mtry")
                            ? static_cast<size_t>(spec.param("mtry", 0))
                            : static_cast<size_t>(
                                  std::ceil(std::sqrt(static_cast<double>(train.width))));
    return std::make_shared<RandomForestModel>(train, trees, mtry, seed);
}

} // namespace relval
