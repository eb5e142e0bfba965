#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"

namespace relval {

// C4.5-style decision tree: gain-ratio splits with binary numeric thresholds
// at midpoints, a minimum of min_leaf instances per branch, pessimistic
// subtree-replacement pruning at confidence CF, and Laplace-smoothed leaf
// frequencies as scores.
class DecisionTreeModel final : public ModelImpl {
public:
    DecisionTreeModel(const LabeledMatrix& train, int min_leaf, double cf)
        : min_leaf_(static_cast<size_t>(min_leaf)) {
        std::vector<int> idx(train.rows());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        root_ = build(train, idx);
        if (cf > 0.0 && cf < 1.0) prune(root_, inverse_normal_upper(cf));
    }

    double score(std::span<const double> x) const override {
        size_t node = root_;
        while (!nodes_[node].is_leaf())
            node = x[static_cast<size_t>(nodes_[node].feature)] <= nodes_[node].threshold
                       ? nodes_[node].left
                       : nodes_[node].right;
        const auto& leaf = nodes_[node];
        return (leaf.pos + 1.0) / (leaf.n + 2.0);
    }

    // nodes reachable from the root (pruning collapses subtrees in place)
    size_t node_count() const { return count_from(root_); }

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        size_t left = 0, right = 0;
        double n = 0.0, pos = 0.0;
        bool is_leaf() const { return feature < 0; }
    };

    size_t min_leaf_;
    std::vector<Node> nodes_;
    size_t root_ = 0;

    static double entropy(double n, double pos) {
        if (n <= 0.0 || pos <= 0.0 || pos >= n) return 0.0;
        const double p = pos / n;
        return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
    }

    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain_ratio = 0.0;
    };

    Split best_split(const LabeledMatrix& data, const std::vector<int>& idx) const {
        const double n = static_cast<double>(idx.size());
        double pos_total = 0.0;
        for (int i : idx) pos_total += data.labels[static_cast<size_t>(i)] ? 1.0 : 0.0;
        const double parent_h = entropy(n, pos_total);

        Split best;
        std::vector<std::pair<double, char>> vals(idx.size());
        for (size_t f = 0; f < data.width; ++f) {
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
                const double right_n = n - left_n;
                if (left_n < static_cast<double>(min_leaf_) ||
                    right_n < static_cast<double>(min_leaf_))
                    continue;
                const double right_pos = pos_total - left_pos;
                const double wl = left_n / n, wr = right_n / n;
                const double gain = parent_h - wl * entropy(left_n, left_pos) -
                                    wr * entropy(right_n, right_pos);
                if (gain <= 1e-12) continue;
                const double split_info = -(wl * std::log2(wl) + wr * std::log2(wr));
                const double ratio = gain / split_info;
                if (ratio > best.gain_ratio) {
                    best.feature = static_cast<int>(f);
                    best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                    best.gain_ratio = ratio;
                }
            }
        }
        return best;
    }

    size_t build(const LabeledMatrix& data, const std::vector<int>& idx) {
        double pos = 0.0;
        for (int i : idx) pos += data.labels[static_cast<size_t>(i)] ? 1.0 : 0.0;
        const double n = static_cast<double>(idx.size());

        Split split;
        if (pos > 0.0 && pos < n && idx.size() >= 2 * min_leaf_)
            split = best_split(data, idx);

        if (split.feature < 0) {
            nodes_.push_back({-1, 0.0, 0, 0, n, pos});
            return nodes_.size() - 1;
        }
        std::vector<int> left, right;
        for (int i : idx) {
            const size_t r = static_cast<size_t>(i);
            (data.row(r)[static_cast<size_t>(split.feature)] <= split.threshold ? left : right)
                .push_back(i);
        }
        const size_t l = build(data, left);
        const size_t rgt = build(data, right);
        nodes_.push_back({split.feature, split.threshold, l, rgt, n, pos});
        return nodes_.size() - 1;
    }

    // z for the upper confidence bound at 1-CF (CF=0.25 -> z ~ 0.6745)
    static double inverse_normal_upper(double cf) {
        // bisection on the complementary error function; plenty for one call
        double lo = 0.0, hi = 10.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double tail = 0.5 * std::erfc(mid / std::sqrt(2.0));
            (tail > cf ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    // Wilson upper bound on the leaf error rate, times n.
    static double pessimistic_errors(double n, double errors, double z) {
        if (n <= 0.0) return 0.0;
        const double f = errors / n;
        const double z2 = z * z;
        const double u = (f + z2 / (2.0 * n) +
                          z * std::sqrt(f / n - f * f / n + z2 / (4.0 * n * n))) /
                         (1.0 + z2 / n);
        return n * u;
    }

    size_t count_from(size_t node) const {
        const Node& nd = nodes_[node];
        if (nd.is_leaf()) return 1;
        return 1 + count_from(nd.left) + count_from(nd.right);
    }

    double prune(size_t node, double z) {
        Node& nd = nodes_[node];
        const double errors = std::min(nd.pos, nd.n - nd.pos);
        const double as_leaf = pessimistic_errors(nd.n, errors, z);
        if (nd.is_leaf()) return as_leaf;
        const double as_subtree = prune(nd.left, z) + prune(nd.right, z);
        if (as_leaf <= as_subtree) {
            nd.feature = -1; // collapse to a leaf
            return as_leaf;
        }
        return as_subtree;
    }
};

inline std::shared_ptr<const ModelImpl> train_j48(const ClassifierSpec& spec,
                                                  const LabeledMatrix& train) {
    return std::make_shared<DecisionTreeModel>(train,
                                               static_cast<int>(spec.param("min_leaf", 2)),
                                               spec.param("cf", 0.25));
}

} // namespace relval
