#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "relval/error.hpp"

namespace relval {

// Parallel vectors of (score, actual label). AUC needs at least one positive
// and one negative.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<char> labels; // 1 = defective

    size_t size() const { return scores.size(); }
    long positives() const { return std::count(labels.begin(), labels.end(), char(1)); }
    long negatives() const { return static_cast<long>(size()) - positives(); }
};

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    long total() const { return tp + fp + tn + fn; }
};

// AUC as the Mann-Whitney pair statistic: over all (positive, negative)
// pairs, a win counts 1, a tie 0.5, divided by the pair count. Computed via
// average ranks, O(n log n).
inline double auc(const ScoredSet& set) {
    const size_t n = set.size();
    const long pos = set.positives();
    const long neg = static_cast<long>(n) - pos;
    if (pos == 0 || neg == 0)
        throw SingleClassError("AUC needs at least one positive and one negative");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return set.scores[a] < set.scores[b]; });

    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && set.scores[order[j]] == set.scores[order[i]]) ++j;
        // ranks i+1 .. j averaged over the tie group
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (size_t k = i; k < j; ++k)
            if (set.labels[order[k]]) rank_sum_pos += avg_rank;
        i = j;
    }
    const double p = static_cast<double>(pos);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

// Predicted-positive iff score > threshold (strict).
inline ConfusionCounts confusion(const ScoredSet& set, double threshold) {
    ConfusionCounts c;
    for (size_t i = 0; i < set.size(); ++i) {
        const bool pred = set.scores[i] > threshold;
        const bool actual = set.labels[i] != 0;
        if (pred && actual) ++c.tp;
        else if (pred && !actual) ++c.fp;
        else if (!pred && actual) ++c.fn;
        else ++c.tn;
    }
    return c;
}

struct ThresholdMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double mcc = 0.0;
};

// Zero denominators yield 0 by convention, so degenerate constant classifiers
// are penalized rather than crashing.
inline ThresholdMetrics precision_recall_mcc(const ConfusionCounts& c) {
    ThresholdMetrics m;
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    if (tp + fp > 0) m.precision = tp / (tp + fp);
    if (tp + fn > 0) m.recall = tp / (tp + fn);
    const double denom2 = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom2 > 0) m.mcc = (tp * tn - fp * fn) / std::sqrt(denom2);
    return m;
}

} // namespace relval
