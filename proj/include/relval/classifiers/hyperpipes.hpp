#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"

namespace relval {

// One axis-aligned bounding box per class; an instance's affinity to a class
// is the fraction of its attributes falling inside that class's box. The
// score normalizes the two containment fractions, 0.5 when both are zero.
class HyperPipesModel final : public ModelImpl {
public:
    explicit HyperPipesModel(const LabeledMatrix& train) {
        const size_t d = train.width;
        for (int c = 0; c < 2; ++c) {
            lo_[c].assign(d, std::numeric_limits<double>::infinity());
            hi_[c].assign(d, -std::numeric_limits<double>::infinity());
        }
        for (size_t r = 0; r < train.rows(); ++r) {
            const int c = train.labels[r] ? 1 : 0;
            auto x = train.row(r);
            for (size_t f = 0; f < d; ++f) {
                lo_[c][f] = std::min(lo_[c][f], x[f]);
                hi_[c][f] = std::max(hi_[c][f], x[f]);
            }
        }
    }

    double score(std::span<const double> x) const override {
        double contain[2];
        for (int c = 0; c < 2; ++c) {
            long in = 0;
            for (size_t f = 0; f < x.size(); ++f)
                if (x[f] >= lo_[c][f] && x[f] <= hi_[c][f]) ++in;
            contain[c] = static_cast<double>(in) / static_cast<double>(x.size());
        }
        const double total = contain[0] + contain[1];
        if (total == 0.0) return 0.5;
        return contain[1] / total;
    }

private:
    std::vector<double> lo_[2], hi_[2];
};

inline std::shared_ptr<const ModelImpl> train_hyperpipes(const LabeledMatrix& train) {
    return std::make_shared<HyperPipesModel>(train);
}

} // namespace relval
