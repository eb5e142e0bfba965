#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"

namespace relval {

// Voting feature intervals. Per feature, the class min/max values carve the
// axis into point intervals (at the endpoints) and open range intervals
// between them. Each interval votes for a class with the class-conditional
// training count divided by the class size, normalized within the interval;
// the instance's score is the defective share of the summed votes.
class VfiModel final : public ModelImpl {
public:
    explicit VfiModel(const LabeledMatrix& train) {
        const size_t d = train.width;
        features_.resize(d);
        double class_size[2] = {0.0, 0.0};
        for (size_t r = 0; r < train.rows(); ++r) class_size[train.labels[r] ? 1 : 0] += 1.0;

        for (size_t f = 0; f < d; ++f) {
            auto& ft = features_[f];
            double lo[2] = {std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()};
            double hi[2] = {-std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()};
            for (size_t r = 0; r < train.rows(); ++r) {
                const int c = train.labels[r] ? 1 : 0;
                const double v = train.row(r)[f];
                lo[c] = std::min(lo[c], v);
                hi[c] = std::max(hi[c], v);
            }
            std::vector<double> pts = {lo[0], hi[0], lo[1], hi[1]};
            std::sort(pts.begin(), pts.end());
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
            ft.endpoints = pts;
            // intervals: below, [p0], (p0,p1), [p1], ..., [pm], above
            ft.votes.assign(2 * pts.size() + 1, {0.0, 0.0});
            for (size_t r = 0; r < train.rows(); ++r) {
                const int c = train.labels[r] ? 1 : 0;
                ft.votes[interval_of(ft, train.row(r)[f])][c] += 1.0;
            }
            for (auto& v : ft.votes) {
                for (int c = 0; c < 2; ++c)
                    if (class_size[c] > 0.0) v[c] /= class_size[c];
                const double s = v[0] + v[1];
                if (s > 0.0) {
                    v[0] /= s;
                    v[1] /= s;
                }
            }
        }
    }

    double score(std::span<const double> x) const override {
        double vote[2] = {0.0, 0.0};
        for (size_t f = 0; f < x.size(); ++f) {
            const auto& v = features_[f].votes[interval_of(features_[f], x[f])];
            vote[0] += v[0];
            vote[1] += v[1];
        }
        const double total = vote[0] + vote[1];
        if (total == 0.0) return 0.5;
        return vote[1] / total;
    }

private:
    struct Feature {
        std::vector<double> endpoints;
        std::vector<std::array<double, 2>> votes; // indexed by interval
    };

    // interval index: 0 = below first endpoint; 2i+1 = point interval at
    // endpoint i; 2i+2 = open range between endpoints i and i+1 (the last
    // range is everything above the final endpoint)
    static size_t interval_of(const Feature& ft, double v) {
        const auto& e = ft.endpoints;
        const size_t i = static_cast<size_t>(std::lower_bound(e.begin(), e.end(), v) - e.begin());
        if (i < e.size() && e[i] == v) return 2 * i + 1;
        return 2 * i;
    }

    std::vector<Feature> features_;
};

inline std::shared_ptr<const ModelImpl> train_vfi(const LabeledMatrix& train) {
    return std::make_shared<VfiModel>(train);
}

} // namespace relval
