#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "relval/dataset.hpp"
#include "relval/error.hpp"
#include "relval/metrics.hpp"

namespace relval {

enum class ClassifierKind {
    HyperPipes,
    IB1,
    IBk,
    J48,
    Logistic,
    NaiveBayes,
    RandomForest,
    VFI,
    VotedPerceptron,
};

inline const char* to_string(ClassifierKind k) {
    switch (k) {
    case ClassifierKind::HyperPipes: return "HyperPipes";
    case ClassifierKind::IB1: return "IB1";
    case ClassifierKind::IBk: return "IBk";
    case ClassifierKind::J48: return "J48";
    case ClassifierKind::Logistic: return "Logistic";
    case ClassifierKind::NaiveBayes: return "NaiveBayes";
    case ClassifierKind::RandomForest: return "RandomForest";
    case ClassifierKind::VFI: return "VFI";
    case ClassifierKind::VotedPerceptron: return "VotedPerceptron";
    }
    return "?";
}

inline ClassifierKind classifier_kind_from_string(const std::string& s) {
    static const std::map<std::string, ClassifierKind> table = {
        {"HyperPipes", ClassifierKind::HyperPipes},
        {"IB1", ClassifierKind::IB1},
        {"IBk", ClassifierKind::IBk},
        {"J48", ClassifierKind::J48},
        {"Logistic", ClassifierKind::Logistic},
        {"NaiveBayes", ClassifierKind::NaiveBayes},
        {"RandomForest", ClassifierKind::RandomForest},
        {"VFI", ClassifierKind::VFI},
        {"VotedPerceptron", ClassifierKind::VotedPerceptron},
    };
    auto it = table.find(s);
    if (it == table.end()) throw ConfigError("unknown classifier kind '" + s + "'");
    return it->second;
}

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::NaiveBayes;
    std::map<std::string, double> parameters;
    std::string name;

    double param(const std::string& key, double fallback) const {
        auto it = parameters.find(key);
        return it == parameters.end() ? fallback : it->second;
    }

    nlohmann::json to_json() const {
        nlohmann::json p = nlohmann::json::object();
        for (const auto& [k, v] : parameters) p[k] = v;
        return {{"kind", to_string(kind)}, {"name", name}, {"parameters", p}};
    }

    static ClassifierSpec from_json(const nlohmann::json& j) {
        ClassifierSpec s;
        s.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
        s.name = j.contains("name") ? j.at("name").get<std::string>()
                                    : std::string(to_string(s.kind));
        if (j.contains("parameters"))
            for (auto it = j["parameters"].begin(); it != j["parameters"].end(); ++it)
                s.parameters[it.key()] = it.value().get<double>();
        validate(s);
        return s;
    }

    static void validate(const ClassifierSpec& s) {
        auto at_least = [&](const char* key, double lo) {
            auto it = s.parameters.find(key);
            if (it != s.parameters.end() && it->second < lo)
                throw ConfigError(std::string(to_string(s.kind)) + "." + key +
                                  " must be >= " + std::to_string(lo));
        };
        switch (s.kind) {
        case ClassifierKind::RandomForest: at_least("trees", 1); break;
        case ClassifierKind::IBk:
        case ClassifierKind::IB1: at_least("k", 1); break;
        case ClassifierKind::J48: at_least("min_leaf", 1); break;
        case ClassifierKind::Logistic: at_least("max_iter", 1); break;
        case ClassifierKind::VotedPerceptron: at_least("epochs", 1); break;
        default: break;
        }
    }
};

// Feature matrix with labels and row origins (release id, unit name).
struct LabeledMatrix {
    size_t width = 0;
    std::vector<double> values; // row-major, rows() x width
    std::vector<char> labels;
    std::vector<int> release_ids;
    std::vector<std::string> unit_names;

    size_t rows() const { return labels.size(); }
    std::span<const double> row(size_t i) const {
        return {values.data() + i * width, width};
    }
    void add_row(std::span<const double> feats, bool defective, int release_id,
                 std::string unit_name) {
        if (width == 0) width = feats.size();
        if (feats.size() != width)
            throw WidthMismatchError("row width " + std::to_string(feats.size()) +
                                     " != matrix width " + std::to_string(width));
        values.insert(values.end(), feats.begin(), feats.end());
        labels.push_back(defective ? 1 : 0);
        release_ids.push_back(release_id);
        unit_names.push_back(std::move(unit_name));
    }
    long positives() const { return std::count(labels.begin(), labels.end(), char(1)); }

    LabeledMatrix select(std::span<const int> indices) const {
        LabeledMatrix out;
        out.width = width;
        out.values.reserve(indices.size() * width);
        for (int i : indices)
            out.add_row(row(static_cast<size_t>(i)), labels[static_cast<size_t>(i)] != 0,
                        release_ids[static_cast<size_t>(i)],
                        unit_names[static_cast<size_t>(i)]);
        return out;
    }
};

inline LabeledMatrix matrix_from_release(const ReleaseTable& rel) {
    LabeledMatrix m;
    m.width = rel.feature_names.size();
    for (const auto& u : rel.rows)
        m.add_row(u.features, u.defective, rel.release_id, u.unit_name);
    return m;
}

// Release info is carried as an origin tag only, never as a predictor.
inline LabeledMatrix matrix_from_dataset(const ProjectDataset& ds) {
    LabeledMatrix m;
    m.width = ds.feature_names.size();
    for (const auto& rel : ds.releases)
        for (const auto& u : rel.rows)
            m.add_row(u.features, u.defective, rel.release_id, u.unit_name);
    return m;
}

// Per-feature (min, max) learned from training rows only. Test rows outside
// the training range clamp to [0, 1] after scaling.
struct MinMaxScaler {
    std::vector<double> lo, hi;

    static MinMaxScaler fit(const LabeledMatrix& m) {
        MinMaxScaler s;
        s.lo.assign(m.width, std::numeric_limits<double>::infinity());
        s.hi.assign(m.width, -std::numeric_limits<double>::infinity());
        for (size_t r = 0; r < m.rows(); ++r) {
            auto x = m.row(r);
            for (size_t f = 0; f < m.width; ++f) {
                s.lo[f] = std::min(s.lo[f], x[f]);
                s.hi[f] = std::max(s.hi[f], x[f]);
            }
        }
        return s;
    }

    double scale_one(size_t f, double v) const {
        if (hi[f] > lo[f]) {
            const double t = (v - lo[f]) / (hi[f] - lo[f]);
            return std::clamp(t, 0.0, 1.0);
        }
        // constant training feature: centre, with off-range values at the ends
        if (v > hi[f]) return 1.0;
        if (v < lo[f]) return 0.0;
        return 0.5;
    }

    void scale(std::span<const double> in, std::vector<double>& out) const {
        out.resize(in.size());
        for (size_t f = 0; f < in.size(); ++f) out[f] = scale_one(f, in[f]);
    }

    LabeledMatrix transform(const LabeledMatrix& m) const {
        LabeledMatrix out = m;
        std::vector<double> buf;
        for (size_t r = 0; r < m.rows(); ++r) {
            scale(m.row(r), buf);
            std::copy(buf.begin(), buf.end(), out.values.begin() + r * m.width);
        }
        return out;
    }
};

class ModelImpl {
public:
    virtual ~ModelImpl() = default;
    virtual double score(std::span<const double> x) const = 0;
};

// Degenerate policy: single-class training data yields a constant-score
// model (walk-forward's earliest folds can be all-clean).
class ConstantModel final : public ModelImpl {
public:
    explicit ConstantModel(double v) : value_(v) {}
    double score(std::span<const double>) const override { return value_; }

private:
    double value_;
};

// Immutable trained scoring function; safe to share across threads.
class TrainedModel {
public:
    TrainedModel(ClassifierSpec spec, size_t width,
                 std::optional<MinMaxScaler> scaler,
                 std::shared_ptr<const ModelImpl> impl)
        : spec_(std::move(spec)), width_(width), scaler_(std::move(scaler)),
          impl_(std::move(impl)) {}

    const ClassifierSpec& spec() const { return spec_; }
    size_t width() const { return width_; }

    double score(std::span<const double> x) const {
        if (x.size() != width_)
            throw WidthMismatchError("instance width " + std::to_string(x.size()) +
                                     " != training width " + std::to_string(width_));
        double v;
        if (scaler_) {
            thread_local std::vector<double> buf;
            scaler_->scale(x, buf);
            v = impl_->score(buf);
        } else {
            v = impl_->score(x);
        }
        return std::clamp(v, 0.0, 1.0);
    }

    ScoredSet score_all(const LabeledMatrix& m) const {
        ScoredSet out;
        out.scores.reserve(m.rows());
        out.labels = m.labels;
        for (size_t r = 0; r < m.rows(); ++r) out.scores.push_back(score(m.row(r)));
        return out;
    }

private:
    ClassifierSpec spec_;
    size_t width_;
    std::optional<MinMaxScaler> scaler_;
    std::shared_ptr<const ModelImpl> impl_;
};

} // namespace relval
