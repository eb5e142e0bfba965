#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "relval/classifiers/classifier.hpp"

namespace relval {

namespace detail {

// Solve A x = b for a symmetric positive (semi)definite A in place via
// Cholesky, escalating a diagonal jitter when the factorization stalls.
inline std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, size_t n) {
    for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0) {
        std::vector<double> l(a);
        if (jitter > 0.0)
            for (size_t i = 0; i < n; ++i) l[i * n + i] += jitter;
        bool ok = true;
        for (size_t i = 0; i < n && ok; ++i) {
            for (size_t j = 0; j <= i; ++j) {
                double s = l[i * n + j];
                for (size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
                if (i == j) {
                    if (s <= 0.0) { ok = false; break; }
                    l[i * n + i] = std::sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        if (!ok) {
            if (jitter > 1.0) throw DegenerateDataError("logistic normal equations are singular");
            continue;
        }
        std::vector<double> y(n), x(n);
        for (size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (size_t k = 0; k < i; ++k) s -= l[i * n + k] * y[k];
            y[i] = s / l[i * n + i];
        }
        for (size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * x[k];
            x[ii] = s / l[ii * n + ii];
        }
        return x;
    }
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace detail

// Ridge-regularized logistic regression fitted by iteratively reweighted
// least squares on raw features plus intercept.
class LogisticModel final : public ModelImpl {
public:
    LogisticModel(const LabeledMatrix& train, double ridge, int max_iter, double tol) {
        const size_t n = train.rows();
        const size_t d = train.width + 1; // intercept first
        beta_.assign(d, 0.0);

        std::vector<double> eta(n), mu(n), w(n), z(n);
        std::vector<double> xtwx(d * d), xtwz(d);
        std::vector<double> xi(d);

        for (int iter = 0; iter < max_iter; ++iter) {
            std::fill(xtwx.begin(), xtwx.end(), 0.0);
            std::fill(xtwz.begin(), xtwz.end(), 0.0);
            for (size_t r = 0; r < n; ++r) {
                auto row = train.row(r);
                xi[0] = 1.0;
                std::copy(row.begin(), row.end(), xi.begin() + 1);
                double e = 0.0;
                for (size_t f = 0; f < d; ++f) e += beta_[f] * xi[f];
                const double m = detail::sigmoid(e);
                const double y = train.labels[r] ? 1.0 : 0.0;
                const double wr = std::max(m * (1.0 - m), 1e-10);
                const double zr = e + (y - m) / wr;
                for (size_t f = 0; f < d; ++f) {
                    xtwz[f] += wr * xi[f] * zr;
                    for (size_t g = 0; g <= f; ++g) xtwx[f * d + g] += wr * xi[f] * xi[g];
                }
            }
            for (size_t f = 0; f < d; ++f)
                for (size_t g = f + 1; g < d; ++g) xtwx[f * d + g] = xtwx[g * d + f];
            for (size_t f = 1; f < d; ++f) xtwx[f * d + f] += ridge; // intercept unpenalized

            const std::vector<double> next = detail::solve_spd(xtwx, xtwz, d);
            double delta = 0.0;
            for (size_t f = 0; f < d; ++f) delta = std::max(delta, std::fabs(next[f] - beta_[f]));
            beta_ = next;
            if (delta < tol) break;
        }
    }

    double score(std::span<const double> x) const override {
        double e = beta_[0];
        for (size_t f = 0; f < x.size(); ++f) e += beta_[f + 1] * x[f];
        return detail::sigmoid(e);
    }

private:
    std::vector<double> beta_;
};

inline std::shared_ptr<const ModelImpl> train_logistic(const ClassifierSpec& spec,
                                                       const LabeledMatrix& train) {
    return std::make_shared<LogisticModel>(train, spec.param("ridge", 1e-8),
                                           static_cast<int>(spec.param("max_iter", 200)),
                                           spec.param("tol", 1e-6));
}

} // namespace relval
