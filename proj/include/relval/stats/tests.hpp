#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "relval/error.hpp"
#include "relval/stats/dist.hpp"

namespace relval::stats {

struct StatReport {
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
    double effect_size = std::numeric_limits<double>::quiet_NaN();
    std::string effect_kind; // eta_squared | cohens_d | odds_ratio | ""
    long n = 0;
    std::string notes;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"method", method},
                            {"statistic", statistic},
                            {"p_value", p_value},
                            {"n", n},
                            {"notes", notes}};
        if (!effect_kind.empty()) {
            j["effect_size"] = effect_size;
            j["effect_kind"] = effect_kind;
        }
        return j;
    }

    static StatReport from_json(const nlohmann::json& j) {
        StatReport r;
        r.method = j.at("method").get<std::string>();
        r.statistic = j.at("statistic").get<double>();
        r.p_value = j.at("p_value").get<double>();
        r.n = j.at("n").get<long>();
        r.notes = j.at("notes").get<std::string>();
        if (j.contains("effect_kind")) {
            r.effect_kind = j.at("effect_kind").get<std::string>();
            r.effect_size = j.at("effect_size").get<double>();
        }
        return r;
    }
};

struct ContingencyTable2x2 {
    long a = 0, b = 0, c = 0, d = 0; // rows x columns, row-major
};

namespace detail {

// log hypergeometric pmf of cell `k` given margins (r1 = k's row total,
// r2 = other row, c1 = k's column total)
inline double log_hyper(long k, long r1, long r2, long c1) {
    return ln_choose(static_cast<double>(r1), static_cast<double>(k)) +
           ln_choose(static_cast<double>(r2), static_cast<double>(c1 - k)) -
           ln_choose(static_cast<double>(r1 + r2), static_cast<double>(c1));
}

// Conditional maximum-likelihood odds ratio: the psi solving
// E[a | margins, psi] = a_obs under Fisher's noncentral hypergeometric.
inline double conditional_mle_or(long a, long r1, long r2, long c1) {
    const long k_lo = std::max(0L, c1 - r2);
    const long k_hi = std::min(r1, c1);
    if (a <= k_lo) return 0.0;
    if (a >= k_hi) return std::numeric_limits<double>::infinity();

    std::vector<double> logw;
    logw.reserve(static_cast<size_t>(k_hi - k_lo + 1));
    for (long k = k_lo; k <= k_hi; ++k) logw.push_back(log_hyper(k, r1, r2, c1));

    auto mean_at = [&](double log_psi) {
        double max_term = -std::numeric_limits<double>::infinity();
        for (long k = k_lo; k <= k_hi; ++k)
            max_term = std::max(max_term, logw[static_cast<size_t>(k - k_lo)] +
                                              static_cast<double>(k) * log_psi);
        double z = 0.0, kz = 0.0;
        for (long k = k_lo; k <= k_hi; ++k) {
            const double t = std::exp(logw[static_cast<size_t>(k - k_lo)] +
                                      static_cast<double>(k) * log_psi - max_term);
            z += t;
            kz += static_cast<double>(k) * t;
        }
        return kz / z;
    };

    double lo = -80.0, hi = 80.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mean_at(mid) < static_cast<double>(a) ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

} // namespace detail

// Two-sided Fisher exact test: the p-value sums the hypergeometric
// probabilities of every margin-preserving table no more probable than the
// observed one. Effect size is the conditional MLE odds ratio (the estimate
// R's fisher.test reports); the Haldane-corrected sample odds ratio is
// carried in the notes.
inline StatReport fisher_exact(const ContingencyTable2x2& t) {
    const long r1 = t.a + t.b, r2 = t.c + t.d, c1 = t.a + t.c;
    const long total = r1 + r2;

    StatReport rep;
    rep.method = "fisher-exact (two-sided)";
    rep.n = total;
    rep.effect_kind = "odds_ratio";

    double sample_or;
    {
        double a = static_cast<double>(t.a), b = static_cast<double>(t.b);
        double c = static_cast<double>(t.c), d = static_cast<double>(t.d);
        const bool zero_cell = t.a == 0 || t.b == 0 || t.c == 0 || t.d == 0;
        if (zero_cell) { a += 0.5; b += 0.5; c += 0.5; d += 0.5; }
        sample_or = (a * d) / (b * c);
        rep.notes = std::string("or_sample") + (zero_cell ? "_haldane" : "") + "=" +
                    std::to_string(sample_or);
    }

    if (total == 0 || r1 == 0 || r2 == 0 || c1 == 0 || c1 == total) {
        rep.p_value = 1.0;
        rep.statistic = 1.0;
        rep.effect_size = sample_or;
        return rep;
    }

    const long k_lo = std::max(0L, c1 - r2);
    const long k_hi = std::min(r1, c1);
    const double log_obs = detail::log_hyper(t.a, r1, r2, c1);
    double p = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) {
        const double lp = detail::log_hyper(k, r1, r2, c1);
        if (lp <= log_obs + 1e-7) p += std::exp(lp);
    }
    rep.p_value = std::min(1.0, p);
    rep.statistic = std::exp(log_obs);

    const double mle = detail::conditional_mle_or(t.a, r1, r2, c1);
    rep.effect_size = std::isfinite(mle) && mle > 0.0 ? mle : sample_or;
    return rep;
}

namespace detail {

struct RankedDiffs {
    std::vector<double> ranks; // of |d|, average ranks on ties
    std::vector<int> signs;
    double w_plus = 0.0, w_minus = 0.0;
    double tie_correction = 0.0; // sum over tie groups of (t^3 - t)
};

inline RankedDiffs rank_differences(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> diffs;
    for (const auto& [x, y] : pairs) {
        const double d = x - y;
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw AllZeroDifferencesError("all paired differences are zero");

    const size_t n = diffs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        return std::fabs(diffs[i]) < std::fabs(diffs[j]);
    });

    RankedDiffs out;
    out.ranks.resize(n);
    out.signs.resize(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && std::fabs(diffs[order[j]]) == std::fabs(diffs[order[i]])) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        const double t = static_cast<double>(j - i);
        out.tie_correction += t * t * t - t;
        for (size_t k = i; k < j; ++k) out.ranks[order[k]] = avg_rank;
        i = j;
    }
    for (size_t k = 0; k < n; ++k) {
        out.signs[k] = diffs[k] > 0.0 ? 1 : -1;
        (diffs[k] > 0.0 ? out.w_plus : out.w_minus) += out.ranks[k];
    }
    return out;
}

// Exact tail probabilities of W+ by enumerating all 2^n sign patterns.
inline double wilcoxon_exact_two_sided(const std::vector<double>& ranks, double w_plus) {
    const size_t n = ranks.size();
    const uint64_t total = uint64_t{1} << n;
    uint64_t le = 0, ge = 0;
    for (uint64_t mask = 0; mask < total; ++mask) {
        double w = 0.0;
        for (size_t k = 0; k < n; ++k)
            if (mask & (uint64_t{1} << k)) w += ranks[k];
        if (w <= w_plus + 1e-9) ++le;
        if (w >= w_plus - 1e-9) ++ge;
    }
    const double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
    return std::min(1.0, p);
}

} // namespace detail

// Wilcoxon signed-rank test. Zero differences are dropped, tied absolute
// differences share average ranks. Exact two-sided p by sign-pattern
// enumeration for n <= 20, normal approximation with continuity and tie
// correction above. The reported statistic is W+ - W- (sign flips when the
// samples are swapped).
inline StatReport wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
    const auto rd = detail::rank_differences(pairs);
    const size_t n = rd.ranks.size();

    StatReport rep;
    rep.n = static_cast<long>(n);
    rep.statistic = rd.w_plus - rd.w_minus;
    rep.notes = "w_plus=" + std::to_string(rd.w_plus) + " w_minus=" + std::to_string(rd.w_minus);

    if (n <= 20) {
        rep.method = "wilcoxon-signed-rank (exact)";
        rep.p_value = detail::wilcoxon_exact_two_sided(rd.ranks, rd.w_plus);
    } else {
        rep.method = "wilcoxon-signed-rank (normal approximation)";
        const double dn = static_cast<double>(n);
        const double mean = dn * (dn + 1.0) / 4.0;
        const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - rd.tie_correction / 48.0;
        const double num = rd.w_plus - mean;
        const double cc = num > 0.5 ? -0.5 : (num < -0.5 ? 0.5 : -num); // toward the mean
        const double z = (num + cc) / std::sqrt(var);
        rep.p_value = std::min(1.0, 2.0 * norm_sf(std::fabs(z)));
    }
    return rep;
}

// Two-sided paired t-test on the differences.
inline StatReport paired_t_test(const std::vector<std::pair<double, double>>& pairs) {
    const size_t n = pairs.size();
    if (n < 2) throw TooFewError("paired t-test needs at least 2 pairs");
    double mean = 0.0;
    for (const auto& [x, y] : pairs) mean += x - y;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& [x, y] : pairs) {
        const double d = (x - y) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) throw ZeroVarianceError("paired differences have zero variance");

    StatReport rep;
    rep.method = "paired-t (two-sided)";
    rep.n = static_cast<long>(n);
    rep.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    rep.p_value = t_two_sided_p(rep.statistic, static_cast<double>(n - 1));
    return rep;
}

inline double cohens_d_paired(const std::vector<std::pair<double, double>>& pairs) {
    const size_t n = pairs.size();
    double mean = 0.0;
    for (const auto& [x, y] : pairs) mean += x - y;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& [x, y] : pairs) {
        const double d = (x - y) - mean;
        ss += d * d;
    }
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    return sd > 0.0 ? mean / sd : 0.0;
}

// Shapiro-Wilk W test (Royston's AS R94 approximation), 3 <= n <= 5000.
inline StatReport shapiro_wilk(std::vector<double> values) {
    const size_t n = values.size();
    if (n < 3 || n > 5000)
        throw TooFewError("Shapiro-Wilk requires 3 <= n <= 5000, got " + std::to_string(n));
    std::sort(values.begin(), values.end());

    StatReport rep;
    rep.method = "shapiro-wilk (AS R94)";
    rep.n = static_cast<long>(n);

    if (values.front() == values.back()) {
        // zero range: maximally non-normal by convention
        rep.statistic = 0.0;
        rep.p_value = 0.0;
        rep.notes = "constant sample";
        return rep;
    }

    const double dn = static_cast<double>(n);
    std::vector<double> m(n);
    for (size_t i = 0; i < n; ++i)
        m[i] = norm_ppf((static_cast<double>(i) + 0.625) / (dn + 0.25));
    double m_sq = 0.0;
    for (double v : m) m_sq += v * v;

    std::vector<double> w(n);
    const double u = 1.0 / std::sqrt(dn);
    const double rsqrt_msq = 1.0 / std::sqrt(m_sq);
    if (n == 3) {
        w = {-std::sqrt(0.5), 0.0, std::sqrt(0.5)};
    } else {
        const double wn = -2.706056 * std::pow(u, 5) + 4.434685 * std::pow(u, 4) -
                          2.071190 * std::pow(u, 3) - 0.147981 * u * u + 0.221157 * u +
                          m[n - 1] * rsqrt_msq;
        double phi;
        if (n <= 5) {
            phi = (m_sq - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * wn * wn);
            for (size_t i = 1; i + 1 < n; ++i) w[i] = m[i] / std::sqrt(phi);
            w[n - 1] = wn;
            w[0] = -wn;
        } else {
            const double wn1 = -3.582633 * std::pow(u, 5) + 5.682633 * std::pow(u, 4) -
                               1.752461 * std::pow(u, 3) - 0.293762 * u * u + 0.042981 * u +
                               m[n - 2] * rsqrt_msq;
            phi = (m_sq - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                  (1.0 - 2.0 * wn * wn - 2.0 * wn1 * wn1);
            for (size_t i = 2; i + 2 < n; ++i) w[i] = m[i] / std::sqrt(phi);
            w[n - 1] = wn;
            w[n - 2] = wn1;
            w[0] = -wn;
            w[1] = -wn1;
        }
    }

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= dn;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < n; ++i) {
        num += w[i] * values[i];
        den += (values[i] - mean) * (values[i] - mean);
    }
    const double W = (num * num) / den;
    rep.statistic = W;

    // p-value per Royston's normalizing transformations
    if (n == 3) {
        const double pi6 = 6.0 / M_PI;
        const double stqr = std::asin(std::sqrt(0.75));
        rep.p_value = std::clamp(pi6 * (std::asin(std::sqrt(W)) - stqr), 0.0, 1.0);
    } else if (n <= 11) {
        const double g = -2.273 + 0.459 * dn;
        const double mu = 0.5440 - 0.39978 * dn + 0.025054 * dn * dn - 0.0006714 * dn * dn * dn;
        const double sigma =
            std::exp(1.3822 - 0.77857 * dn + 0.062767 * dn * dn - 0.0020322 * dn * dn * dn);
        const double z = (-std::log(g - std::log1p(-W)) - mu) / sigma;
        rep.p_value = norm_sf(z);
    } else {
        const double ln_n = std::log(dn);
        const double mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n * ln_n +
                          0.0038915 * ln_n * ln_n * ln_n;
        const double sigma = std::exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n * ln_n);
        const double z = (std::log1p(-W) - mu) / sigma;
        rep.p_value = norm_sf(z);
    }
    return rep;
}

struct NormalityResult {
    bool consistent_with_normal = false;
    StatReport report;
};

// "Consistent with normal" iff the Shapiro-Wilk p exceeds 0.05.
inline NormalityResult normality_check(const std::vector<double>& values) {
    NormalityResult out;
    out.report = shapiro_wilk(values);
    out.consistent_with_normal = out.report.p_value > 0.05;
    return out;
}

// Dispatcher used for the technique comparisons: paired t-test when both
// samples pass the normality screen, Wilcoxon signed-rank otherwise. Paired
// Cohen's d is attached as effect size either way.
inline StatReport compare_paired(const std::string& x_name, const std::string& y_name,
                                 const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw TooFewError("compare_paired needs at least 3 pairs");

    bool all_equal = true;
    for (const auto& [x, y] : pairs)
        if (x != y) { all_equal = false; break; }

    StatReport rep;
    if (all_equal) {
        rep.method = "no-difference (samples identical)";
        rep.statistic = 0.0;
        rep.p_value = 1.0;
        rep.n = static_cast<long>(pairs.size());
        rep.effect_size = 0.0;
    } else {
        std::vector<double> xs, ys;
        for (const auto& [x, y] : pairs) {
            xs.push_back(x);
            ys.push_back(y);
        }
        const bool normal_x = normality_check(xs).consistent_with_normal;
        const bool normal_y = normality_check(ys).consistent_with_normal;
        if (normal_x && normal_y) {
            try {
                rep = paired_t_test(pairs);
            } catch (const ZeroVarianceError&) {
                rep = wilcoxon_signed_rank(pairs);
            }
        } else {
            rep = wilcoxon_signed_rank(pairs);
        }
        rep.effect_size = cohens_d_paired(pairs);
    }
    rep.effect_kind = "cohens_d";
    rep.notes += (rep.notes.empty() ? "" : "; ");
    rep.notes += x_name + " vs " + y_name;
    return rep;
}

struct AnovaRow {
    double value = 0.0;
    std::string level_a; // e.g. classifier name
    std::string level_b; // e.g. EPV group
};

struct AnovaResult {
    StatReport factor_a, factor_b;
    double ss_a = 0.0, ss_b = 0.0, ss_residual = 0.0, ss_total = 0.0;
    double eta_sq_residual = 0.0;
};

// Fixed-effects two-way ANOVA, main effects only (no interaction term).
// eta^2 = SS_factor / SS_total; the two factor eta^2 plus the residual
// proportion sum to one by construction.
inline AnovaResult two_way_anova(const std::vector<AnovaRow>& rows,
                                 const std::string& factor_a_name,
                                 const std::string& factor_b_name) {
    if (rows.size() < 3) throw TooFewError("two-way ANOVA needs at least 3 observations");

    auto group_stats = [&](auto level_of) {
        std::map<std::string, std::pair<double, double>> g; // level -> (sum, count)
        for (const auto& r : rows) {
            auto& [sum, cnt] = g[level_of(r)];
            sum += r.value;
            cnt += 1.0;
        }
        return g;
    };
    const auto ga = group_stats([](const AnovaRow& r) { return r.level_a; });
    const auto gb = group_stats([](const AnovaRow& r) { return r.level_b; });
    if (ga.size() < 2 || gb.size() < 2)
        throw TooFewError("both ANOVA factors need at least 2 levels");

    const double n = static_cast<double>(rows.size());
    double grand = 0.0;
    for (const auto& r : rows) grand += r.value;
    grand /= n;

    AnovaResult out;
    for (const auto& r : rows) out.ss_total += (r.value - grand) * (r.value - grand);
    if (out.ss_total <= 0.0) throw DegenerateError("total sum of squares is zero");

    auto factor_ss = [&](const auto& groups) {
        double ss = 0.0;
        for (const auto& [level, sc] : groups) {
            const double mean = sc.first / sc.second;
            ss += sc.second * (mean - grand) * (mean - grand);
        }
        return ss;
    };
    out.ss_a = factor_ss(ga);
    out.ss_b = factor_ss(gb);
    out.ss_residual = out.ss_total - out.ss_a - out.ss_b;

    const double df_a = static_cast<double>(ga.size()) - 1.0;
    const double df_b = static_cast<double>(gb.size()) - 1.0;
    const double df_res = n - 1.0 - df_a - df_b;
    if (df_res <= 0.0) throw TooFewError("no residual degrees of freedom");
    const double ms_res = std::max(out.ss_residual, 0.0) / df_res;

    auto report = [&](double ss, double df, const std::string& name) {
        StatReport rep;
        rep.method = "two-way ANOVA (main effects)";
        rep.n = static_cast<long>(rows.size());
        rep.statistic = ms_res > 0.0 ? (ss / df) / ms_res
                                     : std::numeric_limits<double>::infinity();
        rep.p_value = ms_res > 0.0 ? f_sf(rep.statistic, df, df_res) : 0.0;
        rep.effect_size = ss / out.ss_total;
        rep.effect_kind = "eta_squared";
        rep.notes = "factor=" + name;
        return rep;
    };
    out.factor_a = report(out.ss_a, df_a, factor_a_name);
    out.factor_b = report(out.ss_b, df_b, factor_b_name);
    out.eta_sq_residual = 1.0 - out.factor_a.effect_size - out.factor_b.effect_size;
    return out;
}

} // namespace relval::stats
