#pragma once

// Single-factor (one-way) analysis of variance.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "tmfix/error.hpp"

namespace tmfix::stats {

enum class AnovaStatus {
    ok,
    /// All observations identical within every group and across group means:
    /// F is 0/0. Reported as not significant.
    degenerate_equal_means,
    /// No within-group spread but distinct group means: F is infinite.
    zero_within_variance,
};

inline std::string_view to_string(AnovaStatus s) {
    switch (s) {
        case AnovaStatus::ok: return "ok";
        case AnovaStatus::degenerate_equal_means: return "degenerate_equal_means";
        case AnovaStatus::zero_within_variance: return "zero_within_variance";
    }
    return "ok";
}

struct AnovaResult {
    double f_stat = 0.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
    double alpha = 0.01;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool significant = false;
    AnovaStatus status = AnovaStatus::ok;
};

/// Upper-tail critical value of F(df1, df2) at level alpha.
inline double f_critical(std::size_t df1, std::size_t df2, double alpha) {
    boost::math::fisher_f dist(static_cast<double>(df1), static_cast<double>(df2));
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

inline double f_upper_tail(double f, std::size_t df1, std::size_t df2) {
    if (!(f > 0.0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    boost::math::fisher_f dist(static_cast<double>(df1), static_cast<double>(df2));
    return boost::math::cdf(boost::math::complement(dist, f));
}

template <typename Group>
AnovaResult anova_one_way(std::span<const Group> groups, double alpha = 0.01) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::invalid_config, "alpha must be in (0,1)", "alpha");
    const std::size_t k = groups.size();
    if (k < 2) throw Error(ErrorCode::too_few_groups, "ANOVA needs at least two groups");

    std::size_t n_total = 0;
    double grand_sum = 0.0;
    std::vector<double> means(k);
    for (std::size_t g = 0; g < k; ++g) {
        if (groups[g].empty()) throw Error(ErrorCode::empty_group, "ANOVA group is empty");
        double sum = 0.0;
        for (auto x : groups[g]) sum += static_cast<double>(x);
        means[g] = sum / static_cast<double>(groups[g].size());
        grand_sum += sum;
        n_total += groups[g].size();
    }
    if (n_total <= k) throw Error(ErrorCode::degenerate_df, "need more observations than groups");

    const double grand_mean = grand_sum / static_cast<double>(n_total);
    double ss_between = 0.0;
    double ss_within = 0.0;
    for (std::size_t g = 0; g < k; ++g) {
        const double d = means[g] - grand_mean;
        ss_between += static_cast<double>(groups[g].size()) * d * d;
        for (auto x : groups[g]) {
            const double e = static_cast<double>(x) - means[g];
            ss_within += e * e;
        }
    }

    AnovaResult r;
    r.alpha = alpha;
    r.df_between = k - 1;
    r.df_within = n_total - k;
    r.critical_value = f_critical(r.df_between, r.df_within, alpha);

    const double ss_total = ss_between + ss_within;
    if (ss_total == 0.0) {
        r.status = AnovaStatus::degenerate_equal_means;
        r.f_stat = 0.0;
        r.p_value = 1.0;
        r.significant = false;
        return r;
    }
    if (ss_within <= 1e-14 * ss_total) {
        r.status = AnovaStatus::zero_within_variance;
        r.f_stat = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        r.significant = true;
        return r;
    }
    r.f_stat = (ss_between / static_cast<double>(r.df_between)) / (ss_within / static_cast<double>(r.df_within));
    r.p_value = f_upper_tail(r.f_stat, r.df_between, r.df_within);
    r.significant = r.f_stat > r.critical_value;
    return r;
}

template <typename Group>
AnovaResult anova_one_way(const std::vector<Group>& groups, double alpha = 0.01) {
    return anova_one_way(std::span<const Group>(groups), alpha);
}

}  // namespace tmfix::stats
