#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hrst {

struct Interval {
    double low = 0.0;
    double high = 0.0;
    bool contains(double x) const { return low <= x && x <= high; }
};

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased; 0 when n < 2
    double stderr_ = 0.0;
};

Summary summarize(std::span<const double> xs);

/// Two-sided standard normal quantile for `level` (e.g. 1.96 for 0.95).
double normal_quantile(double level);
double normal_cdf(double x);

/// mean +- z stderr. With n < 2 the interval is (-inf, +inf).
Interval normal_interval(const Summary& s, double level = 0.95);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t n, double level = 0.95);

/// Ratio sum(num) / sum(den) over independent replications, with the
/// delta-method standard error treating each replication as one cluster.
/// A zero denominator total gives estimate 0 and an unbounded interval.
struct RatioEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    Interval ci;
};

RatioEstimate ratio_estimate(std::span<const double> num, std::span<const double> den,
                             double level = 0.95);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

/// Ordinary least squares; slope_stderr from the residuals (0 when n <= 2).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct SlopeEstimate {
    double slope = 0.0;
    double stderr_ = 0.0;
    Interval ci;
};

/// Slope of log(mean_k) against x_k, where mean_k averages column k of the
/// replication matrix rows[rep][k]. The standard error is the delete-one
/// jackknife over replications. Columns with a nonpositive mean are invalid.
SlopeEstimate jackknife_log_slope(std::span<const double> x,
                                  const std::vector<std::vector<double>>& rows,
                                  double level = 0.95);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Mann-Whitney U for H1: x tends to be smaller than y. Normal approximation
/// with tie correction; statistic is U of x.
TestResult mann_whitney_less(std::span<const double> x, std::span<const double> y);

/// Two-sample Kolmogorov-Smirnov, asymptotic p-value.
TestResult ks_two_sample(std::span<const double> x, std::span<const double> y);

/// One-sample Kolmogorov-Smirnov against a continuous CDF, asymptotic p-value.
template <class Cdf>
TestResult ks_one_sample(std::vector<double> xs, Cdf&& cdf);

/// Kolmogorov distribution tail P(K > t).
double kolmogorov_tail(double t);

/// Chi-square upper tail P(X > x) with k degrees of freedom.
double chi_square_tail(double x, double k);

/// Chi-square homogeneity test on two count histograms over the same bins.
/// Bins with a pooled count below 5 are merged into their neighbour.
TestResult chi_square_two_sample(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace hrst

#include <algorithm>
#include <cmath>

template <class Cdf>
hrst::TestResult hrst::ks_one_sample(std::vector<double> xs, Cdf&& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    const double sq = std::sqrt(n);
    return TestResult{d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)};
}
