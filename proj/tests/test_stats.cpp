#include <doctest.h>

#include <cmath>
#include <vector>

#include "hrst/rng.hpp"
#include "hrst/stats.hpp"

using namespace hrst;
using doctest::Approx;

// Reference values from scipy and statsmodels (tests/oracles/stats_oracles.py).

namespace {
const std::vector<double> kX{1.2, 3.4, 0.5, 2.2, 2.2, 0.9, 4.1};
const std::vector<double> kY{2.5, 5.1, 3.3, 2.2, 6.0, 4.4};
}  // namespace

TEST_CASE("summaries and normal helpers") {
    const Summary s = summarize(kX);
    CHECK(s.n == 7);
    CHECK(s.mean == Approx(2.0714285714285716).epsilon(1e-14));
    CHECK(s.variance == Approx(1.7523809523809522).epsilon(1e-13));
    CHECK(s.stderr_ == Approx(std::sqrt(1.7523809523809522 / 7)).epsilon(1e-13));
    CHECK(normal_quantile(0.95) == Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_cdf(1.3) == Approx(0.9031995154143897).epsilon(1e-12));
    const Interval single = normal_interval(summarize(std::vector<double>{3.0}));
    CHECK(std::isinf(single.low));
    CHECK(std::isinf(single.high));
    CHECK(summarize(std::vector<double>{}).n == 0);
}

TEST_CASE("wilson intervals") {
    const Interval a = wilson_interval(5, 10);
    CHECK(a.low == Approx(0.23659309051256394).epsilon(1e-12));
    CHECK(a.high == Approx(0.7634069094874361).epsilon(1e-12));
    const Interval b = wilson_interval(0, 20);
    CHECK(b.low == Approx(0.0).epsilon(1e-15));
    CHECK(b.high == Approx(0.1611251580528194).epsilon(1e-12));
    const Interval none = wilson_interval(0, 0);
    CHECK(none.low == 0.0);
    CHECK(none.high == 1.0);
}

TEST_CASE("ratio estimator") {
    const std::vector<double> num{3, 1, 4, 1, 5}, den{10, 7, 12, 6, 11};
    const RatioEstimate r = ratio_estimate(num, den);
    CHECK(r.estimate == Approx(0.30434782608695654).epsilon(1e-14));
    CHECK(r.stderr_ == Approx(0.05332103103050411).epsilon(1e-12));
    CHECK(r.ci.contains(r.estimate));
    const RatioEstimate zero = ratio_estimate(std::vector<double>{0, 0}, std::vector<double>{0, 0});
    CHECK(zero.estimate == 0.0);
    CHECK(std::isinf(zero.ci.high));
}

TEST_CASE("least squares") {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{2.1, 3.9, 6.2, 7.8, 10.1};
    const LinearFit f = linear_fit(x, y);
    CHECK(f.slope == Approx(1.99).epsilon(1e-13));
    CHECK(f.intercept == Approx(0.05).epsilon(1e-12));
    CHECK(f.slope_stderr == Approx(0.059721576223897795).epsilon(1e-12));
}

TEST_CASE("jackknife log slope recovers an exponential trend") {
    RandomStream rng(61, 0);
    const std::vector<double> x{2, 3, 4, 5, 6};
    std::vector<std::vector<double>> rows;
    for (int rep = 0; rep < 400; ++rep) {
        std::vector<double> row;
        for (double r : x) row.push_back(static_cast<double>(rng.poisson(std::exp(r))));
        rows.push_back(row);
    }
    const SlopeEstimate s = jackknife_log_slope(x, rows);
    CHECK(s.ci.contains(1.0));
    CHECK(s.stderr_ < 0.01);
    // Exact data: zero spread.
    const std::vector<std::vector<double>> exact{{std::exp(1.0), std::exp(2.0)}, {std::exp(1.0), std::exp(2.0)}};
    CHECK(jackknife_log_slope(std::vector<double>{1, 2}, exact).slope == Approx(1.0));
    CHECK_THROWS(jackknife_log_slope(std::vector<double>{1, 2}, {{0.0, 1.0}}));
}

TEST_CASE("rank and distribution tests") {
    const TestResult mw = mann_whitney_less(kX, kY);
    CHECK(mw.statistic == 7.0);
    CHECK(mw.p_value == Approx(0.026235079769752187).epsilon(1e-10));
    const TestResult ks = ks_two_sample(kX, kY);
    CHECK(ks.statistic == Approx(0.5476190476190477).epsilon(1e-14));
    CHECK(ks.p_value == Approx(0.19093360145775545).epsilon(1e-10));
    CHECK(kolmogorov_tail(1.0) == Approx(0.26999967167735456).epsilon(1e-12));
    CHECK(chi_square_tail(7.5, 3) == Approx(0.0575584519726364).epsilon(1e-12));
    const std::vector<std::size_t> a{12, 30, 25, 9}, b{15, 22, 31, 14};
    const TestResult chi = chi_square_two_sample(a, b);
    CHECK(chi.statistic == Approx(3.0704960178609526).epsilon(1e-12));
    CHECK(chi.p_value == Approx(0.3808832729515923).epsilon(1e-10));
}

TEST_CASE("one-sample KS accepts the true law and rejects a shifted one") {
    RandomStream rng(62, 0);
    std::vector<double> xs;
    for (int i = 0; i < 3000; ++i) xs.push_back(rng.normal());
    CHECK(ks_one_sample(xs, normal_cdf).p_value > 1e-3);
    CHECK(ks_one_sample(xs, [](double v) { return normal_cdf(v - 0.3); }).p_value < 1e-6);
}
