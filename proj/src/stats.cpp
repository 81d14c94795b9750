#include "hrst/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace hrst {

Summary summarize(std::span<const double> xs) {
    Summary s;
    double mean = 0.0, m2 = 0.0;
    for (double x : xs) {
        ++s.n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(s.n);
        m2 += delta * (x - mean);
    }
    s.mean = mean;
    if (s.n >= 2) {
        s.variance = m2 / static_cast<double>(s.n - 1);
        s.stderr_ = std::sqrt(s.variance / static_cast<double>(s.n));
    }
    return s;
}

double normal_quantile(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("confidence level must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Interval normal_interval(const Summary& s, double level) {
    if (s.n < 2) {
        const double inf = std::numeric_limits<double>::infinity();
        return {-inf, inf};
    }
    const double z = normal_quantile(level);
    return {s.mean - z * s.stderr_, s.mean + z * s.stderr_};
}

Interval wilson_interval(std::size_t successes, std::size_t n, double level) {
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double z = normal_quantile(level);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

RatioEstimate ratio_estimate(std::span<const double> num, std::span<const double> den,
                             double level) {
    if (num.size() != den.size()) {
        throw std::invalid_argument("ratio estimate needs paired values");
    }
    const std::size_t n = num.size();
    const double total_num = std::accumulate(num.begin(), num.end(), 0.0);
    const double total_den = std::accumulate(den.begin(), den.end(), 0.0);
    RatioEstimate est;
    const double inf = std::numeric_limits<double>::infinity();
    if (total_den == 0.0) {
        est.ci = {-inf, inf};
        est.stderr_ = inf;
        return est;
    }
    est.estimate = total_num / total_den;
    if (n < 2) {
        est.ci = {-inf, inf};
        est.stderr_ = inf;
        return est;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = num[i] - est.estimate * den[i];
        ss += e * e;
    }
    const double mean_den = total_den / static_cast<double>(n);
    est.stderr_ = std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1))) / mean_den;
    const double z = normal_quantile(level);
    est.ci = {est.estimate - z * est.stderr_, est.estimate + z * est.stderr_};
    return est;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear fit needs two or more paired values");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("linear fit needs distinct x values");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - fit.intercept - fit.slope * x[i];
            rss += e * e;
        }
        fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return fit;
}

namespace {

double log_mean_slope(std::span<const double> x, const std::vector<double>& sums, double count) {
    std::vector<double> y(sums.size());
    for (std::size_t k = 0; k < sums.size(); ++k) {
        const double mean = sums[k] / count;
        if (!(mean > 0.0)) {
            throw std::domain_error("log-mean regression over a nonpositive mean");
        }
        y[k] = std::log(mean);
    }
    return linear_fit(x, y).slope;
}

}  // namespace

SlopeEstimate jackknife_log_slope(std::span<const double> x,
                                  const std::vector<std::vector<double>>& rows, double level) {
    const std::size_t n = rows.size();
    if (n == 0) {
        throw std::invalid_argument("no replications");
    }
    std::vector<double> sums(x.size(), 0.0);
    for (const auto& row : rows) {
        if (row.size() != x.size()) {
            throw std::invalid_argument("replication row has the wrong length");
        }
        for (std::size_t k = 0; k < x.size(); ++k) {
            sums[k] += row[k];
        }
    }
    SlopeEstimate est;
    est.slope = log_mean_slope(x, sums, static_cast<double>(n));
    if (n < 2) {
        const double inf = std::numeric_limits<double>::infinity();
        est.stderr_ = inf;
        est.ci = {-inf, inf};
        return est;
    }
    std::vector<double> leave(n);
    std::vector<double> partial(x.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < x.size(); ++k) {
            partial[k] = sums[k] - rows[i][k];
        }
        leave[i] = log_mean_slope(x, partial, static_cast<double>(n - 1));
    }
    const double mean = std::accumulate(leave.begin(), leave.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : leave) {
        ss += (v - mean) * (v - mean);
    }
    est.stderr_ = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
    const double z = normal_quantile(level);
    est.ci = {est.slope - z * est.stderr_, est.slope + z * est.stderr_};
    return est;
}

TestResult mann_whitney_less(std::span<const double> x, std::span<const double> y) {
    const std::size_t n1 = x.size(), n2 = y.size();
    if (n1 == 0 || n2 == 0) {
        throw std::invalid_argument("Mann-Whitney needs two nonempty samples");
    }
    struct Item {
        double value;
        bool first;
    };
    std::vector<Item> all;
    for (double v : x) {
        all.push_back({v, true});
    }
    for (double v : y) {
        all.push_back({v, false});
    }
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.value < b.value; });
    const double n = static_cast<double>(n1 + n2);
    double rank_sum = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) {
            ++j;
        }
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].first) {
                rank_sum += avg_rank;
            }
        }
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double a = static_cast<double>(n1), b = static_cast<double>(n2);
    const double u = rank_sum - a * (a + 1.0) / 2.0;
    const double mean = a * b / 2.0;
    const double var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) {
        return {u, 1.0};
    }
    // Continuity correction toward the null.
    const double z = (u - mean + 0.5) / std::sqrt(var);
    return {u, normal_cdf(z)};
}

double kolmogorov_tail(double t) {
    if (t <= 0.0) {
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) {
            break;
        }
    }
    return std::clamp(sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) {
        throw std::invalid_argument("KS test needs two nonempty samples");
    }
    std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) {
            ++i;
        }
        while (j < b.size() && b[j] == v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

double chi_square_tail(double x, double k) {
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(k), x));
}

TestResult chi_square_two_sample(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("histograms must share their bins");
    }
    std::vector<double> ca, cb;
    double pa = 0.0, pb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa += static_cast<double>(a[i]);
        pb += static_cast<double>(b[i]);
        if (pa + pb >= 5.0) {
            ca.push_back(pa);
            cb.push_back(pb);
            pa = pb = 0.0;
        }
    }
    if (pa + pb > 0.0) {
        if (ca.empty()) {
            ca.push_back(0.0);
            cb.push_back(0.0);
        }
        ca.back() += pa;
        cb.back() += pb;
    }
    const double ta = std::accumulate(ca.begin(), ca.end(), 0.0);
    const double tb = std::accumulate(cb.begin(), cb.end(), 0.0);
    if (ca.size() < 2 || ta == 0.0 || tb == 0.0) {
        return {0.0, 1.0};
    }
    const double total = ta + tb;
    double stat = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        const double pooled = ca[i] + cb[i];
        const double ea = pooled * ta / total, eb = pooled * tb / total;
        stat += (ca[i] - ea) * (ca[i] - ea) / ea + (cb[i] - eb) * (cb[i] - eb) / eb;
    }
    return {stat, chi_square_tail(stat, static_cast<double>(ca.size() - 1))};
}

}  // namespace hrst
