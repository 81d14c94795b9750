"""Reference values for the statistics helpers, from scipy and statsmodels.

Run: python3 tests/oracles/stats_oracles.py
"""
import numpy as np
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

x = [1.2, 3.4, 0.5, 2.2, 2.2, 0.9, 4.1]
y = [2.5, 5.1, 3.3, 2.2, 6.0, 4.4]

print("normal quantile 0.95:", repr(stats.norm.ppf(0.975)))
print("normal cdf 1.3:", repr(stats.norm.cdf(1.3)))
print("wilson 5/10:", proportion_confint(5, 10, alpha=0.05, method="wilson"))
print("wilson 0/20:", proportion_confint(0, 20, alpha=0.05, method="wilson"))
print("mean, var x:", repr(np.mean(x)), repr(np.var(x, ddof=1)))
r = stats.mannwhitneyu(x, y, alternative="less", use_continuity=True, method="asymptotic")
print("mann-whitney less:", repr(r.statistic), repr(r.pvalue))
r = stats.ks_2samp(x, y, method="asymp")
print("ks two-sample:", repr(r.statistic), repr(r.pvalue))
print("kolmogorov tail 1.0:", repr(stats.kstwobign.sf(1.0)))
print("chi2 tail (7.5, 3):", repr(stats.chi2.sf(7.5, 3)))
f = stats.linregress([1, 2, 3, 4, 5], [2.1, 3.9, 6.2, 7.8, 10.1])
print("ols slope, intercept, stderr:", repr(f.slope), repr(f.intercept), repr(f.stderr))

# Cluster ratio estimator sum(num)/sum(den), delta-method standard error.
num = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
den = np.array([10.0, 7.0, 12.0, 6.0, 11.0])
R = num.sum() / den.sum()
n = len(num)
e = num - R * den
se = np.sqrt((e ** 2).sum() / (n * (n - 1))) / den.mean()
print("ratio estimate, stderr:", repr(R), repr(se))

# Chi-square homogeneity on two count histograms.
a = [12, 30, 25, 9]
b = [15, 22, 31, 14]
chi2, p, dof, _ = stats.chi2_contingency(np.array([a, b]), correction=False)
print("chi2 homogeneity:", repr(chi2), repr(p), dof)

# Two-sample KS p-value with the Stephens small-sample correction.
D = stats.ks_2samp(x, y).statistic
ne = np.sqrt(len(x) * len(y) / (len(x) + len(y)))
print("ks two-sample, corrected p:", repr(stats.kstwobign.sf((ne + 0.12 + 0.11 / ne) * D)))
