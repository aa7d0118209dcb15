#pragma once

// Brute-force reference implementations used only by tests. These are kept
// deliberately independent of the library code paths they check: long double
// accumulation, two-pass moments, naive loops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline long double mean_ld(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return s / static_cast<long double>(v.size());
}

inline long double variance_population_ld(const std::vector<double>& v) {
    const long double m = mean_ld(v);
    long double s = 0.0L;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<long double>(v.size());
}

inline double explained_variance(const std::vector<double>& y, const std::vector<double>& yhat) {
    std::vector<double> resid(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) resid[i] = y[i] - yhat[i];
    return static_cast<double>(1.0L - variance_population_ld(resid) / variance_population_ld(y));
}

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs((long double)y[i] - yhat[i]);
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

inline double medae(const std::vector<double>& y, const std::vector<double>& yhat) {
    std::vector<double> abs_err(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) abs_err[i] = std::fabs(y[i] - yhat[i]);
    std::sort(abs_err.begin(), abs_err.end());
    const std::size_t n = abs_err.size();
    if (n % 2 == 1) return abs_err[n / 2];
    return 0.5 * (abs_err[n / 2 - 1] + abs_err[n / 2]);
}

inline double mse(const std::vector<double>& y, const std::vector<double>& yhat) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double e = (long double)y[i] - yhat[i];
        s += e * e;
    }
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

inline double r2(const std::vector<double>& y, const std::vector<double>& yhat) {
    const long double ybar = mean_ld(y);
    long double ss_res = 0.0L;
    long double ss_tot = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += ((long double)y[i] - yhat[i]) * ((long double)y[i] - yhat[i]);
        ss_tot += ((long double)y[i] - ybar) * ((long double)y[i] - ybar);
    }
    return static_cast<double>(1.0L - ss_res / ss_tot);
}

inline double relative_gap(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Pearson on raw values, long double, two-pass.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const long double mx = mean_ld(x);
    const long double my = mean_ld(y);
    long double sxy = 0.0L, sxx = 0.0L, syy = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

}  // namespace oracle
