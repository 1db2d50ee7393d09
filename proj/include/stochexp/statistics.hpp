#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "stochexp/summation.hpp"

namespace stochexp {

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  ///< biased (moment) form, matches the z-score bands
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

[[nodiscard]] inline MomentSummary central_moments(std::span<const double> xs) {
    MomentSummary s;
    s.n = xs.size();
    if (s.n == 0) return s;
    CompensatedSum sum;
    for (double x : xs) sum.add(x);
    s.mean = sum.value() / double(s.n);
    CompensatedSum m2, m3, m4;
    for (double x : xs) {
        const double d = x - s.mean;
        m2.add(d * d);
        m3.add(d * d * d);
        m4.add(d * d * d * d);
    }
    s.variance = m2.value() / double(s.n);
    if (s.variance > 0.0) {
        const double sd = std::sqrt(s.variance);
        s.skewness = m3.value() / double(s.n) / (sd * sd * sd);
        s.excess_kurtosis = m4.value() / double(s.n) / (s.variance * s.variance) - 3.0;
    }
    return s;
}

[[nodiscard]] inline double sample_correlation(std::span<const double> a,
                                               std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("sample_correlation: size mismatch");
    const std::size_t n = a.size();
    CompensatedSum sa, sb;
    for (std::size_t i = 0; i < n; ++i) {
        sa.add(a[i]);
        sb.add(b[i]);
    }
    const double ma = sa.value() / double(n);
    const double mb = sb.value() / double(n);
    CompensatedSum vab, va, vb;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        vab.add(da * db);
        va.add(da * da);
        vb.add(db * db);
    }
    const double denom = std::sqrt(va.value() * vb.value());
    return denom > 0.0 ? vab.value() / denom : 0.0;
}

struct WlsLineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_half_width = 0.0;  ///< 95% from the propagated covariance
    double r_squared = 1.0;         ///< in the weighted norm
};

/// Weighted least-squares line through (t_j, m_j) with full error covariance
/// cov (k x k, row-major). Weights are the inverse marginal variances; the
/// slope half-width uses the sandwich form a' cov a, which keeps the interval
/// honest although the errors share sample paths.
[[nodiscard]] inline WlsLineFit wls_line_fit(std::span<const double> t,
                                             std::span<const double> m,
                                             std::span<const double> cov) {
    const std::size_t k = t.size();
    if (m.size() != k || cov.size() != k * k || k < 2)
        throw std::invalid_argument("wls_line_fit: bad dimensions");
    constexpr double kVarFloor = 1e-30;
    std::vector<double> w(k);
    for (std::size_t j = 0; j < k; ++j)
        w[j] = 1.0 / std::max(cov[j * k + j], kVarFloor);

    double sw = 0.0, swt = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        sw += w[j];
        swt += w[j] * t[j];
    }
    const double t_bar = swt / sw;
    double d = 0.0;
    for (std::size_t j = 0; j < k; ++j) d += w[j] * (t[j] - t_bar) * (t[j] - t_bar);
    if (!(d > 0.0)) throw std::invalid_argument("wls_line_fit: degenerate design");

    std::vector<double> a(k);
    WlsLineFit fit;
    double m_bar = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        a[j] = w[j] * (t[j] - t_bar) / d;
        fit.slope += a[j] * m[j];
        m_bar += w[j] * m[j];
    }
    m_bar /= sw;
    fit.intercept = m_bar - fit.slope * t_bar;

    double var = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) var += a[i] * cov[i * k + j] * a[j];
    fit.slope_half_width = 1.96 * std::sqrt(std::max(var, 0.0));

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double r = m[j] - (fit.intercept + fit.slope * t[j]);
        ss_res += w[j] * r * r;
        ss_tot += w[j] * (m[j] - m_bar) * (m[j] - m_bar);
    }
    fit.r_squared = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

/// Ordinary least-squares slope of y on x (used for log-log rate estimates).
[[nodiscard]] inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t k = x.size();
    if (y.size() != k || k < 2) throw std::invalid_argument("ols_slope: bad dimensions");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(k);
    my /= double(k);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols_slope: degenerate design");
    return sxy / sxx;
}

}  // namespace stochexp
