#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "stochexp/philox.hpp"
#include "stochexp/summation.hpp"
#include "stochexp/time_grid.hpp"

namespace stochexp {

/// Brownian path on the grid: W[0] = 0, independent N(0, step) increments,
/// increment k addressed by (seed, k).
[[nodiscard]] inline PathOnGrid sample_brownian(const TimeGridPtr& grid, const Seed& seed) {
    const int n = grid->n_steps();
    const double sqrt_step = std::sqrt(grid->step());
    PathOnGrid path{grid, std::vector<double>(std::size_t(n) + 1)};
    path.values[0] = 0.0;
    CompensatedSum acc;
    for (int k = 0; k < n; ++k) {
        acc.add(sqrt_step * standard_gaussian(seed, std::uint64_t(k)));
        path.values[std::size_t(k) + 1] = acc.value();
    }
    return path;
}

/// Left-point Riemann-Ito sums of a per-cell step integrand against a path.
[[nodiscard]] inline PathOnGrid ito_integral(std::span<const double> integrand,
                                             const PathOnGrid& w) {
    const std::size_t n = std::size_t(w.grid->n_steps());
    if (integrand.size() != n)
        throw std::invalid_argument("ito_integral: integrand length != n_steps");
    PathOnGrid out{w.grid, std::vector<double>(n + 1)};
    out.values[0] = 0.0;
    CompensatedSum acc;
    for (std::size_t k = 0; k < n; ++k) {
        acc.add(integrand[k] * (w.values[k + 1] - w.values[k]));
        out.values[k + 1] = acc.value();
    }
    return out;
}

/// Continuous semimartingale on the grid, X = int h dW + int b du, with its
/// square characteristic stored exactly as the running sum of h^2 du (not the
/// realized quadratic variation).
struct SemimartingalePath {
    TimeGridPtr grid;
    std::vector<double> values;     ///< X at grid points, X[0] = 0
    std::vector<double> integrand;  ///< h per cell, left-endpoint convention
    std::vector<double> drift;      ///< b per cell
    std::vector<double> sq_char;    ///< <X> at grid points

    [[nodiscard]] double terminal() const { return values.back(); }
    [[nodiscard]] double sq_char_terminal() const { return sq_char.back(); }

    void validate() const {
        const std::size_t np = grid->n_points();
        const std::size_t n = std::size_t(grid->n_steps());
        if (values.size() != np || sq_char.size() != np ||
            integrand.size() != n || drift.size() != n)
            throw std::invalid_argument("SemimartingalePath: length mismatch");
        if (values[0] != 0.0)
            throw std::invalid_argument("SemimartingalePath: X[0] != 0");
        if (sq_char[0] != 0.0)
            throw std::invalid_argument("SemimartingalePath: <X>[0] != 0");
        for (std::size_t k = 1; k < np; ++k)
            if (sq_char[k] < sq_char[k - 1])
                throw std::invalid_argument("SemimartingalePath: <X> decreasing");
    }
};

/// X = int h dW + int b du driven by the Brownian path w.
[[nodiscard]] inline SemimartingalePath build_semimartingale(std::span<const double> h,
                                                             std::span<const double> b,
                                                             const PathOnGrid& w) {
    const std::size_t n = std::size_t(w.grid->n_steps());
    if (h.size() != n || b.size() != n)
        throw std::invalid_argument("build_semimartingale: integrand length != n_steps");
    const double dt = w.grid->step();
    SemimartingalePath x;
    x.grid = w.grid;
    x.values.resize(n + 1);
    x.sq_char.resize(n + 1);
    x.integrand.assign(h.begin(), h.end());
    x.drift.assign(b.begin(), b.end());
    x.values[0] = 0.0;
    x.sq_char[0] = 0.0;
    CompensatedSum val, qv;
    for (std::size_t k = 0; k < n; ++k) {
        val.add(h[k] * (w.values[k + 1] - w.values[k]) + b[k] * dt);
        qv.add(h[k] * h[k] * dt);
        x.values[k + 1] = val.value();
        x.sq_char[k + 1] = qv.value();
    }
    return x;
}

/// Mutual characteristic <X,Y> = running sum of h_X h_Y du. Both paths must
/// live on the same grid and share the driving Brownian path.
[[nodiscard]] inline PathOnGrid covariation(const SemimartingalePath& x,
                                            const SemimartingalePath& y) {
    require_same_grid(*x.grid, *y.grid, "covariation");
    const std::size_t n = std::size_t(x.grid->n_steps());
    const double dt = x.grid->step();
    PathOnGrid out{x.grid, std::vector<double>(n + 1)};
    out.values[0] = 0.0;
    CompensatedSum acc;
    for (std::size_t k = 0; k < n; ++k) {
        acc.add(x.integrand[k] * y.integrand[k] * dt);
        out.values[k + 1] = acc.value();
    }
    return out;
}

/// Running sum of squared increments; diagnostic counterpart of sq_char.
[[nodiscard]] inline PathOnGrid realized_quadratic_variation(const PathOnGrid& p) {
    const std::size_t n = p.values.size() - 1;
    PathOnGrid out{p.grid, std::vector<double>(n + 1)};
    out.values[0] = 0.0;
    CompensatedSum acc;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = p.values[k + 1] - p.values[k];
        acc.add(d * d);
        out.values[k + 1] = acc.value();
    }
    return out;
}

/// a*X + b*Y as a semimartingale (same grid and driver).
[[nodiscard]] inline SemimartingalePath linear_combination(double a,
                                                           const SemimartingalePath& x,
                                                           double b,
                                                           const SemimartingalePath& y) {
    require_same_grid(*x.grid, *y.grid, "linear_combination");
    const std::size_t n = std::size_t(x.grid->n_steps());
    const double dt = x.grid->step();
    SemimartingalePath z;
    z.grid = x.grid;
    z.values.resize(n + 1);
    z.sq_char.resize(n + 1);
    z.integrand.resize(n);
    z.drift.resize(n);
    z.values[0] = 0.0;
    z.sq_char[0] = 0.0;
    CompensatedSum qv;
    for (std::size_t k = 0; k < n; ++k) {
        z.integrand[k] = a * x.integrand[k] + b * y.integrand[k];
        z.drift[k] = a * x.drift[k] + b * y.drift[k];
        z.values[k + 1] = a * x.values[k + 1] + b * y.values[k + 1];
        qv.add(z.integrand[k] * z.integrand[k] * dt);
        z.sq_char[k + 1] = qv.value();
    }
    return z;
}

/// X + Y + <X,Y>: the combination under which stochastic exponentials
/// multiply. The cross term enters the drift; the square characteristic is
/// the exact running sum for the combined integrand.
[[nodiscard]] inline SemimartingalePath yor_sum(const SemimartingalePath& x,
                                                const SemimartingalePath& y) {
    require_same_grid(*x.grid, *y.grid, "yor_sum");
    const std::size_t n = std::size_t(x.grid->n_steps());
    const double dt = x.grid->step();
    SemimartingalePath z;
    z.grid = x.grid;
    z.values.resize(n + 1);
    z.sq_char.resize(n + 1);
    z.integrand.resize(n);
    z.drift.resize(n);
    z.values[0] = 0.0;
    z.sq_char[0] = 0.0;
    CompensatedSum qv, cross;
    for (std::size_t k = 0; k < n; ++k) {
        const double hx = x.integrand[k];
        const double hy = y.integrand[k];
        z.integrand[k] = hx + hy;
        z.drift[k] = x.drift[k] + y.drift[k] + hx * hy;
        cross.add(hx * hy * dt);
        z.values[k + 1] = x.values[k + 1] + y.values[k + 1] + cross.value();
        qv.add((hx + hy) * (hx + hy) * dt);
        z.sq_char[k + 1] = qv.value();
    }
    return z;
}

/// Coarsen a path by keeping every factor-th point (values are shared with
/// the fine path, so coarse and fine grids see the same Brownian motion).
[[nodiscard]] inline PathOnGrid subsample(const PathOnGrid& fine, int factor) {
    const int n = fine.grid->n_steps();
    if (factor < 1 || n % factor != 0)
        throw std::invalid_argument("subsample: factor must divide n_steps");
    const int nc = n / factor;
    PathOnGrid out{make_grid(fine.grid->horizon(), nc),
                   std::vector<double>(std::size_t(nc) + 1)};
    for (int k = 0; k <= nc; ++k)
        out.values[std::size_t(k)] = fine.values[std::size_t(k) * factor];
    return out;
}

}  // namespace stochexp
