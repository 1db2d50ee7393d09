#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "stochexp/path_engine.hpp"
#include "stochexp/surfaces.hpp"

namespace stochexp {

/// Relative residual |e^la - e^lb| / (1 + e^lb), evaluated from the log
/// values so nearby exponentials do not cancel. Surfaces span many orders of
/// magnitude, hence the 1 + |RHS| normalization everywhere in this module.
[[nodiscard]] inline double relative_residual_from_logs(double la, double lb) {
    if (lb > 700.0) return std::abs(std::expm1(la - lb));  // |LHS/RHS - 1|, limit of the ratio
    const double rhs = std::exp(lb);
    return rhs * std::abs(std::expm1(la - lb)) / (1.0 + rhs);
}

/// Per-time relative residual of
///   f(<X>_t, X_t) f(<Y>_t, Y_t) = f(<X+Y>_t, X_t + Y_t + <X,Y>_t)
/// with exact characteristics on both sides.
[[nodiscard]] inline PathOnGrid check_product_equation(const CandidateSurface& f,
                                                       const SemimartingalePath& x,
                                                       const SemimartingalePath& y) {
    require_same_grid(*x.grid, *y.grid, "check_product_equation");
    const SemimartingalePath z = yor_sum(x, y);
    const std::size_t np = x.grid->n_points();
    PathOnGrid out{x.grid, std::vector<double>(np)};
    for (std::size_t k = 0; k < np; ++k) {
        const double la = f.log_value(x.sq_char[k], x.values[k]) +
                          f.log_value(y.sq_char[k], y.values[k]);
        const double lb = f.log_value(z.sq_char[k], z.values[k]);
        out.values[k] = relative_residual_from_logs(la, lb);
    }
    return out;
}

/// Indicator step integrand for [s, t): 1 on cells [u_k, u_{k+1}) with
/// s <= u_k < t. The degenerate pair (s, s) keeps a single cell of support,
/// one step wide, by convention; (T, T) has no cell and is rejected.
[[nodiscard]] inline std::vector<double> indicator_integrand(double s, double t,
                                                             const TimeGrid& grid) {
    const std::size_t is = grid.index_of(s);
    const std::size_t it = grid.index_of(t);
    if (is > it) throw std::invalid_argument("indicator_integrand: s > t");
    std::vector<double> h(std::size_t(grid.n_steps()), 0.0);
    if (is == it) {
        if (is >= h.size())
            throw std::invalid_argument("indicator_integrand: degenerate (T, T) has no cell");
        h[is] = 1.0;
        return h;
    }
    for (std::size_t k = is; k < it; ++k) h[k] = 1.0;
    return h;
}

/// Relative residual of the increment factorization
///   f(s, W_s) f(t - s, W_t - W_s) = f(t, W_t)
/// for grid-aligned s <= t. At s = 0 and s = t this reduces to the f(0,0) = 1
/// constraint.
[[nodiscard]] inline double check_increment_equation(const CandidateSurface& f, double s,
                                                     double t, const PathOnGrid& w) {
    const std::size_t is = w.grid->index_of(s);
    const std::size_t it = w.grid->index_of(t);
    if (is > it) throw std::invalid_argument("check_increment_equation: s > t");
    const double ws = w.values[is];
    const double wt = w.values[it];
    const double la = f.log_value(s, ws) + f.log_value(t - s, wt - ws);
    const double lb = f.log_value(t, wt);
    return relative_residual_from_logs(la, lb);
}

struct CauchyTriple {
    double s;
    double t;
    double x;
    double y;
};

struct CauchyCheckResult {
    std::vector<double> residuals;
    CauchyTriple worst_triple{};
    double worst_residual = 0.0;
};

/// Relative residuals of f(s, x) f(t-s, y) = f(t, x+y) over a list of
/// triples; also reports the worst violating triple.
[[nodiscard]] inline CauchyCheckResult check_cauchy_2d(const CandidateSurface& f,
                                                       std::span<const CauchyTriple> triples) {
    CauchyCheckResult res;
    res.residuals.reserve(triples.size());
    for (const auto& tr : triples) {
        if (!(tr.s > 0.0) || !(tr.t > 0.0) || tr.s > tr.t)
            throw std::invalid_argument("check_cauchy_2d: need 0 < s <= t");
        const double la = f.log_value(tr.s, tr.x) + f.log_value(tr.t - tr.s, tr.y);
        const double lb = f.log_value(tr.t, tr.x + tr.y);
        const double r = relative_residual_from_logs(la, lb);
        res.residuals.push_back(r);
        if (r >= res.worst_residual) {
            res.worst_residual = r;
            res.worst_triple = tr;
        }
    }
    return res;
}

/// Per-time relative residual of f^2(t, W_t) = f(4t, 2 W_t + t), the equation
/// left when the domain of validity shrinks to the single Brownian path.
[[nodiscard]] inline PathOnGrid check_single_bm(const CandidateSurface& f,
                                                const PathOnGrid& w) {
    const std::size_t np = w.grid->n_points();
    PathOnGrid out{w.grid, std::vector<double>(np)};
    for (std::size_t k = 0; k < np; ++k) {
        const double t = w.grid->time(k);
        const double la = 2.0 * f.log_value(t, w.values[k]);
        const double lb = f.log_value(4.0 * t, 2.0 * w.values[k] + t);
        out.values[k] = relative_residual_from_logs(la, lb);
    }
    return out;
}

/// Gaussian-weighted fraction of cells on [-5 sqrt(t), 5 sqrt(t)]^2 where the
/// relative Cauchy residual of the (s, t) pair exceeds 1e-8; cell (x, y) is
/// weighted by rho(s, x) rho(t-s, y-x). Finite-grid surrogate for the
/// almost-everywhere statement: a null set shows up as vanishing fraction.
[[nodiscard]] inline double gaussian_violation_fraction(const CandidateSurface& f, double s,
                                                        double t, int n_cells) {
    if (!(0.0 < s && s < t)) throw std::invalid_argument("gaussian_violation_fraction: need 0 < s < t");
    if (n_cells < 2) throw std::invalid_argument("gaussian_violation_fraction: n_cells < 2");
    const double half = 5.0 * std::sqrt(t);
    const double cell = 2.0 * half / n_cells;
    CompensatedSum weight_all, weight_bad;
    for (int i = 0; i < n_cells; ++i) {
        const double x = -half + (i + 0.5) * cell;
        const double lfx = f.log_value(s, x);
        const double rho_x = GaussianDensity::value(s, x);
        for (int j = 0; j < n_cells; ++j) {
            const double y = -half + (j + 0.5) * cell;
            const double la = lfx + f.log_value(t - s, y);
            const double lb = f.log_value(t, x + y);
            const double w = rho_x * GaussianDensity::value(t - s, y - x);
            weight_all.add(w);
            if (relative_residual_from_logs(la, lb) > 1e-8) weight_bad.add(w);
        }
    }
    return weight_bad.value() / weight_all.value();
}

}  // namespace stochexp
