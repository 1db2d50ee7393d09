#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "stochexp/surfaces.hpp"

namespace stochexp {

/// Rectangle strictly inside (0, T) x R on which PDE residuals are sampled.
/// The time stencil reaches t_min - dt, so that must stay positive.
struct RectGrid {
    double t_min = 0.0;
    double t_max = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    int n_t = 0;
    int n_x = 0;

    [[nodiscard]] double dt() const { return (t_max - t_min) / (n_t - 1); }
    [[nodiscard]] double dx() const { return (x_max - x_min) / (n_x - 1); }
    [[nodiscard]] double t(int i) const { return t_min + i * dt(); }
    [[nodiscard]] double x(int j) const { return x_min + j * dx(); }

    [[nodiscard]] static RectGrid make(double t_min, double t_max, double x_min,
                                       double x_max, int n_t, int n_x) {
        if (!(t_min > 0.0) || !(t_max > t_min) || !(x_max > x_min))
            throw std::invalid_argument("RectGrid: bad rectangle");
        if (n_t < 3 || n_x < 3) throw std::invalid_argument("RectGrid: need >= 3 nodes per axis");
        RectGrid g{t_min, t_max, x_min, x_max, n_t, n_x};
        if (!(t_min - g.dt() > 0.0))
            throw std::invalid_argument("RectGrid: time stencil leaves t > 0");
        return g;
    }

    [[nodiscard]] RectGrid refined() const {
        RectGrid g(*this);
        g.n_t = 2 * (n_t - 1) + 1;
        g.n_x = 2 * (n_x - 1) + 1;
        return g;
    }
};

/// Residual samples over a RectGrid; NaN marks nodes masked near a non-smooth
/// ridge. max_norm is over unmasked nodes.
struct ResidualField {
    RectGrid grid;
    std::vector<double> values;  ///< row-major [t][x]
    double max_norm = 0.0;
    double empirical_order = std::numeric_limits<double>::quiet_NaN();
    std::size_t masked_nodes = 0;

    void finalize() {
        max_norm = 0.0;
        masked_nodes = 0;
        for (double v : values) {
            if (std::isnan(v))
                ++masked_nodes;
            else
                max_norm = std::max(max_norm, std::abs(v));
        }
    }
};

/// CSV export "t,x,residual" for heat-map plotting.
inline void write_residual_csv(const ResidualField& field, std::ostream& out) {
    out << "t,x,residual\n";
    for (int i = 0; i < field.grid.n_t; ++i)
        for (int j = 0; j < field.grid.n_x; ++j)
            out << field.grid.t(i) << "," << field.grid.x(j) << ","
                << field.values[std::size_t(i) * std::size_t(field.grid.n_x) + std::size_t(j)]
                << "\n";
}

namespace detail {

inline bool masked_node(const CandidateSurface& f, double t, double x, double dx) {
    return f.ridge_distance(t, x) < 5.0 * dx;
}

template <typename YFn>
ResidualField heat_residual_of(const YFn& y, const CandidateSurface& f, const RectGrid& grid) {
    ResidualField field;
    field.grid = grid;
    field.values.resize(std::size_t(grid.n_t) * std::size_t(grid.n_x));
    const double dt = grid.dt();
    const double dx = grid.dx();
    for (int i = 0; i < grid.n_t; ++i) {
        const double t = grid.t(i);
        for (int j = 0; j < grid.n_x; ++j) {
            const double x = grid.x(j);
            double& slot = field.values[std::size_t(i) * std::size_t(grid.n_x) + std::size_t(j)];
            if (masked_node(f, t, x, dx)) {
                slot = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const double y_t = (y(t + dt, x) - y(t - dt, x)) / (2.0 * dt);
            const double y_xx = (y(t, x + dx) - 2.0 * y(t, x) + y(t, x - dx)) / (dx * dx);
            slot = y_t + 0.5 * y_xx;
            if (!std::isfinite(slot))
                throw std::runtime_error("heat_residual: non-finite difference at (t=" +
                                         std::to_string(t) + ", x=" + std::to_string(x) + ")");
        }
    }
    field.finalize();
    return field;
}

}  // namespace detail

/// Residual of the backward heat equation Y_t + Y_xx / 2 for
/// Y = f^power(t, x) e^{-lambda t}, via order-2 central differences in both
/// variables. empirical_order is measured against one internal halving of
/// both spacings.
[[nodiscard]] inline ResidualField heat_residual(const CandidateSurface& f, double lambda,
                                                 int power, const RectGrid& grid) {
    if (power != 1 && power != 2)
        throw std::invalid_argument("heat_residual: power must be 1 or 2");
    auto y = [&f, lambda, power](double t, double x) {
        return std::exp(power * f.log_value(t, x) - lambda * t);
    };
    ResidualField field = detail::heat_residual_of(y, f, grid);
    const ResidualField fine = detail::heat_residual_of(y, f, grid.refined());
    if (field.max_norm > 0.0 && fine.max_norm > 0.0)
        field.empirical_order = std::log2(field.max_norm / fine.max_norm);
    return field;
}

/// Max-norm sequence over successive simultaneous (dt, dx) halvings,
/// starting from base; used for refinement-rate checks.
[[nodiscard]] inline std::vector<double> heat_refinement_norms(const CandidateSurface& f,
                                                               double lambda, int power,
                                                               RectGrid base, int levels) {
    std::vector<double> norms;
    auto y = [&f, lambda, power](double t, double x) {
        return std::exp(power * f.log_value(t, x) - lambda * t);
    };
    RectGrid g = base;
    for (int l = 0; l < levels; ++l) {
        norms.push_back(detail::heat_residual_of(y, f, g).max_norm);
        g = g.refined();
    }
    return norms;
}

enum class DerivativeMode {
    automatic,          ///< analytic log-partials when the surface has them
    finite_difference,  ///< force the central-difference stencils
};

struct EqSystemResiduals {
    ResidualField first_moment;    ///< f_t + f_xx/2 - lambda1 f
    ResidualField second_moment;   ///< 2 f f_t - lambda2 f^2 + f_x^2 + f f_xx
    ResidualField gradient_square; ///< f_x^2 - (lambda2 - 2 lambda1) f^2
    bool used_analytic_partials = false;
};

/// Residuals of the PDE system tying a solution surface to its moment growth
/// rates. All three equations are evaluated from one set of derivative
/// values, so the identity
///   second_moment = 2 f * first_moment + gradient_square
/// holds node-for-node to rounding regardless of the derivative mode.
[[nodiscard]] inline EqSystemResiduals eq_system_residuals(const CandidateSurface& f,
                                                           double lambda1, double lambda2,
                                                           const RectGrid& grid,
                                                           DerivativeMode mode =
                                                               DerivativeMode::automatic) {
    if (lambda2 - 2.0 * lambda1 < 0.0)
        throw std::invalid_argument(
            "eq_system_residuals: lambda2 - 2*lambda1 < 0 contradicts the moment inequality");
    const bool analytic =
        mode == DerivativeMode::automatic && f.has_analytic_partials();

    EqSystemResiduals out;
    out.used_analytic_partials = analytic;
    for (ResidualField* field : {&out.first_moment, &out.second_moment, &out.gradient_square}) {
        field->grid = grid;
        field->values.resize(std::size_t(grid.n_t) * std::size_t(grid.n_x));
    }

    const double dt = grid.dt();
    const double dx = grid.dx();
    for (int i = 0; i < grid.n_t; ++i) {
        const double t = grid.t(i);
        for (int j = 0; j < grid.n_x; ++j) {
            const double x = grid.x(j);
            const std::size_t slot = std::size_t(i) * std::size_t(grid.n_x) + std::size_t(j);
            if (detail::masked_node(f, t, x, dx)) {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                out.first_moment.values[slot] = nan;
                out.second_moment.values[slot] = nan;
                out.gradient_square.values[slot] = nan;
                continue;
            }
            const double fv = f.value(t, x);
            double ft, fx, fxx;
            if (analytic) {
                const LogPartials p = f.log_partials(t, x);
                ft = p.h_t * fv;
                fx = p.h_x * fv;
                fxx = (p.h_xx + p.h_x * p.h_x) * fv;
            } else {
                ft = (f.value(t + dt, x) - f.value(t - dt, x)) / (2.0 * dt);
                fx = (f.value(t, x + dx) - f.value(t, x - dx)) / (2.0 * dx);
                fxx = (f.value(t, x + dx) - 2.0 * fv + f.value(t, x - dx)) / (dx * dx);
            }
            out.first_moment.values[slot] = ft + 0.5 * fxx - lambda1 * fv;
            out.second_moment.values[slot] =
                2.0 * fv * ft - lambda2 * fv * fv + fx * fx + fv * fxx;
            out.gradient_square.values[slot] =
                fx * fx - (lambda2 - 2.0 * lambda1) * fv * fv;
        }
    }
    out.first_moment.finalize();
    out.second_moment.finalize();
    out.gradient_square.finalize();
    return out;
}

struct RecoveredParams {
    double c_plus = 0.0;
    double c_minus = 0.0;
    double b = 0.0;
    double c_selected = 0.0;  ///< the root consistent with b = -c/2
    bool zero_c = false;      ///< |c| below tolerance; sign selection skipped
};

/// Inverts the moment rates: c = +-sqrt(lambda2 - 2 lambda1),
/// b = (4 lambda1 - lambda2) / 2, then picks the sign for which b = -c/2.
/// Exactly one sign works when c != 0.
[[nodiscard]] inline RecoveredParams recover_params(double lambda1, double lambda2) {
    const double disc = lambda2 - 2.0 * lambda1;
    if (disc < 0.0) throw std::invalid_argument("recover_params: negative discriminant");
    RecoveredParams out;
    const double c = std::sqrt(disc);
    out.c_plus = c;
    out.c_minus = -c;
    out.b = 0.5 * (4.0 * lambda1 - lambda2);
    if (c < 1e-8) {
        out.zero_c = true;
        out.c_selected = 0.0;
        return out;
    }
    const double gap_plus = std::abs(out.b + 0.5 * out.c_plus);
    const double gap_minus = std::abs(out.b + 0.5 * out.c_minus);
    if (gap_plus == gap_minus)
        throw std::runtime_error("recover_params: sign selection is ambiguous");
    out.c_selected = gap_plus < gap_minus ? out.c_plus : out.c_minus;
    return out;
}

}  // namespace stochexp
