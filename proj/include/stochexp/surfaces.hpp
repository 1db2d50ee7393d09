#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stochexp {

enum class Smoothness { measurable, continuous, analytic };

/// Partial derivatives of the log-surface h = ln f at (u, v), in the (t, x)
/// naming used by the PDE layer: h_t = dh/du, h_x = dh/dv, h_xx = d2h/dv2.
struct LogPartials {
    double h_t;
    double h_x;
    double h_xx;
};

/// A strictly positive two-variable surface f(u, v), u >= 0, held through its
/// logarithm. Closed-form surfaces also expose analytic log-partials and, when
/// they have a non-smooth ridge, the distance to it, so the PDE layer can
/// differentiate exactly or mask the ridge.
class CandidateSurface {
public:
    using LogEval = std::function<double(double, double)>;
    using PartialsEval = std::function<LogPartials(double, double)>;
    using RidgeDistance = std::function<double(double, double)>;

    CandidateSurface(std::string label, Smoothness smoothness, LogEval log_eval,
                     PartialsEval partials = nullptr, RidgeDistance ridge = nullptr)
        : label_(std::move(label)),
          smoothness_(smoothness),
          log_eval_(std::move(log_eval)),
          partials_(std::move(partials)),
          ridge_(std::move(ridge)) {}

    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] Smoothness smoothness() const { return smoothness_; }

    [[nodiscard]] double log_value(double u, double v) const {
        const double l = log_eval_(u, v);
        if (!std::isfinite(l))
            throw std::domain_error("surface '" + label_ + "' is not strictly positive at (u=" +
                                    std::to_string(u) + ", v=" + std::to_string(v) + ")");
        return l;
    }

    [[nodiscard]] double value(double u, double v) const { return std::exp(log_value(u, v)); }

    [[nodiscard]] bool has_analytic_partials() const { return bool(partials_); }

    [[nodiscard]] LogPartials log_partials(double u, double v) const {
        if (!partials_)
            throw std::logic_error("surface '" + label_ + "' has no analytic partials");
        return partials_(u, v);
    }

    /// Distance proxy to the nearest non-smooth locus; +inf for smooth surfaces.
    [[nodiscard]] double ridge_distance(double u, double v) const {
        return ridge_ ? ridge_(u, v) : std::numeric_limits<double>::infinity();
    }

    // ------------------------------------------------------------------
    // Factories
    // ------------------------------------------------------------------

    /// f(u, v) = exp(c v - (c/2) u).
    [[nodiscard]] static CandidateSurface canonical(double c) {
        return CandidateSurface(
            "canonical:{c:" + format_param(c) + "}", Smoothness::analytic,
            [c](double u, double v) { return c * v - 0.5 * c * u; },
            [c](double, double) { return LogPartials{-0.5 * c, c, 0.0}; });
    }

    /// f(u, v) = exp(|(2v - u) u|^{1/3}); solves the single-Brownian equation
    /// but not the two-dimensional Cauchy equation.
    [[nodiscard]] static CandidateSurface counterexample() {
        return CandidateSurface(
            "counterexample", Smoothness::continuous,
            [](double u, double v) { return std::cbrt(std::abs((2.0 * v - u) * u)); },
            nullptr,
            [](double u, double v) { return std::abs(2.0 * v - u); });
    }

    /// f(u, v) = exp(c v + b u); canonical exactly when b = -c/2.
    [[nodiscard]] static CandidateSurface affine_exponent(double c, double b) {
        return CandidateSurface(
            "affine-exponent:{c:" + format_param(c) + ",b:" + format_param(b) + "}",
            Smoothness::analytic,
            [c, b](double u, double v) { return c * v + b * u; },
            [c, b](double, double) { return LogPartials{b, c, 0.0}; });
    }

    [[nodiscard]] static std::string format_param(double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    }

private:
    std::string label_;
    Smoothness smoothness_;
    LogEval log_eval_;
    PartialsEval partials_;
    RidgeDistance ridge_;
};

/// Tabulated surface on a rectangular (u, v) lattice with bilinear
/// interpolation of f itself (positivity is preserved between positive
/// corners); coordinates outside the table are clamped to its hull.
class TableSurface {
public:
    static CandidateSurface load(const std::string& csv_path) {
        std::ifstream in(csv_path);
        if (!in) throw std::runtime_error("table surface: cannot open " + csv_path);
        std::vector<double> us, vs, fs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream row(line);
            std::string a, b, c;
            if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
                !std::getline(row, c, ','))
                continue;
            try {
                const double u = std::stod(a);
                const double v = std::stod(b);
                const double f = std::stod(c);
                if (!(f > 0.0))
                    throw std::runtime_error("table surface: non-positive value in " + csv_path);
                us.push_back(u);
                vs.push_back(v);
                fs.push_back(f);
            } catch (const std::invalid_argument&) {
                continue;  // header row
            }
        }
        if (us.empty()) throw std::runtime_error("table surface: no rows in " + csv_path);

        auto axis = [](std::vector<double> xs) {
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
            return xs;
        };
        const std::vector<double> ug = axis(us);
        const std::vector<double> vg = axis(vs);
        if (ug.size() < 2 || vg.size() < 2 || ug.size() * vg.size() != us.size())
            throw std::runtime_error("table surface: rows do not form a complete grid");

        std::vector<double> grid(ug.size() * vg.size(),
                                 std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < us.size(); ++i) {
            const auto iu = std::size_t(std::lower_bound(ug.begin(), ug.end(), us[i]) - ug.begin());
            const auto iv = std::size_t(std::lower_bound(vg.begin(), vg.end(), vs[i]) - vg.begin());
            grid[iu * vg.size() + iv] = fs[i];
        }
        for (double f : grid)
            if (std::isnan(f))
                throw std::runtime_error("table surface: rows do not form a complete grid");

        auto eval = [ug, vg, grid](double u, double v) {
            auto cell = [](const std::vector<double>& g, double x) {
                x = std::clamp(x, g.front(), g.back());
                auto it = std::upper_bound(g.begin(), g.end(), x);
                std::size_t hi = std::min(std::size_t(it - g.begin()), g.size() - 1);
                if (hi == 0) hi = 1;
                const std::size_t lo = hi - 1;
                const double w = (x - g[lo]) / (g[hi] - g[lo]);
                return std::pair<std::size_t, double>{lo, std::clamp(w, 0.0, 1.0)};
            };
            const auto [iu, wu] = cell(ug, u);
            const auto [iv, wv] = cell(vg, v);
            const std::size_t nv = vg.size();
            const double f00 = grid[iu * nv + iv];
            const double f01 = grid[iu * nv + iv + 1];
            const double f10 = grid[(iu + 1) * nv + iv];
            const double f11 = grid[(iu + 1) * nv + iv + 1];
            const double f = (1 - wu) * ((1 - wv) * f00 + wv * f01) +
                             wu * ((1 - wv) * f10 + wv * f11);
            return std::log(f);
        };
        return CandidateSurface("table:" + csv_path, Smoothness::continuous, eval);
    }
};

/// Centered Gaussian density in x with variance s.
struct GaussianDensity {
    [[nodiscard]] static double value(double s, double x) {
        return std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * std::numbers::pi * s);
    }
};

namespace detail {

/// Splits "name:rest" and strips optional {...} / key: decorations from rest,
/// so "canonical:{c:1}" and "canonical:1" parse alike.
inline std::vector<double> parse_params(std::string rest) {
    if (!rest.empty() && rest.front() == '{') rest = rest.substr(1);
    if (!rest.empty() && rest.back() == '}') rest.pop_back();
    std::vector<double> out;
    std::istringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto colon = tok.find(':');
        if (colon != std::string::npos) tok = tok.substr(colon + 1);
        out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace detail

/// Surface selection by name: canonical:{c}, counterexample,
/// affine-exponent:{c,b}, table:{csv path}.
[[nodiscard]] inline CandidateSurface parse_surface(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "canonical") {
        const auto p = detail::parse_params(rest);
        if (p.size() != 1) throw std::invalid_argument("canonical surface needs one parameter c");
        return CandidateSurface::canonical(p[0]);
    }
    if (name == "counterexample") return CandidateSurface::counterexample();
    if (name == "affine-exponent") {
        const auto p = detail::parse_params(rest);
        if (p.size() != 2)
            throw std::invalid_argument("affine-exponent surface needs parameters c,b");
        return CandidateSurface::affine_exponent(p[0], p[1]);
    }
    if (name == "table") {
        std::string path = rest;
        if (!path.empty() && path.front() == '{') path = path.substr(1);
        if (!path.empty() && path.back() == '}') path.pop_back();
        const auto kv = path.find(':');
        if (kv != std::string::npos && path.substr(0, kv) == "csv") path = path.substr(kv + 1);
        return TableSurface::load(path);
    }
    throw std::invalid_argument("unknown surface spec '" + spec + "'");
}

}  // namespace stochexp
