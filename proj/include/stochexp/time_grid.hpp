#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochexp {

/// Uniform discretization of [0, T]: n_steps cells, n_steps + 1 points.
class TimeGrid {
public:
    TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
        if (!(horizon > 0.0))
            throw std::invalid_argument("TimeGrid: horizon must be > 0");
        if (n_steps < 1)
            throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
        step_ = horizon / n_steps;
        times_.resize(std::size_t(n_steps) + 1);
        for (int k = 0; k <= n_steps; ++k) times_[std::size_t(k)] = k * step_;
        times_.back() = horizon;  // exact endpoint
    }

    [[nodiscard]] double horizon() const { return horizon_; }
    [[nodiscard]] int n_steps() const { return n_steps_; }
    [[nodiscard]] std::size_t n_points() const { return times_.size(); }
    [[nodiscard]] double step() const { return step_; }
    [[nodiscard]] std::span<const double> times() const { return times_; }
    [[nodiscard]] double time(std::size_t k) const { return times_[k]; }

    /// Index of a grid-aligned time; rejects anything off the lattice.
    [[nodiscard]] std::size_t index_of(double t) const {
        const double k = std::round(t / step_);
        if (k < 0 || k > double(n_steps_) ||
            std::abs(t - k * step_) > 1e-9 * std::max(1.0, horizon_))
            throw std::invalid_argument("TimeGrid: time " + std::to_string(t) +
                                        " is not grid-aligned");
        return std::size_t(k);
    }

    [[nodiscard]] bool same_as(const TimeGrid& other) const {
        return n_steps_ == other.n_steps_ && horizon_ == other.horizon_;
    }

private:
    double horizon_;
    int n_steps_;
    double step_;
    std::vector<double> times_;
};

using TimeGridPtr = std::shared_ptr<const TimeGrid>;

[[nodiscard]] inline TimeGridPtr make_grid(double horizon, int n_steps) {
    return std::make_shared<const TimeGrid>(horizon, n_steps);
}

/// A real-valued sample path on a grid; values.size() == grid->n_points().
struct PathOnGrid {
    TimeGridPtr grid;
    std::vector<double> values;

    [[nodiscard]] double at_time(double t) const { return values[grid->index_of(t)]; }
    [[nodiscard]] double terminal() const { return values.back(); }
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b,
                              const char* where) {
    if (!a.same_as(b))
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

/// Debug export, columns "t,value".
inline void write_path_csv(const PathOnGrid& path, std::ostream& out) {
    out << "t,value\n";
    for (std::size_t k = 0; k < path.values.size(); ++k)
        out << path.grid->time(k) << "," << path.values[k] << "\n";
}

}  // namespace stochexp
