#pragma once

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "hardylab/common.hpp"

namespace hardylab {

// Uniform Cartesian sampling of an ambient window in R^n, n in {1,2}.
// Sample locations are cell centers; the window is tiled by m^n cells.
struct Grid {
    int dim = 1;
    Vec origin{0.0, 0.0};  // lower corner of the window
    Vec extent{1.0, 0.0};  // side length per axis
    int m = 0;             // cells per axis

    double h(int axis) const { return extent[static_cast<std::size_t>(axis)] / m; }
    double h_min() const { return dim == 1 ? h(0) : std::min(h(0), h(1)); }
    double h_max() const { return dim == 1 ? h(0) : std::max(h(0), h(1)); }
    double cell_volume() const { return dim == 1 ? h(0) : h(0) * h(1); }

    std::size_t cell_count() const {
        std::size_t n = static_cast<std::size_t>(m);
        return dim == 1 ? n : n * n;
    }

    // Row-major lexicographic flattening: x1 is the slow axis.
    std::size_t flat(int i, int j = 0) const {
        return dim == 1 ? static_cast<std::size_t>(i)
                        : static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j);
    }
    int axis_index(std::size_t flat_idx, int axis) const {
        if (dim == 1) return static_cast<int>(flat_idx);
        return axis == 0 ? static_cast<int>(flat_idx / static_cast<std::size_t>(m))
                         : static_cast<int>(flat_idx % static_cast<std::size_t>(m));
    }

    Vec center(std::size_t flat_idx) const {
        Vec x{0.0, 0.0};
        if (dim == 1) {
            x[0] = origin[0] + (static_cast<double>(flat_idx) + 0.5) * h(0);
        } else {
            x[0] = origin[0] + (axis_index(flat_idx, 0) + 0.5) * h(0);
            x[1] = origin[1] + (axis_index(flat_idx, 1) + 0.5) * h(1);
        }
        return x;
    }

    Vec upper() const {
        return dim == 1 ? Vec{origin[0] + extent[0], 0.0} : Vec{origin[0] + extent[0], origin[1] + extent[1]};
    }

    bool operator==(const Grid& o) const {
        return dim == o.dim && m == o.m && origin == o.origin && extent == o.extent;
    }
};

inline Grid make_grid(int dim, Vec origin, Vec extent, int m) {
    if (dim != 1 && dim != 2) throw validation_error("grid: dim must be 1 or 2");
    if (m < 8) throw validation_error("grid: points_per_axis must be >= 8");
    for (int a = 0; a < dim; ++a)
        if (!(extent[static_cast<std::size_t>(a)] > 0.0)) throw validation_error("grid: extent must be positive");
    return Grid{dim, origin, extent, m};
}

// Real-valued samples on a Grid, optionally masked to a domain.
// Masked-out cells hold exactly zero when produced by zero extension.
struct GriddedFunction {
    Grid grid;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;  // empty: defined on the whole window

    bool masked() const { return !mask.empty(); }
};

inline GriddedFunction make_function(const Grid& g) {
    return GriddedFunction{g, std::vector<double>(g.cell_count(), 0.0), {}};
}

template <class Fn>
GriddedFunction sample_function(const Grid& g, Fn&& fn) {
    GriddedFunction f = make_function(g);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = fn(g.center(i));
    return f;
}

inline void check_finite(const GriddedFunction& f, const char* who) {
    for (const double v : f.values)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input values");
}

// Midpoint quadrature over the masked region (or the whole window):
// sum of values * h^n in fixed lexicographic order with compensated
// summation, deterministic for any worker count.
inline double integrate(const GriddedFunction& f) {
    KahanSum acc;
    const double hv = f.grid.cell_volume();
    if (f.masked()) {
        for (std::size_t i = 0; i < f.values.size(); ++i)
            if (f.mask[i]) acc.add(f.values[i] * hv);
    } else {
        for (const double v : f.values) acc.add(v * hv);
    }
    return acc.value();
}

// Inner product sum f*g*h^n over an explicit cell selection.
inline double inner(const GriddedFunction& f, const GriddedFunction& g, const std::vector<std::uint8_t>& sel) {
    KahanSum acc;
    const double hv = f.grid.cell_volume();
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (sel.empty() || sel[i]) acc.add(f.values[i] * g.values[i] * hv);
    return acc.value();
}

inline double max_abs(const GriddedFunction& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (f.masked() && !f.mask[i]) continue;
        m = std::max(m, std::abs(f.values[i]));
    }
    return m;
}

// CSV serialization: columns x1..xn,value, row-major lexicographic.
inline void to_csv(const GriddedFunction& f, std::ostream& os) {
    if (f.grid.dim == 1)
        os << "x1,value\n";
    else
        os << "x1,x2,value\n";
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const Vec x = f.grid.center(i);
        os << format_g17(x[0]);
        if (f.grid.dim == 2) os << ',' << format_g17(x[1]);
        os << ',' << format_g17(f.values[i]) << '\n';
    }
}

}  // namespace hardylab
