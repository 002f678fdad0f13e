#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hardylab/grid.hpp"

namespace hardylab {

struct BBox {
    Vec lo{0.0, 0.0};
    Vec hi{0.0, 0.0};
};

// Geometric description of a bounded open domain Omega. The exterior-cone
// property is a user-declared hypothesis (never computed); strichartz_N is
// an optional declared bound checked against strichartz_count.
struct DomainSpec {
    enum class Kind { interval, box, ball, domain_union, implicit };

    Kind kind = Kind::interval;
    Vec lo{0.0, 0.0};  // interval [a,b] uses lo[0], hi[0]; box uses both axes
    Vec hi{0.0, 0.0};
    Vec center{0.0, 0.0};
    double radius = 0.0;
    std::vector<DomainSpec> parts;                       // union
    std::function<double(const Vec&, int)> level;        // implicit: inside iff level < 0
    BBox implicit_bbox;

    bool exterior_cone = false;
    std::optional<int> strichartz_N;
    std::string label;

    bool contains(const Vec& x, int dim) const {
        switch (kind) {
            case Kind::interval:
                return x[0] > lo[0] && x[0] < hi[0];
            case Kind::box:
                for (int a = 0; a < dim; ++a) {
                    const auto i = static_cast<std::size_t>(a);
                    if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
                }
                return true;
            case Kind::ball: {
                Vec d{x[0] - center[0], dim == 2 ? x[1] - center[1] : 0.0};
                return norm2(d, dim) < radius;
            }
            case Kind::domain_union:
                for (const auto& p : parts)
                    if (p.contains(x, dim)) return true;
                return false;
            case Kind::implicit:
                return level(x, dim) < 0.0;
        }
        return false;
    }

    BBox bbox(int dim) const {
        switch (kind) {
            case Kind::interval:
                return BBox{{lo[0], 0.0}, {hi[0], 0.0}};
            case Kind::box:
                return BBox{lo, hi};
            case Kind::ball: {
                BBox b;
                for (int a = 0; a < dim; ++a) {
                    const auto i = static_cast<std::size_t>(a);
                    b.lo[i] = center[i] - radius;
                    b.hi[i] = center[i] + radius;
                }
                return b;
            }
            case Kind::domain_union: {
                BBox b = parts.front().bbox(dim);
                for (std::size_t k = 1; k < parts.size(); ++k) {
                    const BBox c = parts[k].bbox(dim);
                    for (int a = 0; a < dim; ++a) {
                        const auto i = static_cast<std::size_t>(a);
                        b.lo[i] = std::min(b.lo[i], c.lo[i]);
                        b.hi[i] = std::max(b.hi[i], c.hi[i]);
                    }
                }
                return b;
            }
            case Kind::implicit:
                return implicit_bbox;
        }
        return {};
    }

    double diameter(int dim) const {
        const BBox b = bbox(dim);
        Vec d{b.hi[0] - b.lo[0], dim == 2 ? b.hi[1] - b.lo[1] : 0.0};
        return norm2(d, dim);
    }

    // Signed closed-form distance to the boundary for exact shapes
    // (positive inside). Union and implicit shapes fall back to the
    // grid distance transform.
    std::optional<double> exact_boundary_distance(const Vec& x, int dim) const {
        switch (kind) {
            case Kind::interval:
                return std::min(x[0] - lo[0], hi[0] - x[0]);
            case Kind::box: {
                double d = std::numeric_limits<double>::infinity();
                bool inside = true;
                for (int a = 0; a < dim; ++a) {
                    const auto i = static_cast<std::size_t>(a);
                    d = std::min(d, std::min(x[i] - lo[i], hi[i] - x[i]));
                    inside = inside && x[i] > lo[i] && x[i] < hi[i];
                }
                if (inside) return d;
                // outside a box: distance to the rectangle
                double s = 0.0;
                for (int a = 0; a < dim; ++a) {
                    const auto i = static_cast<std::size_t>(a);
                    const double g = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
                    s += g * g;
                }
                return s > 0.0 ? -std::sqrt(s) : d;
            }
            case Kind::ball: {
                Vec d{x[0] - center[0], dim == 2 ? x[1] - center[1] : 0.0};
                return radius - norm2(d, dim);
            }
            default:
                return std::nullopt;
        }
    }

    // Nearest point of the closure, for exact shapes only.
    std::optional<Vec> nearest_point(const Vec& x, int dim) const {
        switch (kind) {
            case Kind::interval:
                return Vec{std::clamp(x[0], lo[0], hi[0]), 0.0};
            case Kind::box: {
                Vec p = x;
                for (int a = 0; a < dim; ++a) {
                    const auto i = static_cast<std::size_t>(a);
                    p[i] = std::clamp(x[i], lo[i], hi[i]);
                }
                return p;
            }
            case Kind::ball: {
                Vec d{x[0] - center[0], dim == 2 ? x[1] - center[1] : 0.0};
                const double r = norm2(d, dim);
                if (r <= radius || r == 0.0) return x;
                const double s = radius / r;
                return Vec{center[0] + d[0] * s, dim == 2 ? center[1] + d[1] * s : 0.0};
            }
            default:
                return std::nullopt;
        }
    }
};

inline DomainSpec make_interval(double a, double b) {
    if (!(a < b)) throw validation_error("interval: requires a < b");
    DomainSpec d;
    d.kind = DomainSpec::Kind::interval;
    d.lo[0] = a;
    d.hi[0] = b;
    d.exterior_cone = true;
    d.label = "interval";
    return d;
}

inline DomainSpec make_box(Vec lo, Vec hi) {
    DomainSpec d;
    d.kind = DomainSpec::Kind::box;
    d.lo = lo;
    d.hi = hi;
    d.exterior_cone = true;
    d.label = "box";
    return d;
}

inline DomainSpec make_ball(Vec center, double radius) {
    if (!(radius > 0.0)) throw validation_error("ball: radius must be positive");
    DomainSpec d;
    d.kind = DomainSpec::Kind::ball;
    d.center = center;
    d.radius = radius;
    d.exterior_cone = true;
    d.label = "ball";
    return d;
}

inline DomainSpec make_union(std::vector<DomainSpec> parts) {
    if (parts.empty()) throw validation_error("union: needs at least one part");
    DomainSpec d;
    d.kind = DomainSpec::Kind::domain_union;
    d.parts = std::move(parts);
    d.label = "union";
    return d;
}

inline DomainSpec make_implicit(std::function<double(const Vec&, int)> level, BBox bbox, std::string label = "implicit") {
    DomainSpec d;
    d.kind = DomainSpec::Kind::implicit;
    d.level = std::move(level);
    d.implicit_bbox = bbox;
    d.label = std::move(label);
    return d;
}

inline DomainSpec make_annulus(Vec center, double r_inner, double r_outer) {
    if (!(0.0 < r_inner && r_inner < r_outer)) throw validation_error("annulus: requires 0 < r_inner < r_outer");
    DomainSpec d = make_implicit(
        [center, r_inner, r_outer](const Vec& x, int dim) {
            Vec v{x[0] - center[0], dim == 2 ? x[1] - center[1] : 0.0};
            const double r = norm2(v, dim);
            return std::max(r - r_outer, r_inner - r);
        },
        BBox{{center[0] - r_outer, center[1] - r_outer}, {center[0] + r_outer, center[1] + r_outer}}, "annulus");
    return d;
}

// Box with a horizontal slit removed: {x1 > sx} x {|x2 - sy| < w} cut out.
// The exterior cone property fails at the slit tip.
inline DomainSpec make_slit_box(Vec lo, Vec hi, double slit_from_x, double slit_y, double slit_half_width) {
    DomainSpec d = make_implicit(
        [lo, hi, slit_from_x, slit_y, slit_half_width](const Vec& x, int) {
            double box = std::max(std::max(lo[0] - x[0], x[0] - hi[0]), std::max(lo[1] - x[1], x[1] - hi[1]));
            double slit = std::max(slit_from_x - x[0], std::abs(x[1] - slit_y) - slit_half_width);
            return std::max(box, -slit);
        },
        BBox{lo, hi}, "slit_box");
    return d;
}

inline void require_contained(const DomainSpec& dom, const Grid& g) {
    const BBox b = dom.bbox(g.dim);
    const Vec up = g.upper();
    for (int a = 0; a < g.dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (b.lo[i] < g.origin[i] || b.hi[i] > up[i])
            throw containment_error("domain is not contained in the grid window");
    }
}

// Window margin rule: every side must clear the domain's bounding box by
// at least diam(Omega)/4 so exterior quadrature has room.
inline void require_margin(const DomainSpec& dom, const Grid& g, double factor = 0.25) {
    require_contained(dom, g);
    const BBox b = dom.bbox(g.dim);
    const Vec up = g.upper();
    const double need = dom.diameter(g.dim) * factor;
    for (int a = 0; a < g.dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (b.lo[i] - g.origin[i] < need - 1e-12 || up[i] - b.hi[i] < need - 1e-12)
            throw containment_error("window margin below diam(domain)/4");
    }
}

// Membership mask: a cell belongs to the discrete domain iff its center
// is in Omega. Sub-cell boundary geometry is not resolved here.
inline std::vector<std::uint8_t> chi_mask(const DomainSpec& dom, const Grid& g) {
    require_contained(dom, g);
    std::vector<std::uint8_t> mask(g.cell_count(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = dom.contains(g.center(i), g.dim) ? 1 : 0;
    return mask;
}

namespace detail {

// Two-pass vector distance transform: for every cell, the nearest seed
// cell (by center distance). Error against the true nearest seed is at
// most one cell diagonal in pathological configurations.
inline void distance_transform(const Grid& g, const std::vector<std::uint8_t>& seeds,
                               std::vector<std::int32_t>& nearest, std::vector<double>& dist) {
    const std::size_t n = g.cell_count();
    nearest.assign(n, -1);
    dist.assign(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        if (seeds[i]) {
            nearest[i] = static_cast<std::int32_t>(i);
            dist[i] = 0.0;
        }

    const int m = g.m;
    auto relax = [&](std::size_t at, int ni, int nj) {
        if (ni < 0 || ni >= m) return;
        if (g.dim == 2 && (nj < 0 || nj >= m)) return;
        const std::size_t nb = g.dim == 1 ? static_cast<std::size_t>(ni) : g.flat(ni, nj);
        if (nearest[nb] < 0) return;
        const Vec s = g.center(static_cast<std::size_t>(nearest[nb]));
        const Vec x = g.center(at);
        Vec d{x[0] - s[0], g.dim == 2 ? x[1] - s[1] : 0.0};
        const double cand = norm2(d, g.dim);
        if (cand < dist[at]) {
            dist[at] = cand;
            nearest[at] = nearest[nb];
        }
    };

    if (g.dim == 1) {
        for (int i = 0; i < m; ++i) relax(static_cast<std::size_t>(i), i - 1, 0);
        for (int i = m - 1; i >= 0; --i) relax(static_cast<std::size_t>(i), i + 1, 0);
        return;
    }
    // forward pass
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const std::size_t at = g.flat(i, j);
            relax(at, i - 1, j - 1);
            relax(at, i - 1, j);
            relax(at, i - 1, j + 1);
            relax(at, i, j - 1);
        }
    // backward pass
    for (int i = m - 1; i >= 0; --i)
        for (int j = m - 1; j >= 0; --j) {
            const std::size_t at = g.flat(i, j);
            relax(at, i + 1, j + 1);
            relax(at, i + 1, j);
            relax(at, i + 1, j - 1);
            relax(at, i, j + 1);
        }
}

// In-domain cells with an axis or diagonal neighbor outside.
inline std::vector<std::uint8_t> boundary_cells(const Grid& g, const std::vector<std::uint8_t>& mask) {
    const int m = g.m;
    std::vector<std::uint8_t> bd(g.cell_count(), 0);
    if (g.dim == 1) {
        for (int i = 0; i < m; ++i) {
            if (!mask[static_cast<std::size_t>(i)]) continue;
            const bool edge = (i == 0) || (i == m - 1) || !mask[static_cast<std::size_t>(i - 1)] ||
                              !mask[static_cast<std::size_t>(i + 1)];
            bd[static_cast<std::size_t>(i)] = edge ? 1 : 0;
        }
        return bd;
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const std::size_t at = g.flat(i, j);
            if (!mask[at]) continue;
            bool edge = false;
            for (int di = -1; di <= 1 && !edge; ++di)
                for (int dj = -1; dj <= 1 && !edge; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ni = i + di, nj = j + dj;
                    if (ni < 0 || ni >= m || nj < 0 || nj >= m || !mask[g.flat(ni, nj)]) edge = true;
                }
            bd[at] = edge ? 1 : 0;
        }
    return bd;
}

}  // namespace detail

// dist(x, boundary of Omega) at interior cell centers: exact closed forms
// for interval/box/ball; two-pass transform against the boundary cell set
// otherwise (error <= h*sqrt(n)).
inline GriddedFunction boundary_distance(const DomainSpec& dom, const Grid& g) {
    GriddedFunction out = make_function(g);
    out.mask = chi_mask(dom, g);
    if (dom.exact_boundary_distance(g.center(0), g.dim).has_value()) {
        for (std::size_t i = 0; i < out.values.size(); ++i)
            if (out.mask[i]) out.values[i] = *dom.exact_boundary_distance(g.center(i), g.dim);
        return out;
    }
    const auto bd = detail::boundary_cells(g, out.mask);
    std::vector<std::int32_t> nearest;
    std::vector<double> dist;
    detail::distance_transform(g, bd, nearest, dist);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (out.mask[i]) out.values[i] = dist[i];
    return out;
}

// Zero extension E_Omega: values copied inside Omega, exact zero outside.
inline GriddedFunction extend_by_zero(const GriddedFunction& f) {
    GriddedFunction out = make_function(f.grid);
    if (!f.masked()) {
        out.values = f.values;
        return out;
    }
    for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = f.mask[i] ? f.values[i] : 0.0;
    return out;
}

// Restriction r_Omega: attaches the domain mask and zeroes the rest.
inline GriddedFunction restrict_to(const GriddedFunction& f, const DomainSpec& dom) {
    GriddedFunction out = f;
    out.mask = chi_mask(dom, f.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (!out.mask[i]) out.values[i] = 0.0;
    return out;
}

inline GriddedFunction restrict_to(const GriddedFunction& f, const std::vector<std::uint8_t>& mask) {
    GriddedFunction out = f;
    out.mask = mask;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (!out.mask[i]) out.values[i] = 0.0;
    return out;
}

// Maximum number of connected in-domain runs over grid lines parallel to
// the given axis.
inline int strichartz_count(const DomainSpec& dom, const Grid& g, int axis) {
    const auto mask = chi_mask(dom, g);
    const int m = g.m;
    int worst = 0;
    if (g.dim == 1) {
        int runs = 0;
        bool in = false;
        for (int i = 0; i < m; ++i) {
            const bool now = mask[static_cast<std::size_t>(i)] != 0;
            if (now && !in) ++runs;
            in = now;
        }
        return runs;
    }
    const int lines = m;
    for (int l = 0; l < lines; ++l) {
        int runs = 0;
        bool in = false;
        for (int t = 0; t < m; ++t) {
            const std::size_t at = axis == 0 ? g.flat(t, l) : g.flat(l, t);
            const bool now = mask[at] != 0;
            if (now && !in) ++runs;
            in = now;
        }
        worst = std::max(worst, runs);
    }
    return worst;
}

}  // namespace hardylab
