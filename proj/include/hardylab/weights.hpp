#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hardylab/operators.hpp"

namespace hardylab {

// a_Omega(x) = integral over R^n \ Omega of |x-y|^{-n-alpha} dy, on Omega's cells.
struct WeightField {
    GriddedFunction a;     // masked to Omega
    double alpha = 0.5;
    double tail_radius = 0.0;  // half of the smallest window extent (far-field scale)
};

namespace detail {

// Membership crossings of t -> contains(x + t*u) on [t0, t1], by sampling
// plus bisection. Returns the "outside" sub-segments.
template <class Inside>
std::vector<std::pair<double, double>> outside_segments(const Inside& inside, double t0, double t1,
                                                        int samples = 12) {
    std::vector<double> ts;
    std::vector<bool> in;
    ts.reserve(static_cast<std::size_t>(samples) + 2);
    for (int k = 0; k <= samples; ++k) {
        const double t = t0 + (t1 - t0) * static_cast<double>(k) / samples;
        ts.push_back(t);
        in.push_back(inside(t));
    }
    std::vector<std::pair<double, double>> out;
    double cursor = t0;
    bool state = in.front();
    auto bisect = [&](double a, double b) {
        bool fa = inside(a);
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (a + b);
            if (inside(mid) == fa)
                a = mid;
            else
                b = mid;
        }
        return 0.5 * (a + b);
    };
    for (std::size_t k = 1; k < ts.size(); ++k) {
        if (in[k] == state) continue;
        const double cross = bisect(ts[k - 1], ts[k]);
        if (!state) out.emplace_back(cursor, cross);
        cursor = cross;
        state = in[k];
    }
    if (!state) out.emplace_back(cursor, t1);
    return out;
}

// int_a^b |x-y|^{-1-alpha} dy for an interval not containing x.
inline double interval_kernel_integral(double x, double a, double b, double alpha) {
    auto H = [x, alpha](double y) {
        const double r = std::abs(y - x);
        const double s = y > x ? 1.0 : -1.0;
        return -s * std::pow(r, -alpha) / alpha;
    };
    return H(b) - H(a);
}

// Radial primitive: int_a^b r^{-1-alpha} dr = (a^-alpha - b^-alpha)/alpha.
inline double radial_primitive(double a, double b, double alpha) {
    return (std::pow(a, -alpha) - std::pow(b, -alpha)) / alpha;
}

// Polar-exact integral of |x-y|^{-n-alpha} over (cell intersect Omega^c),
// valid for x inside or near the cell. Rays from x; exact in r.
inline double cell_out_integral_polar(const DomainSpec& dom, const Vec& x, const Vec& clo, const Vec& chi_,
                                      double alpha, int dim, int nrays = 64) {
    KahanSum acc;
    const double dth = 2.0 * M_PI / nrays;
    const int rays = dim == 1 ? 2 : nrays;
    for (int it = 0; it < rays; ++it) {
        Vec u{1.0, 0.0};
        if (dim == 1)
            u[0] = it == 0 ? 1.0 : -1.0;
        else {
            const double th = (it + 0.5) * dth;
            u = {std::cos(th), std::sin(th)};
        }
        // ray ∩ cell (slab method)
        double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
        bool hit = true;
        for (int a = 0; a < dim && hit; ++a) {
            const auto i = static_cast<std::size_t>(a);
            if (std::abs(u[i]) < 1e-14) {
                if (x[i] < clo[i] || x[i] > chi_[i]) hit = false;
                continue;
            }
            double ta = (clo[i] - x[i]) / u[i];
            double tb = (chi_[i] - x[i]) / u[i];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        }
        if (!hit || t1 <= t0) continue;
        auto inside = [&](double t) {
            const Vec y{x[0] + t * u[0], dim == 2 ? x[1] + t * u[1] : 0.0};
            return dom.contains(y, dim);
        };
        for (const auto& [sa, sb] : outside_segments(inside, t0, t1)) {
            if (sb <= sa || sb <= 0.0) continue;
            const double lo = std::max(sa, 1e-300);
            const double w = dim == 1 ? 1.0 : dth;
            acc.add(w * radial_primitive(lo, sb, alpha));
        }
    }
    return acc.value();
}

// Integral of |x-y|^{-n-alpha} over the window complement; closed form in
// 1-D, polar-exact per arc (split at the window corners) in 2-D.
inline double beyond_window_integral(const Grid& g, const Vec& x, double alpha) {
    if (g.dim == 1) {
        const double W0 = g.origin[0], W1 = g.origin[0] + g.extent[0];
        return (std::pow(x[0] - W0, -alpha) + std::pow(W1 - x[0], -alpha)) / alpha;
    }
    const double lo0 = g.origin[0], lo1 = g.origin[1];
    const double hi0 = lo0 + g.extent[0], hi1 = lo1 + g.extent[1];
    const Vec corners[4] = {{lo0, lo1}, {hi0, lo1}, {hi0, hi1}, {lo0, hi1}};
    // arc i runs corner i -> corner i+1 and exits the shared edge
    const double edge_dist[4] = {x[1] - lo1, hi0 - x[0], hi1 - x[1], x[0] - lo0};
    const bool edge_axis0[4] = {false, true, false, true};  // which coordinate of u enters R
    KahanSum acc;
    for (int e = 0; e < 4; ++e) {
        double a0 = std::atan2(corners[e][1] - x[1], corners[e][0] - x[0]);
        double a1 = std::atan2(corners[(e + 1) % 4][1] - x[1], corners[(e + 1) % 4][0] - x[0]);
        while (a1 <= a0) a1 += 2.0 * M_PI;
        const long nth = 256;
        const double w = (a1 - a0) / nth;
        for (long i = 0; i < nth; ++i) {
            const double th = a0 + (static_cast<double>(i) + 0.5) * w;
            const double c = edge_axis0[e] ? std::cos(th) : std::sin(th);
            const double R = edge_dist[e] / std::abs(c);
            acc.add(w * std::pow(R, -alpha) / alpha);
        }
    }
    return acc.value();
}

struct CellClass {
    std::vector<std::uint8_t> fully_out;
    std::vector<std::size_t> straddle;       // flat indices
    std::vector<double> straddle_frac_out;   // sub-cell out fraction per straddle cell
};

inline CellClass classify_cells(const DomainSpec& dom, const Grid& g, const std::vector<std::uint8_t>& omega) {
    CellClass cc;
    cc.fully_out.assign(g.cell_count(), 0);
    const double half_diag = 0.5 * (g.dim == 1 ? g.h(0) : std::hypot(g.h(0), g.h(1)));
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        const Vec c = g.center(i);
        bool straddle = false;
        if (auto d = dom.exact_boundary_distance(c, g.dim)) {
            straddle = std::abs(*d) <= half_diag + 1e-13;
        } else {
            const bool center_in = omega[i] != 0;
            const double h0 = 0.5 * g.h(0), h1 = g.dim == 2 ? 0.5 * g.h(1) : 0.0;
            for (int sx = -1; sx <= 1 && !straddle; sx += 2)
                for (int sy = -1; sy <= 1 && !straddle; sy += 2) {
                    const Vec corner{c[0] + sx * h0, g.dim == 2 ? c[1] + sy * h1 : 0.0};
                    if (dom.contains(corner, g.dim) != center_in) straddle = true;
                    if (g.dim == 1) break;
                }
        }
        if (straddle) {
            cc.straddle.push_back(i);
            // sub-cell out fraction
            const int s = g.dim == 1 ? 64 : 16;
            long out_cnt = 0, tot = 0;
            for (int a = 0; a < s; ++a) {
                const double ox = c[0] + ((a + 0.5) / s - 0.5) * g.h(0);
                if (g.dim == 1) {
                    ++tot;
                    if (!dom.contains(Vec{ox, 0.0}, 1)) ++out_cnt;
                } else {
                    for (int b = 0; b < s; ++b) {
                        const double oy = c[1] + ((b + 0.5) / s - 0.5) * g.h(1);
                        ++tot;
                        if (!dom.contains(Vec{ox, oy}, 2)) ++out_cnt;
                    }
                }
            }
            cc.straddle_frac_out.push_back(static_cast<double>(out_cnt) / static_cast<double>(tot));
        } else {
            cc.fully_out[i] = omega[i] ? 0 : 1;
        }
    }
    return cc;
}

}  // namespace detail

// Near field: cellwise quadrature over the window minus Omega with exact
// sub-cell treatment near the boundary and near x; far field: the exact
// window-complement integral (the window margin rule keeps it smooth).
inline WeightField a_omega(const DomainSpec& dom, double alpha, const Grid& g, bool use_fft = true) {
    require_margin(dom, g);
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::range_error("a_omega: requires 0 < alpha < 1");
    const auto omega = chi_mask(dom, g);
    const detail::CellClass cc = detail::classify_cells(dom, g, omega);

    WeightField wf;
    wf.alpha = alpha;
    wf.a = make_function(g);
    wf.a.mask = omega;
    wf.tail_radius = 0.5 * (g.dim == 1 ? g.extent[0] : std::min(g.extent[0], g.extent[1]));

    const double h = g.h_max();
    const double p = -g.dim - alpha;

    if (g.dim == 1) {
        // exact per-cell primitives everywhere; straddle cells split at the
        // true boundary crossings
        std::vector<std::vector<std::pair<double, double>>> straddle_segs(cc.straddle.size());
        for (std::size_t s = 0; s < cc.straddle.size(); ++s) {
            const Vec c = g.center(cc.straddle[s]);
            auto inside = [&](double t) { return dom.contains(Vec{t, 0.0}, 1); };
            straddle_segs[s] = detail::outside_segments(inside, c[0] - 0.5 * g.h(0), c[0] + 0.5 * g.h(0), 16);
        }
        par::parallel_for(g.cell_count(), [&](std::size_t xi) {
            if (!omega[xi]) return;
            const double x = g.center(xi)[0];
            KahanSum acc;
            for (std::size_t yi = 0; yi < g.cell_count(); ++yi) {
                if (!cc.fully_out[yi]) continue;
                const double c = g.center(yi)[0];
                acc.add(detail::interval_kernel_integral(x, c - 0.5 * g.h(0), c + 0.5 * g.h(0), alpha));
            }
            for (std::size_t s = 0; s < cc.straddle.size(); ++s)
                for (const auto& [a, b] : straddle_segs[s])
                    if (!(x >= a && x <= b)) acc.add(detail::interval_kernel_integral(x, a, b, alpha));
            acc.add(detail::beyond_window_integral(g, Vec{x, 0.0}, alpha));
            wf.a.values[xi] = acc.value();
        });
        return wf;
    }

    // 2-D: fully-out cells by lattice convolution; straddle band per x.
    KernelOptions opt;
    opt.corr_radius = potential_correction_radius(g);
    const KernelTable table = make_power_kernel(g, p, opt);
    std::vector<double> out_field(g.cell_count(), 0.0);
    for (std::size_t i = 0; i < g.cell_count(); ++i) out_field[i] = cc.fully_out[i] ? 1.0 : 0.0;
    const std::vector<double> conv_part = convolve(table, out_field, use_fft);

    par::parallel_for(g.cell_count(), [&](std::size_t xi) {
        if (!omega[xi]) return;
        const Vec x = g.center(xi);
        KahanSum acc;
        acc.add(conv_part[xi]);
        for (std::size_t s = 0; s < cc.straddle.size(); ++s) {
            const std::size_t yi = cc.straddle[s];
            const Vec c = g.center(yi);
            const Vec d{x[0] - c[0], x[1] - c[1]};
            const double r = norm2(d, 2);
            const Vec clo{c[0] - 0.5 * g.h(0), c[1] - 0.5 * g.h(1)};
            const Vec chi_{c[0] + 0.5 * g.h(0), c[1] + 0.5 * g.h(1)};
            if (r <= 2.5 * h) {
                acc.add(detail::cell_out_integral_polar(dom, x, clo, chi_, alpha, 2));
            } else if (r <= 6.0 * h) {
                const int ss = 16;
                KahanSum cellsum;
                for (int a = 0; a < ss; ++a)
                    for (int b = 0; b < ss; ++b) {
                        const Vec y{clo[0] + (a + 0.5) * g.h(0) / ss, clo[1] + (b + 0.5) * g.h(1) / ss};
                        if (dom.contains(y, 2)) continue;
                        cellsum.add(std::pow(std::hypot(x[0] - y[0], x[1] - y[1]), p));
                    }
                acc.add(cellsum.value() * (g.h(0) / ss) * (g.h(1) / ss));
            } else {
                acc.add(cc.straddle_frac_out[s] * g.cell_volume() * std::pow(r, p));
            }
        }
        acc.add(detail::beyond_window_integral(g, x, alpha));
        wf.a.values[xi] = acc.value();
    });
    return wf;
}

struct WeightEquivalence {
    double c1 = 0.0;       // |S^{n-1}| / alpha, domain independent
    bool c1_holds = true;  // a <= c1 * delta^-alpha within quadrature slack
    double c1_worst_ratio = 0.0;
    double c2_est = 0.0;   // max of delta^-alpha / a
    double slack = 1.02;
};

inline WeightEquivalence weight_equivalence_check(const DomainSpec& dom, double alpha, const Grid& g,
                                                  const WeightField* precomputed = nullptr, double slack = 1.02) {
    WeightEquivalence out;
    out.slack = slack;
    out.c1 = sphere_measure(g.dim) / alpha;
    WeightField local;
    const WeightField* wf = precomputed;
    if (!wf) {
        local = a_omega(dom, alpha, g);
        wf = &local;
    }
    const GriddedFunction dist = boundary_distance(dom, g);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        if (!wf->a.mask[i] || dist.values[i] <= 0.0) continue;
        const double bound = out.c1 * std::pow(dist.values[i], -alpha);
        out.c1_worst_ratio = std::max(out.c1_worst_ratio, wf->a.values[i] / bound);
        out.c2_est = std::max(out.c2_est, std::pow(dist.values[i], -alpha) / wf->a.values[i]);
    }
    out.c1_holds = out.c1_worst_ratio <= slack;
    return out;
}

struct MarchaudResidual {
    double max_residual = 0.0;
    double reference = 0.0;  // max |a_Omega f| over the same interior cells
    double eps = 0.0;
    int interior_cells = 0;
};

// Residual of a_Omega f = d D^alpha_eps E_Omega f - int_Omega (f(x)-f(y)) K,
// with matched truncation eps on both singular integrals. The three terms
// take independent quadrature paths; the boundary band delta < 4h is
// excluded (both sides blow up there faster than the grid resolves).
inline MarchaudResidual marchaud_decomposition_residual(const GriddedFunction& phi, const DomainSpec& dom,
                                                        double alpha, double d_coeff, double eps = 0.0,
                                                        bool use_fft = true, double band = 4.0) {
    const Grid& g = phi.grid;
    MarchaudResidual out;
    out.eps = eps > 0.0 ? eps : dom.diameter(g.dim) / 64.0;
    if (out.eps < 2.0 * g.h_max()) throw resolution_error("marchaud: eps must be >= 2h");

    const auto omega = chi_mask(dom, g);
    GriddedFunction src = phi;
    src.mask = omega;
    const GriddedFunction f = riesz_potential(extend_by_zero(src), alpha, true, use_fft);
    GriddedFunction f_om = restrict_to(f, omega);

    const GriddedFunction Dg = hypersingular_truncated(extend_by_zero(f_om), alpha, out.eps, d_coeff, use_fft);
    const WeightField wf = a_omega(dom, alpha, g, use_fft);
    const GriddedFunction dist = boundary_distance(dom, g);

    std::vector<std::size_t> om_cells;
    for (std::size_t i = 0; i < g.cell_count(); ++i)
        if (omega[i]) om_cells.push_back(i);

    const double p = -g.dim - alpha;
    const double hv = g.cell_volume();
    std::vector<double> residual(g.cell_count(), 0.0);
    std::vector<std::uint8_t> interior(g.cell_count(), 0);
    par::parallel_for(g.cell_count(), [&](std::size_t xi) {
        if (!omega[xi] || dist.values[xi] < band * g.h_max()) return;
        interior[xi] = 1;
        const Vec x = g.center(xi);
        KahanSum t3;  // plain midpoint lattice sum over Omega, |x-y| > eps
        for (const std::size_t yi : om_cells) {
            const Vec y = g.center(yi);
            const Vec d{x[0] - y[0], g.dim == 2 ? x[1] - y[1] : 0.0};
            const double r = norm2(d, g.dim);
            if (r <= out.eps) continue;
            t3.add((f.values[xi] - f.values[yi]) * std::pow(r, p) * hv);
        }
        residual[xi] = wf.a.values[xi] * f.values[xi] - d_coeff * Dg.values[xi] + t3.value();
    });
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        if (!interior[i]) continue;
        ++out.interior_cells;
        out.max_residual = std::max(out.max_residual, std::abs(residual[i]));
        out.reference = std::max(out.reference, std::abs(wf.a.values[i] * f.values[i]));
    }
    return out;
}

// A_eps phi(x) = int over {y in Omega, |x-y|>eps} of
// (I^alpha phi~(x) - I^alpha phi~(y)) / |x-y|^{n+alpha} dy on Omega cells.
inline GriddedFunction a_eps_apply(const GriddedFunction& phi, const DomainSpec& dom, double alpha, double eps,
                                   bool use_fft = true) {
    const Grid& g = phi.grid;
    if (eps < 2.0 * g.h_max() - 1e-12) throw resolution_error("a_eps_apply: eps must be >= 2h");
    const auto omega = chi_mask(dom, g);
    GriddedFunction src = phi;
    src.mask = omega;
    const GriddedFunction F = riesz_potential(extend_by_zero(src), alpha, true, use_fft);

    KernelOptions opt;
    opt.eps = eps;
    opt.eps_sharp = true;  // cell-center rule, matches the direct double sum
    opt.corr_radius = potential_correction_radius(g);
    const KernelTable table = make_power_kernel(g, -g.dim - alpha, opt);

    std::vector<double> chi(g.cell_count(), 0.0), chiF(g.cell_count(), 0.0);
    for (std::size_t i = 0; i < g.cell_count(); ++i)
        if (omega[i]) {
            chi[i] = 1.0;
            chiF[i] = F.values[i];
        }
    const std::vector<double> b = convolve(table, chi, use_fft);
    const std::vector<double> cF = convolve(table, chiF, use_fft);
    GriddedFunction out = make_function(g);
    out.mask = omega;
    for (std::size_t i = 0; i < g.cell_count(); ++i)
        if (omega[i]) out.values[i] = F.values[i] * b[i] - cF[i];
    return out;
}

struct DominationResult {
    double c_est = 0.0;        // max over phi, eps, cells of |A_eps phi| / M phi
    double c_est_extended = 0.0;
    bool uniform = false;      // stable within 10% when the ladder extends one rung down
    std::vector<double> per_eps_max;
};

inline DominationResult domination_check(const DomainSpec& dom, double alpha,
                                         const std::vector<GriddedFunction>& test_set,
                                         const std::vector<double>& eps_set, bool use_fft = true) {
    if (test_set.empty()) throw std::invalid_argument("domination_check: empty test set");
    const Grid& g = test_set.front().grid;
    std::vector<double> ladder = eps_set;
    ladder.push_back(eps_set.back() * 0.5);
    validate_epsilons(ladder, g);
    const auto omega = chi_mask(dom, g);
    const MaximalPlan plan = make_maximal_plan(dom, g);

    DominationResult out;
    out.per_eps_max.assign(ladder.size(), 0.0);
    for (const auto& phi : test_set) {
        const GriddedFunction M = maximal(phi, plan);
        for (std::size_t e = 0; e < ladder.size(); ++e) {
            const GriddedFunction A = a_eps_apply(phi, dom, alpha, ladder[e], use_fft);
            double worst = 0.0;
            for (std::size_t i = 0; i < g.cell_count(); ++i) {
                if (!omega[i] || M.values[i] <= 0.0) continue;
                worst = std::max(worst, std::abs(A.values[i]) / M.values[i]);
            }
            out.per_eps_max[e] = std::max(out.per_eps_max[e], worst);
        }
    }
    for (std::size_t e = 0; e + 1 < ladder.size(); ++e) out.c_est = std::max(out.c_est, out.per_eps_max[e]);
    out.c_est_extended = std::max(out.c_est, out.per_eps_max.back());
    out.uniform = std::abs(out.c_est_extended - out.c_est) <= 0.10 * out.c_est;
    return out;
}

}  // namespace hardylab
