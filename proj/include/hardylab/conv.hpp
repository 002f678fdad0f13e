#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "hardylab/fft.hpp"
#include "hardylab/grid.hpp"

namespace hardylab {

// Lattice weights w(o) over offsets o in [-(m-1), m-1]^dim approximating
// integral over the offset cell of |u|^p du. One-dimensional entries are exact
// primitives; two-dimensional entries are midpoint values with Gauss-Legendre
// corrections inside a fixed physical radius, a polar-exact self cell, and
// optional truncation at |u| > eps with sub-cell shell fractions.
struct KernelTable {
    int dim = 1;
    int m = 0;
    double h0 = 0.0, h1 = 0.0;
    double p = 0.0;
    double eps = 0.0;
    std::vector<double> w;  // (2m-1)^dim
    double sum = 0.0;       // deterministic sum of all weights
    double tail = 0.0;      // analytic integral beyond the offset box (if requested)

    long side() const { return 2L * m - 1; }
    std::size_t idx(long oi, long oj = 0) const {
        const long c = m - 1;
        return dim == 1 ? static_cast<std::size_t>(oi + c)
                        : static_cast<std::size_t>((oi + c) * side() + (oj + c));
    }
    double at(long oi, long oj = 0) const { return w[idx(oi, oj)]; }
};

namespace detail {

// int_lo^hi |u|^p du for p != -1; valid across 0 only when p > -1.
inline double primitive_abs_pow(double lo, double hi, double p) {
    const double q = p + 1.0;
    auto F = [q](double t) {
        if (t == 0.0) return 0.0;
        const double s = t > 0.0 ? 1.0 : -1.0;
        return s * std::pow(std::abs(t), q) / q;
    };
    return F(hi) - F(lo);
}

// 1-D cell integral restricted to |u| > eps.
inline double cell_integral_1d_cut(double lo, double hi, double p, double eps) {
    double s = 0.0;
    if (hi > eps) s += primitive_abs_pow(std::max(lo, eps), hi, p);
    if (lo < -eps) s += primitive_abs_pow(lo, std::min(hi, -eps), p);
    return s;
}

inline double gl_cell_integral_2d(double ox, double oy, double hx, double hy, double p) {
    // 12-point Gauss-Legendre per axis; the singularity is outside the cell.
    static const double gx[12] = {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
                                  -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
                                  0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
                                  0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
    static const double gw[12] = {0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
                                  0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
                                  0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                                  0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    double acc = 0.0;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            const double x = ox + 0.5 * hx * gx[i];
            const double y = oy + 0.5 * hy * gx[j];
            acc += gw[i] * gw[j] * std::pow(std::hypot(x, y), p);
        }
    return acc * 0.25 * hx * hy;
}

// Square self cell of |u|^p, p > -2: exact in the radial direction.
inline double self_cell_integral_2d(double hx, double hy, double p) {
    const long nth = 2048;
    KahanSum acc;
    for (long i = 0; i < nth; ++i) {
        const double th = (static_cast<double>(i) + 0.5) * (2.0 * M_PI / nth);
        const double R = 0.5 * std::min(hx / std::max(std::abs(std::cos(th)), 1e-300),
                                        hy / std::max(std::abs(std::sin(th)), 1e-300));
        acc.add(std::pow(R, p + 2.0) / (p + 2.0));
    }
    return acc.value() * (2.0 * M_PI / nth);
}

inline double shell_cell_integral_2d(double ox, double oy, double hx, double hy, double p, double eps) {
    const int s = 24;
    KahanSum acc;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            const double x = ox + ((i + 0.5) / s - 0.5) * hx;
            const double y = oy + ((j + 0.5) / s - 0.5) * hy;
            const double r = std::hypot(x, y);
            if (r > eps) acc.add(std::pow(r, p));
        }
    return acc.value() * (hx / s) * (hy / s);
}

// Integral of |u|^p beyond the centered box [-B0,B0]x[-B1,B1], p < -2:
// polar-exact in r, arcs split at the corner directions.
inline double beyond_box_integral_2d(double B0, double B1, double p) {
    const double q = -(p + 2.0);
    const double corner = std::atan2(B1, B0);
    const double arcs[4][2] = {{-corner, corner},
                               {corner, M_PI - corner},
                               {M_PI - corner, M_PI + corner},
                               {M_PI + corner, 2.0 * M_PI - corner}};
    KahanSum acc;
    const long nth = 512;
    for (const auto& a : arcs) {
        const double w = (a[1] - a[0]) / nth;
        for (long i = 0; i < nth; ++i) {
            const double th = a[0] + (static_cast<double>(i) + 0.5) * w;
            const double R = std::min(B0 / std::max(std::abs(std::cos(th)), 1e-300),
                                      B1 / std::max(std::abs(std::sin(th)), 1e-300));
            acc.add(std::pow(R, -q) / q * w);
        }
    }
    return acc.value();
}

}  // namespace detail

struct KernelOptions {
    bool self_cell = false;     // include the exact o = 0 cell integral (p > -dim)
    double corr_radius = 0.0;   // physical radius of corrected 2-D weights
    double eps = 0.0;           // truncate to |u| > eps (0: no truncation)
    bool eps_sharp = false;     // center-rule truncation instead of shell fractions
    bool with_tail = false;     // compute the beyond-box analytic integral
};

inline KernelTable make_power_kernel(const Grid& g, double p, const KernelOptions& opt = {}) {
    KernelTable t;
    t.dim = g.dim;
    t.m = g.m;
    t.h0 = g.h(0);
    t.h1 = g.dim == 2 ? g.h(1) : 0.0;
    t.p = p;
    t.eps = opt.eps;
    const long side = t.side();
    const long c = t.m - 1;

    if (g.dim == 1) {
        t.w.assign(static_cast<std::size_t>(side), 0.0);
        for (long oi = -c; oi <= c; ++oi) {
            const double o = static_cast<double>(oi) * t.h0;
            const double lo = o - 0.5 * t.h0, hi = o + 0.5 * t.h0;
            double v;
            if (oi == 0) {
                v = opt.self_cell ? detail::primitive_abs_pow(lo, hi, p) : 0.0;
                if (opt.eps > 0.0) v = 0.0;
            } else if (opt.eps > 0.0) {
                v = opt.eps_sharp ? (std::abs(o) > opt.eps ? detail::primitive_abs_pow(lo, hi, p) : 0.0)
                                  : detail::cell_integral_1d_cut(lo, hi, p, opt.eps);
            } else {
                v = detail::primitive_abs_pow(lo, hi, p);
            }
            t.w[t.idx(oi)] = v;
        }
        if (opt.with_tail) {
            const double B = (static_cast<double>(t.m) - 0.5) * t.h0;
            t.tail = 2.0 * std::pow(B, p + 1.0) / (-(p + 1.0));
        }
    } else {
        t.w.assign(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), 0.0);
        const double hd = 0.5 * std::hypot(t.h0, t.h1);
        for (long oi = -c; oi <= c; ++oi)
            for (long oj = -c; oj <= c; ++oj) {
                const double ox = static_cast<double>(oi) * t.h0;
                const double oy = static_cast<double>(oj) * t.h1;
                const double r = std::hypot(ox, oy);
                double v;
                if (oi == 0 && oj == 0) {
                    v = opt.self_cell && opt.eps == 0.0 ? detail::self_cell_integral_2d(t.h0, t.h1, p) : 0.0;
                } else if (r <= opt.corr_radius && (opt.eps == 0.0 || r > opt.eps + hd)) {
                    v = detail::gl_cell_integral_2d(ox, oy, t.h0, t.h1, p);
                } else {
                    v = t.h0 * t.h1 * std::pow(r, p);
                }
                if (opt.eps > 0.0 && !(oi == 0 && oj == 0)) {
                    if (opt.eps_sharp) {
                        if (r <= opt.eps) v = 0.0;
                    } else {
                        if (r <= opt.eps - hd)
                            v = 0.0;
                        else if (r < opt.eps + hd)
                            v = detail::shell_cell_integral_2d(ox, oy, t.h0, t.h1, p, opt.eps);
                    }
                }
                t.w[t.idx(oi, oj)] = v;
            }
        if (opt.with_tail) {
            const double B0 = (static_cast<double>(t.m) - 0.5) * t.h0;
            const double B1 = (static_cast<double>(t.m) - 0.5) * t.h1;
            t.tail = detail::beyond_box_integral_2d(B0, B1, p);
        }
    }
    KahanSum s;
    for (const double v : t.w) s.add(v);
    t.sum = s.value();
    return t;
}

// Spectrum of a kernel padded for linear convolution on the m^dim lattice.
struct PreparedKernel {
    int dim = 1;
    int m = 0;
    long L0 = 0, L1 = 0;
    std::vector<std::complex<double>> spectrum;
};

inline PreparedKernel prepare_kernel(const KernelTable& t) {
    PreparedKernel pk;
    pk.dim = t.dim;
    pk.m = t.m;
    const long side = t.side();
    pk.L0 = fftw::next_fast_size(static_cast<long>(t.m) + side - 1);
    pk.L1 = t.dim == 2 ? pk.L0 : 1;
    pk.spectrum.assign(static_cast<std::size_t>(pk.L0) * static_cast<std::size_t>(pk.L1), {0.0, 0.0});
    if (t.dim == 1) {
        for (long i = 0; i < side; ++i) pk.spectrum[static_cast<std::size_t>(i)] = t.w[static_cast<std::size_t>(i)];
    } else {
        for (long i = 0; i < side; ++i)
            for (long j = 0; j < side; ++j)
                pk.spectrum[static_cast<std::size_t>(i * pk.L1 + j)] =
                    t.w[static_cast<std::size_t>(i * side + j)];
    }
    fftw::Engine::instance().transform(pk.spectrum, pk.L0, pk.L1, FFTW_FORWARD);
    return pk;
}

// out(x) = sum_o w(o) f(x - o), f extended by zero beyond the lattice.
inline std::vector<double> convolve_fft(const PreparedKernel& pk, const std::vector<double>& f) {
    std::vector<std::complex<double>> F(pk.spectrum.size(), {0.0, 0.0});
    const long m = pk.m;
    if (pk.dim == 1) {
        for (long i = 0; i < m; ++i) F[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)];
    } else {
        for (long i = 0; i < m; ++i)
            for (long j = 0; j < m; ++j)
                F[static_cast<std::size_t>(i * pk.L1 + j)] = f[static_cast<std::size_t>(i * m + j)];
    }
    auto& eng = fftw::Engine::instance();
    eng.transform(F, pk.L0, pk.L1, FFTW_FORWARD);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= pk.spectrum[i];
    eng.transform(F, pk.L0, pk.L1, FFTW_BACKWARD);
    const double scale = 1.0 / (static_cast<double>(pk.L0) * static_cast<double>(pk.L1));
    std::vector<double> out(f.size(), 0.0);
    const long off = m - 1;
    if (pk.dim == 1) {
        for (long x = 0; x < m; ++x) out[static_cast<std::size_t>(x)] = F[static_cast<std::size_t>(x + off)].real() * scale;
    } else {
        for (long x = 0; x < m; ++x)
            for (long y = 0; y < m; ++y)
                out[static_cast<std::size_t>(x * m + y)] =
                    F[static_cast<std::size_t>((x + off) * pk.L1 + (y + off))].real() * scale;
    }
    return out;
}

// Reference path: plain nested loops, deterministic order.
inline std::vector<double> convolve_direct(const KernelTable& t, const std::vector<double>& f) {
    const long m = t.m;
    std::vector<double> out(f.size(), 0.0);
    if (t.dim == 1) {
        for (long x = 0; x < m; ++x) {
            KahanSum acc;
            for (long y = 0; y < m; ++y) acc.add(t.at(x - y) * f[static_cast<std::size_t>(y)]);
            out[static_cast<std::size_t>(x)] = acc.value();
        }
    } else {
        for (long xi = 0; xi < m; ++xi)
            for (long xj = 0; xj < m; ++xj) {
                KahanSum acc;
                for (long yi = 0; yi < m; ++yi)
                    for (long yj = 0; yj < m; ++yj)
                        acc.add(t.at(xi - yi, xj - yj) * f[static_cast<std::size_t>(yi * m + yj)]);
                out[static_cast<std::size_t>(xi * m + xj)] = acc.value();
            }
    }
    return out;
}

inline std::vector<double> convolve(const KernelTable& t, const std::vector<double>& f, bool use_fft = true) {
    if (!use_fft) return convolve_direct(t, f);
    return convolve_fft(prepare_kernel(t), f);
}

}  // namespace hardylab
