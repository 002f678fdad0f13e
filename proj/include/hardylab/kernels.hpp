#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hardylab/common.hpp"

namespace hardylab {

// gamma_n(alpha) = 2^alpha pi^{n/2} Gamma(alpha/2) / Gamma((n-alpha)/2).
inline double gamma_n(int n, double alpha) {
    if (!(alpha > 0.0) || !(alpha < n)) throw std::range_error("gamma_n: requires 0 < alpha < n");
    return std::pow(2.0, alpha) * std::pow(M_PI, 0.5 * n) * std::tgamma(0.5 * alpha) /
           std::tgamma(0.5 * (n - alpha));
}

// Riesz kernel k_alpha(x) = |x|^{alpha-n} / gamma_n(alpha).
inline double riesz_kernel(int n, double alpha, const Vec& x) {
    const double r = norm2(x, n);
    if (r == 0.0) throw singularity_error("riesz_kernel: x = 0");
    return std::pow(r, alpha - n) / gamma_n(n, alpha);
}

inline double binomial(int l, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (l - k + i) / i;
    return c;
}

struct KernelParams {
    int n = 1;
    double alpha = 0.5;
    int ell = 1;
    double d_coeff = 0.0;  // d_{n,ell}(alpha), calibrated (see calibration.hpp)
};

// k_{ell,alpha}(x): the non-centered difference of the Riesz kernel with
// step e1, (1/gamma) sum_k (-1)^k C(ell,k) |x - k e1|^{alpha-n}.
inline double diff_kernel_e1(int n, double alpha, int ell, const Vec& x) {
    const double g = gamma_n(n, alpha);
    KahanSum s;
    for (int k = 0; k <= ell; ++k) {
        Vec d{x[0] - k, n == 2 ? x[1] : 0.0};
        const double r = norm2(d, n);
        if (r < 1e-14) throw singularity_error("diff_kernel_e1: x hits a stencil node");
        s.add((k % 2 == 0 ? 1.0 : -1.0) * binomial(ell, k) * std::pow(r, alpha - n));
    }
    return s.value() / g;
}

// Delta_{ell,alpha}(x,h) = (Delta^ell_h k_alpha)(x), computed directly.
inline double diff_kernel(int n, double alpha, int ell, const Vec& x, const Vec& h) {
    KahanSum s;
    for (int k = 0; k <= ell; ++k) {
        Vec d{x[0] - k * h[0], n == 2 ? x[1] - k * h[1] : 0.0};
        const double r = norm2(d, n);
        if (r < 1e-14) throw singularity_error("diff_kernel: x hits a stencil node");
        s.add((k % 2 == 0 ? 1.0 : -1.0) * binomial(ell, k) * std::pow(r, alpha - n) / gamma_n(n, alpha));
    }
    return s.value();
}

// Rotation form |h|^{alpha-n} k_{ell,alpha}((|x|/|h|^2) rot_x^{-1} h) with
// rot_x e1 = x/|x|; used as an independent route in identity tests.
inline double diff_kernel_rotation_form(int n, double alpha, int ell, const Vec& x, const Vec& h) {
    const double rx = norm2(x, n);
    const double rh = norm2(h, n);
    if (rx == 0.0 || rh == 0.0) throw singularity_error("diff_kernel_rotation_form: zero argument");
    Vec arg{0.0, 0.0};
    if (n == 1) {
        const double sign = x[0] > 0 ? 1.0 : -1.0;
        arg[0] = (rx / (rh * rh)) * sign * h[0];
    } else {
        // rot_x columns: (x/|x|, x_perp/|x|); rot^{-1} = transpose
        const double c = x[0] / rx, s = x[1] / rx;
        arg[0] = (rx / (rh * rh)) * (c * h[0] + s * h[1]);
        arg[1] = (rx / (rh * rh)) * (-s * h[0] + c * h[1]);
    }
    return std::pow(rh, alpha - n) * diff_kernel_e1(n, alpha, ell, arg);
}

namespace detail {

// Budget-limited quadrature of integral over B(center, R) of k_{ell,alpha}.
// Additive split over the stencil terms: each node inside the ball gets a
// surrounding ball W_k whose own singular term integrates exactly by the
// radial primitive; everything else is composite midpoint (1-D) or a
// ray-segment polar rule around the ball center (2-D).
struct KernelBallQuad {
    int n;
    double alpha;
    int ell;
    Vec center;
    double R;
    long quad_m;

    double node_coef(int k) const { return (k % 2 == 0 ? 1.0 : -1.0) * binomial(ell, k); }

    double sum_excluding(const Vec& y, int skip) const {
        // stencil sum without node `skip`, no gamma factor
        KahanSum s;
        for (int k = 0; k <= ell; ++k) {
            if (k == skip) continue;
            Vec d{y[0] - k, n == 2 ? y[1] : 0.0};
            s.add(node_coef(k) * std::pow(norm2(d, n), alpha - n));
        }
        return s.value();
    }

    double full_sum(const Vec& y) const { return sum_excluding(y, -1); }

    double run() const {
        const double g = gamma_n(n, alpha);
        std::vector<int> inside;           // nodes strictly inside the ball
        std::vector<double> rho(static_cast<std::size_t>(ell) + 1, 0.0);
        for (int k = 0; k <= ell; ++k) {
            Vec d{k - center[0], n == 2 ? -center[1] : 0.0};
            const double clearance = R - norm2(d, n);
            if (clearance > 1e-9) {
                inside.push_back(k);
                // per-node radii deliberately unequal: a partition that mirrors
                // the kernel's antisymmetry would cancel its own quadrature
                // error and report a hollow zero
                const double factor = 0.45 - 0.08 * (k % 2) - 0.02 * (k % 3);
                rho[static_cast<std::size_t>(k)] = factor * std::min({1.0, clearance});
            }
        }
        KahanSum total;
        // node balls
        for (const int k : inside) {
            const double rk = rho[static_cast<std::size_t>(k)];
            // own singular term, exact
            total.add(node_coef(k) * sphere_measure(n) * std::pow(rk, alpha) / alpha);
            // remaining smooth terms by midpoint
            if (n == 1) {
                const long mw = std::max<long>(16, quad_m / (4 * (ell + 1)));
                const double hw = 2.0 * rk / static_cast<double>(mw);
                for (long i = 0; i < mw; ++i) {
                    const Vec y{k - rk + (static_cast<double>(i) + 0.5) * hw, 0.0};
                    total.add(sum_excluding(y, k) * hw);
                }
            } else {
                const long mr = std::max<long>(8, static_cast<long>(std::sqrt(static_cast<double>(quad_m) / (4.0 * (ell + 1)))));
                const long mt = mr;
                const double hr = rk / static_cast<double>(mr);
                const double ht = 2.0 * M_PI / static_cast<double>(mt);
                for (long it = 0; it < mt; ++it) {
                    const double th = (static_cast<double>(it) + 0.5) * ht;
                    const double c = std::cos(th), s = std::sin(th);
                    for (long ir = 0; ir < mr; ++ir) {
                        const double r = (static_cast<double>(ir) + 0.5) * hr;
                        const Vec y{k + r * c, r * s};
                        total.add(sum_excluding(y, k) * r * hr * ht);
                    }
                }
            }
        }
        // the rest of the ball
        if (n == 1) {
            const double a = center[0] - R, b = center[0] + R;
            std::vector<std::pair<double, double>> segs{{a, b}};
            for (const int k : inside) {
                const double rk = rho[static_cast<std::size_t>(k)];
                std::vector<std::pair<double, double>> next;
                for (auto [lo, hi] : segs) {
                    const double cl = std::max(lo, k - rk), ch = std::min(hi, k + rk);
                    if (cl >= ch) {
                        next.emplace_back(lo, hi);
                        continue;
                    }
                    if (lo < cl) next.emplace_back(lo, cl);
                    if (ch < hi) next.emplace_back(ch, hi);
                }
                segs = std::move(next);
            }
            const double target = 2.0 * R / static_cast<double>(std::max<long>(quad_m, 16));
            for (auto [lo, hi] : segs) {
                const long cells = std::max<long>(4, static_cast<long>(std::ceil((hi - lo) / target)));
                const double hw = (hi - lo) / static_cast<double>(cells);
                for (long i = 0; i < cells; ++i) {
                    const Vec y{lo + (static_cast<double>(i) + 0.5) * hw, 0.0};
                    total.add(full_sum(y) * hw);
                }
            }
        } else {
            const long mt = std::max<long>(16, static_cast<long>(std::sqrt(static_cast<double>(quad_m))));
            const long mr = mt;
            const double ht = 2.0 * M_PI / static_cast<double>(mt);
            const double target = R / static_cast<double>(mr);
            for (long it = 0; it < mt; ++it) {
                const double th = (static_cast<double>(it) + 0.5) * ht;
                const double ux = std::cos(th), uy = std::sin(th);
                // ray segments [0,R] minus node-ball crossings
                std::vector<std::pair<double, double>> segs{{0.0, R}};
                for (const int k : inside) {
                    const double rk = rho[static_cast<std::size_t>(k)];
                    // |center + t u - k e1|^2 = rk^2
                    const double bx = center[0] - k, by = center[1];
                    const double B = bx * ux + by * uy;
                    const double C = bx * bx + by * by - rk * rk;
                    const double disc = B * B - C;
                    if (disc <= 0.0) continue;
                    const double t0 = -B - std::sqrt(disc), t1 = -B + std::sqrt(disc);
                    std::vector<std::pair<double, double>> next;
                    for (auto [lo, hi] : segs) {
                        const double cl = std::max(lo, t0), ch = std::min(hi, t1);
                        if (cl >= ch) {
                            next.emplace_back(lo, hi);
                            continue;
                        }
                        if (lo < cl) next.emplace_back(lo, cl);
                        if (ch < hi) next.emplace_back(ch, hi);
                    }
                    segs = std::move(next);
                }
                for (auto [lo, hi] : segs) {
                    const long cells = std::max<long>(2, static_cast<long>(std::ceil((hi - lo) / target)));
                    const double hr = (hi - lo) / static_cast<double>(cells);
                    for (long ir = 0; ir < cells; ++ir) {
                        const double r = lo + (static_cast<double>(ir) + 0.5) * hr;
                        const Vec y{center[0] + r * ux, center[1] + r * uy};
                        total.add(full_sum(y) * r * hr * ht);
                    }
                }
            }
        }
        return total.value() / g;
    }
};

}  // namespace detail

inline double kernel_ball_integral(int n, double alpha, int ell, const Vec& center, double R, long quad_m) {
    if (!(R > 0.0)) throw std::range_error("kernel_ball_integral: radius must be positive");
    detail::KernelBallQuad q{n, alpha, ell, center, R, quad_m};
    return q.run();
}

// |quadrature of integral over the shifted ball B((ell/2)e1, N) of k_{ell,alpha}|.
// The exact value is zero for odd ell with the non-centered difference.
inline double cancellation_residual(int n, double alpha, int ell, double N, long quad_m = 1L << 14) {
    if (ell % 2 == 0) throw std::domain_error("cancellation_residual: shifted-ball identity needs odd ell");
    if (!(N > 0.0)) throw std::range_error("cancellation_residual: N must be positive");
    return std::abs(kernel_ball_integral(n, alpha, ell, Vec{0.5 * ell, 0.0}, N, quad_m));
}

// Truncation of the whole-space cancellation at radius R (any ell > alpha);
// expected to decay like R^{alpha - ell}.
inline double whole_space_residual(int n, double alpha, int ell, double R, long quad_m = 1L << 14) {
    if (!(R > ell + 1)) throw std::range_error("whole_space_residual: R must exceed ell+1");
    return std::abs(kernel_ball_integral(n, alpha, ell, Vec{0.5 * ell, 0.0}, R, quad_m));
}

struct DecayCheck {
    double c_fit = 0.0;        // max of |k| (1+|x|)^{n+ell-alpha} over samples
    double slope = 0.0;        // log-log regression slope
    double slope_target = 0.0; // alpha - n - ell
    bool holds = false;
};

// Decay bound |k_{ell,alpha}(x)| <= c (1+|x|)^{alpha-n-ell} for |x| >= ell+1.
// Samples along e1 at log-spaced radii; the regression abscissa is the
// distance to the stencil midpoint (ell/2)e1, where the asymptotics live.
inline DecayCheck decay_check(int n, double alpha, int ell, int samples = 48, double r_lo = 2.0,
                              double r_hi = 50.0) {
    if (!(r_lo >= ell + 1)) throw std::domain_error("decay_check: samples must satisfy |x| >= ell+1");
    DecayCheck out;
    out.slope_target = alpha - n - ell;
    std::vector<double> lx, ly;
    for (int i = 0; i < samples; ++i) {
        const double t = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
        const double r = r_lo * std::pow(r_hi / r_lo, t);
        const Vec x{r, 0.0};
        const double v = std::abs(diff_kernel_e1(n, alpha, ell, x));
        out.c_fit = std::max(out.c_fit, v * std::pow(1.0 + r, n + ell - alpha));
        lx.push_back(std::log(r - 0.5 * ell));
        ly.push_back(std::log(v));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    out.slope = sxy / sxx;
    out.holds = std::isfinite(out.c_fit) && out.c_fit > 0.0;
    return out;
}

// Averaged kernel script-K(r) = (1/(d r^n)) integral over |y|<r of k_{ell,alpha}.
inline double script_K(int n, double alpha, int ell, double r, double d_coeff, long quad_m = 1L << 14) {
    if (!(r > 0.0)) throw std::range_error("script_K: r must be positive");
    for (int k = 1; k <= ell; ++k)
        if (std::abs(r - k) < 1e-9) throw singularity_error("script_K: radius touches a stencil node");
    const double I = kernel_ball_integral(n, alpha, ell, Vec{0.0, 0.0}, r, quad_m);
    return I / (d_coeff * std::pow(r, n));
}

}  // namespace hardylab
