#pragma once

#include <cmath>
#include <stdexcept>

#include "hardylab/exponent.hpp"
#include "hardylab/grid.hpp"

namespace hardylab {

// Modular rho_{p(.)}(f) = integral of |f(x)|^{p(x)} over the masked region
// (or the whole window). Same deterministic quadrature as integrate().
inline double modular(const GriddedFunction& f, const ExponentField& p) {
    if (!(f.grid == p.grid)) throw std::invalid_argument("modular: f and p must share a grid");
    KahanSum acc;
    const double hv = f.grid.cell_volume();
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (f.masked() && !f.mask[i]) continue;
        acc.add(std::pow(std::abs(f.values[i]), p.values[i]) * hv);
    }
    return acc.value();
}

namespace detail {
inline double modular_scaled(const GriddedFunction& f, const ExponentField& p, double lambda) {
    KahanSum acc;
    const double hv = f.grid.cell_volume();
    const double inv = 1.0 / lambda;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (f.masked() && !f.mask[i]) continue;
        acc.add(std::pow(std::abs(f.values[i]) * inv, p.values[i]) * hv);
    }
    return acc.value();
}
}  // namespace detail

// Luxemburg norm inf{lambda > 0 : rho(f/lambda) <= 1} by bisection on
// lambda; valid because lambda -> rho(f/lambda) is strictly decreasing
// where positive. Bisection rather than Newton: the derivative involves
// ln|f/lambda| and is noisy near small values.
inline double luxemburg_norm(const GriddedFunction& f, const ExponentField& p, double rel_tol = 1e-10) {
    if (!(rel_tol > 0.0) || rel_tol > 1e-3) throw std::invalid_argument("luxemburg_norm: rel_tol must be in (0, 1e-3]");
    check_finite(f, "luxemburg_norm");
    const double fmax = max_abs(f);
    if (fmax == 0.0) return 0.0;

    double vol = 0.0;
    {
        KahanSum acc;
        const double hv = f.grid.cell_volume();
        for (std::size_t i = 0; i < f.values.size(); ++i)
            if (!f.masked() || f.mask[i]) acc.add(hv);
        vol = acc.value();
    }
    const ClassPResult cls = class_p_check(p, f.mask);
    double lam = fmax * std::pow(std::max(vol, 1e-300), 1.0 / cls.p_plus);
    if (!(lam > 0.0) || !std::isfinite(lam)) lam = fmax;

    double lo = lam, hi = lam;
    if (detail::modular_scaled(f, p, lam) > 1.0) {
        for (int it = 0; it < 200 && detail::modular_scaled(f, p, hi) > 1.0; ++it) hi *= 2.0;
    } else {
        for (int it = 0; it < 200; ++it) {
            lo *= 0.5;
            if (detail::modular_scaled(f, p, lo) > 1.0) break;
            if (lo < 1e-300) return 0.0;
        }
    }
    // invariant: rho(f/lo) > 1 >= rho(f/hi)
    for (int it = 0; it < 200 && (hi - lo) > rel_tol * lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::modular_scaled(f, p, mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct ModularNormBracket {
    double norm = 0.0;
    double rho = 0.0;
    double sigma = 0.0;  // exponent on the lower side
    double theta = 0.0;  // exponent on the upper side
    double lower = 0.0;  // norm^sigma
    double upper = 0.0;  // norm^theta
    bool holds = false;
};

// ||f||^sigma <= rho(f) <= ||f||^theta with the case split on ||f|| vs 1:
// sigma = p- and theta = p+ when ||f|| >= 1, swapped when ||f|| <= 1.
inline ModularNormBracket modular_norm_bracket(const GriddedFunction& f, const ExponentField& p,
                                               double slack = 1e-12) {
    ModularNormBracket b;
    b.rho = modular(f, p);
    b.norm = luxemburg_norm(f, p, 1e-14);
    const ClassPResult cls = class_p_check(p, f.mask);
    if (b.norm >= 1.0) {
        b.sigma = cls.p_minus;
        b.theta = cls.p_plus;
    } else {
        b.sigma = cls.p_plus;
        b.theta = cls.p_minus;
    }
    b.lower = std::pow(b.norm, b.sigma);
    b.upper = std::pow(b.norm, b.theta);
    const double tol = slack * std::max({1.0, b.rho, b.lower, b.upper});
    b.holds = (b.lower <= b.rho + tol) && (b.rho <= b.upper + tol);
    return b;
}

// Discrete L^{p(.)} relative distance helper used by convergence tables.
inline double relative_lux_distance(const GriddedFunction& a, const GriddedFunction& b, const ExponentField& p,
                                    double rel_tol = 1e-8) {
    GriddedFunction diff = a;
    for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= b.values[i];
    return luxemburg_norm(diff, p, rel_tol);
}

}  // namespace hardylab
