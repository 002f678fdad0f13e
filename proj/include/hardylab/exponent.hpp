#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hardylab/domain.hpp"
#include "hardylab/grid.hpp"
#include "hardylab/rng.hpp"

namespace hardylab {

// Variable exponent p(x) sampled at cell centers. Exponent expressions are
// evaluated once at construction; no symbolic manipulation.
struct ExponentField {
    Grid grid;
    std::vector<double> values;
};

struct ClassPResult {
    double p_minus = 0.0;
    double p_plus = 0.0;
    bool in_class = false;  // 1 < p_minus and p_plus < inf
};

inline ExponentField make_constant_exponent(const Grid& g, double value) {
    return ExponentField{g, std::vector<double>(g.cell_count(), value)};
}

template <class Fn>
ExponentField sample_exponent(const Grid& g, Fn&& fn) {
    ExponentField p{g, std::vector<double>(g.cell_count(), 0.0)};
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = fn(g.center(i));
    return p;
}

inline ClassPResult class_p_check(const ExponentField& p, const std::vector<std::uint8_t>& region = {}) {
    ClassPResult r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), false};
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        if (!region.empty() && !region[i]) continue;
        r.p_minus = std::min(r.p_minus, p.values[i]);
        r.p_plus = std::max(r.p_plus, p.values[i]);
    }
    r.in_class = r.p_minus > 1.0 && std::isfinite(r.p_plus);
    return r;
}

struct LogConditionResult {
    double c_est = 0.0;   // max over sampled pairs of |p(x)-p(y)| * (-ln|x-y|)
    bool satisfied = false;
    std::size_t pairs_used = 0;
};

// Sampled estimate of the log-condition modulus over pairs with
// 0 < |x-y| <= 1/2. Always finite on a grid; the value is what matters,
// tracked across refinements.
inline LogConditionResult log_condition_check(const ExponentField& p, std::size_t pair_budget = 100000,
                                              std::uint64_t seed = 42, const std::vector<std::uint8_t>& region = {}) {
    if (pair_budget < 10000) throw validation_error("log_condition_check: pair_budget must be >= 10^4");
    std::vector<std::size_t> cells;
    cells.reserve(p.values.size());
    for (std::size_t i = 0; i < p.values.size(); ++i)
        if (region.empty() || region[i]) cells.push_back(i);
    LogConditionResult out;
    if (cells.size() < 2) return out;
    Rng rng(seed, "log-condition");
    const Grid& g = p.grid;
    std::size_t tries = 0;
    while (out.pairs_used < pair_budget && tries < pair_budget * 8) {
        ++tries;
        const std::size_t a = cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cells.size()) - 1))];
        const std::size_t b = cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cells.size()) - 1))];
        if (a == b) continue;
        const Vec xa = g.center(a), xb = g.center(b);
        Vec d{xa[0] - xb[0], g.dim == 2 ? xa[1] - xb[1] : 0.0};
        const double r = norm2(d, g.dim);
        if (r > 0.5 || r <= 0.0) continue;
        ++out.pairs_used;
        out.c_est = std::max(out.c_est, std::abs(p.values[a] - p.values[b]) * (-std::log(r)));
    }
    out.satisfied = std::isfinite(out.c_est);
    return out;
}

// Pointwise conjugate exponent p' with 1/p + 1/p' = 1.
inline ExponentField conjugate(const ExponentField& p) {
    ExponentField out{p.grid, p.values};
    for (auto& v : out.values) {
        if (!(v > 1.0)) throw std::domain_error("conjugate: exponent must exceed 1 everywhere");
        v = v / (v - 1.0);
    }
    return out;
}

// Sobolev exponent q with 1/q = 1/p - alpha/n.
inline ExponentField sobolev_exponent(const ExponentField& p, double alpha, int n) {
    const ClassPResult cls = class_p_check(p);
    if (!(cls.p_plus < n / alpha)) throw std::range_error("sobolev_exponent: requires p_plus < n/alpha");
    ExponentField out{p.grid, p.values};
    for (auto& v : out.values) v = 1.0 / (1.0 / v - alpha / n);
    return out;
}

struct RegularExtension {
    ExponentField field;       // identity on Omega cells, clamped outside
    double log_modulus_omega = 0.0;
    double log_modulus_window = 0.0;
    double inflation_factor = 1.0;
};

// Nearest-point extension of p from Omega to the window. Preserves the
// exact range [p-, p+] since outside values are copies of inside values.
inline RegularExtension regular_extension(const ExponentField& p, const DomainSpec& dom,
                                          std::uint64_t seed = 42) {
    const Grid& g = p.grid;
    const auto omega = chi_mask(dom, g);
    RegularExtension out;
    out.field = ExponentField{g, p.values};

    std::vector<std::int32_t> nearest;
    std::vector<double> dist;
    detail::distance_transform(g, omega, nearest, dist);
    for (std::size_t i = 0; i < out.field.values.size(); ++i) {
        if (omega[i]) continue;
        if (nearest[i] < 0) throw containment_error("regular_extension: domain mask is empty");
        out.field.values[i] = p.values[static_cast<std::size_t>(nearest[i])];
    }
    out.log_modulus_omega = log_condition_check(p, 100000, seed, omega).c_est;
    out.log_modulus_window = log_condition_check(out.field, 100000, seed).c_est;
    out.inflation_factor = out.log_modulus_omega > 0.0 ? out.log_modulus_window / out.log_modulus_omega : 1.0;
    return out;
}

}  // namespace hardylab
