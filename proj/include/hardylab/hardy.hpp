#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hardylab/rng.hpp"
#include "hardylab/weights.hpp"

namespace hardylab {

// Admissibility of the fractional order: 0 < alpha < min(1, n/p+).
inline bool alpha_admissible(const ExponentField& p, int n, double alpha,
                             const std::vector<std::uint8_t>& region = {}) {
    const ClassPResult cls = class_p_check(p, region);
    if (!cls.in_class) return false;
    return alpha > 0.0 && alpha < std::min(1.0, static_cast<double>(n) / cls.p_plus);
}

// Probe functions for the inequality. Boundary-concentrated spikes are the
// stress direction: the Hardy weight degenerates at the boundary.
struct TestFamily {
    enum class Kind { bumps, slabs, spikes, mixed };
    Kind kind = Kind::mixed;
    int count = 8;
    std::uint64_t seed = 42;
};

struct FamilyMember {
    GriddedFunction f;
    std::string descriptor;
    Vec center{0.0, 0.0};
    double width = 0.0;
    bool parametric = false;  // bump-shaped, eligible for greedy perturbation
};

namespace detail {

inline double bump_profile(double u2) {
    // smooth, compactly supported: exp(1 - 1/(1-u^2)) for |u|<1
    if (u2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u2));
}

inline GriddedFunction bump_function(const Grid& g, const std::vector<std::uint8_t>& omega, const Vec& c,
                                     double w) {
    GriddedFunction f = make_function(g);
    f.mask = omega;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (!omega[i]) continue;
        const Vec x = g.center(i);
        Vec d{(x[0] - c[0]) / w, g.dim == 2 ? (x[1] - c[1]) / w : 0.0};
        const double u2 = d[0] * d[0] + d[1] * d[1];
        f.values[i] = bump_profile(u2);
    }
    return f;
}

inline Vec random_interior_point(const DomainSpec& dom, const Grid& g, Rng& rng) {
    const BBox b = dom.bbox(g.dim);
    for (int tries = 0; tries < 4096; ++tries) {
        Vec x{rng.uniform(b.lo[0], b.hi[0]), g.dim == 2 ? rng.uniform(b.lo[1], b.hi[1]) : 0.0};
        if (dom.contains(x, g.dim)) return x;
    }
    throw std::runtime_error("test family: could not sample an interior point");
}

inline FamilyMember make_bump_member(const DomainSpec& dom, const Grid& g, const std::vector<std::uint8_t>& omega,
                                     Rng& rng, bool boundary_spike) {
    const double diam = dom.diameter(g.dim);
    FamilyMember m;
    m.parametric = true;
    for (int tries = 0; tries < 256; ++tries) {
        m.center = random_interior_point(dom, g, rng);
        if (!boundary_spike) {
            m.width = rng.uniform(0.05, 0.25) * diam;
            break;
        }
        // spike: hug the boundary
        const auto d = dom.exact_boundary_distance(m.center, g.dim);
        const double dist = d ? *d : 0.1 * diam;
        if (dist > 0.15 * diam) continue;
        m.width = std::max(2.5 * g.h_max(), 0.8 * dist);
        break;
    }
    if (m.width == 0.0) m.width = std::max(2.5 * g.h_max(), 0.05 * diam);
    m.f = bump_function(g, omega, m.center, m.width);
    m.descriptor = boundary_spike ? "spike" : "bump";
    return m;
}

inline FamilyMember make_slab_member(const DomainSpec& dom, const Grid& g, const std::vector<std::uint8_t>& omega,
                                     Rng& rng) {
    const BBox b = dom.bbox(g.dim);
    FamilyMember m;
    m.descriptor = "slab";
    Vec lo{0.0, 0.0}, hi{0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        const double c0 = rng.uniform(b.lo[i], b.hi[i]);
        const double c1 = rng.uniform(b.lo[i], b.hi[i]);
        lo[i] = std::min(c0, c1);
        hi[i] = std::max(c0, c1) + 2.0 * g.h(a);  // at least a couple of cells
    }
    m.f = make_function(g);
    m.f.mask = omega;
    for (std::size_t i = 0; i < m.f.values.size(); ++i) {
        if (!omega[i]) continue;
        const Vec x = g.center(i);
        bool in = true;
        for (int a = 0; a < g.dim; ++a) {
            const auto ia = static_cast<std::size_t>(a);
            in = in && x[ia] >= lo[ia] && x[ia] <= hi[ia];
        }
        m.f.values[i] = in ? 1.0 : 0.0;
    }
    m.center = Vec{0.5 * (lo[0] + hi[0]), g.dim == 2 ? 0.5 * (lo[1] + hi[1]) : 0.0};
    m.width = 0.5 * norm2(Vec{hi[0] - lo[0], g.dim == 2 ? hi[1] - lo[1] : 0.0}, g.dim);
    return m;
}

}  // namespace detail

inline std::vector<FamilyMember> generate_family(const TestFamily& spec, const DomainSpec& dom, const Grid& g) {
    const auto omega = chi_mask(dom, g);
    Rng rng(spec.seed, "test-family");
    std::vector<FamilyMember> out;
    for (int k = 0; k < spec.count; ++k) {
        TestFamily::Kind kind = spec.kind;
        if (kind == TestFamily::Kind::mixed) {
            const int pick = static_cast<int>(rng.uniform_int(0, 3));
            kind = pick == 0   ? TestFamily::Kind::bumps
                   : pick == 1 ? TestFamily::Kind::slabs
                   : pick == 2 ? TestFamily::Kind::spikes
                               : TestFamily::Kind::mixed;
        }
        FamilyMember m;
        switch (kind) {
            case TestFamily::Kind::bumps:
                m = detail::make_bump_member(dom, g, omega, rng, false);
                break;
            case TestFamily::Kind::slabs:
                m = detail::make_slab_member(dom, g, omega, rng);
                break;
            case TestFamily::Kind::spikes:
                m = detail::make_bump_member(dom, g, omega, rng, true);
                break;
            case TestFamily::Kind::mixed: {
                // random two-term mixture
                FamilyMember a = detail::make_bump_member(dom, g, omega, rng, false);
                FamilyMember b = detail::make_bump_member(dom, g, omega, rng, true);
                const double ca = rng.uniform(0.5, 2.0), cb = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
                m = a;
                for (std::size_t i = 0; i < m.f.values.size(); ++i)
                    m.f.values[i] = ca * a.f.values[i] + cb * b.f.values[i];
                m.descriptor = "mixture";
                m.parametric = false;
                break;
            }
        }
        if (max_abs(m.f) == 0.0) {
            --k;  // resample; a member must not vanish identically
            continue;
        }
        out.push_back(std::move(m));
    }
    return out;
}

enum class HardyWeight { delta, a_omega_weight };

struct HardyRatio {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct HardyRow {
    int member_id = 0;
    std::string kind;
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};

struct HardyReport {
    std::vector<HardyRow> rows;
    double c_est = 0.0;  // lower-bound estimate of the Hardy constant
    std::string argmax_descriptor;
    int greedy_rounds_used = 0;
    double alpha = 0.0;
    std::string weight;
};

// Shared precomputations for a (domain, grid, p, alpha, weight) campaign.
struct HardyContext {
    DomainSpec domain;
    Grid grid;
    ExponentField p;
    double alpha = 0.0;
    HardyWeight weight = HardyWeight::delta;
    std::vector<std::uint8_t> omega;
    GriddedFunction weight_field;  // delta^-alpha or a_Omega on Omega cells
    bool use_fft = true;
};

inline HardyContext make_hardy_context(const DomainSpec& dom, const Grid& g, const ExponentField& p, double alpha,
                                       HardyWeight w, bool use_fft = true) {
    HardyContext ctx{dom, g, p, alpha, w, chi_mask(dom, g), {}, use_fft};
    if (!alpha_admissible(p, g.dim, alpha, ctx.omega))
        throw validation_error("hardy: alpha must satisfy 0 < alpha < min(1, n/p_plus)");
    if (w == HardyWeight::delta) {
        const GriddedFunction dist = boundary_distance(dom, g);
        ctx.weight_field = make_function(g);
        ctx.weight_field.mask = ctx.omega;
        for (std::size_t i = 0; i < dist.values.size(); ++i)
            if (ctx.omega[i]) ctx.weight_field.values[i] = std::pow(dist.values[i], -alpha);
    } else {
        ctx.weight_field = a_omega(dom, alpha, g, use_fft).a;
    }
    return ctx;
}

// Hardy ratio ||w(x) * int_Omega phi(y) |x-y|^{alpha-n} dy||_{p(.)} / ||phi||_{p(.)}
// (the inequality's potential carries no gamma factor).
inline HardyRatio hardy_ratio(const GriddedFunction& phi, const HardyContext& ctx) {
    GriddedFunction member = phi;
    member.mask = ctx.omega;
    const double rhs = luxemburg_norm(member, ctx.p, 1e-8);
    if (rhs == 0.0) throw std::invalid_argument("hardy_ratio: test function vanishes on Omega");
    GriddedFunction pot = riesz_potential(extend_by_zero(member), ctx.alpha, /*normalize=*/false, ctx.use_fft);
    pot.mask = ctx.omega;
    for (std::size_t i = 0; i < pot.values.size(); ++i)
        pot.values[i] = ctx.omega[i] ? pot.values[i] * ctx.weight_field.values[i] : 0.0;
    const double lhs = luxemburg_norm(pot, ctx.p, 1e-8);
    return HardyRatio{lhs, rhs, lhs / rhs};
}

// Family sweep plus greedy refinement: the worst member is pushed toward
// the boundary and sharpened for a fixed number of rounds; the result is a
// credible lower envelope of the constant, never a certified sup.
inline HardyReport estimate_hardy_constant(const HardyContext& ctx, const TestFamily& family_spec,
                                           int greedy_rounds = 10) {
    const auto family = generate_family(family_spec, ctx.domain, ctx.grid);
    HardyReport rep;
    rep.alpha = ctx.alpha;
    rep.weight = ctx.weight == HardyWeight::delta ? "delta" : "a_omega";
    int worst = -1;
    for (std::size_t k = 0; k < family.size(); ++k) {
        const HardyRatio r = hardy_ratio(family[k].f, ctx);
        rep.rows.push_back(HardyRow{static_cast<int>(k), family[k].descriptor, r.lhs, r.rhs, r.ratio});
        if (r.ratio > rep.c_est) {
            rep.c_est = r.ratio;
            rep.argmax_descriptor = family[k].descriptor;
            worst = static_cast<int>(k);
        }
    }
    if (worst < 0) return rep;

    // greedy perturbation of the worst member (as a bump descriptor)
    Vec center = family[static_cast<std::size_t>(worst)].center;
    double width = family[static_cast<std::size_t>(worst)].width;
    if (width <= 0.0) width = 0.1 * ctx.domain.diameter(ctx.grid.dim);
    const GriddedFunction dist = boundary_distance(ctx.domain, ctx.grid);
    for (int round = 0; round < greedy_rounds; ++round) {
        ++rep.greedy_rounds_used;
        // proposal 1: translate 30% toward the nearest boundary point
        Vec toward = center;
        if (auto np = ctx.domain.nearest_point(Vec{center[0] + 10.0 * ctx.domain.diameter(ctx.grid.dim), center[1]},
                                               ctx.grid.dim);
            ctx.domain.kind == DomainSpec::Kind::ball && np) {
            toward = *np;
        } else {
            // nearest boundary cell from the distance transform field
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ctx.grid.cell_count(); ++i) {
                if (!ctx.omega[i]) continue;
                const Vec y = ctx.grid.center(i);
                Vec d{y[0] - center[0], ctx.grid.dim == 2 ? y[1] - center[1] : 0.0};
                const double score = dist.values[i] * 4.0 + norm2(d, ctx.grid.dim);
                if (score < best) {
                    best = score;
                    toward = y;
                }
            }
        }
        const Vec moved{center[0] + 0.3 * (toward[0] - center[0]),
                        ctx.grid.dim == 2 ? center[1] + 0.3 * (toward[1] - center[1]) : 0.0};
        const double sharpened = std::max(2.0 * ctx.grid.h_max(), 0.7 * width);

        bool improved = false;
        for (int prop = 0; prop < 2; ++prop) {
            const Vec c_try = prop == 0 ? moved : center;
            const double w_try = prop == 0 ? width : sharpened;
            if (!ctx.domain.contains(c_try, ctx.grid.dim)) continue;
            GriddedFunction cand = detail::bump_function(ctx.grid, ctx.omega, c_try, w_try);
            if (max_abs(cand) == 0.0) continue;
            const HardyRatio r = hardy_ratio(cand, ctx);
            if (r.ratio > rep.c_est) {
                rep.c_est = r.ratio;
                rep.argmax_descriptor = "greedy";
                center = c_try;
                width = w_try;
                improved = true;
            }
        }
        if (!improved) {
            // keep sharpening even without improvement; stop once at floor
            if (width <= 2.0 * ctx.grid.h_max() + 1e-15) break;
            width = sharpened;
        }
    }
    return rep;
}

struct MultiplierResult {
    double c_est = 0.0;             // max over the family at the finest eps
    std::vector<double> per_eps_c;  // per ladder rung
    bool eps_stable = false;        // last rung within 10% of the previous
    std::vector<HardyRow> rows;
};

// The (alpha, p(.))-property estimate: per member,
// ||D^alpha_eps(chi_Omega I^alpha E_Omega phi)||_{p(.),Omega} / ||phi||_{p(.),Omega}.
inline MultiplierResult multiplier_property_test(const DomainSpec& dom, const Grid& g, const ExponentField& p,
                                                 double alpha, const TestFamily& family_spec,
                                                 const std::vector<double>& eps_ladder, double d_coeff,
                                                 bool use_fft = true) {
    const auto omega = chi_mask(dom, g);
    if (!alpha_admissible(p, g.dim, alpha, omega))
        throw validation_error("multiplier_property_test: alpha must satisfy 0 < alpha < min(1, n/p_plus)");
    validate_epsilons(eps_ladder, g);
    const auto family = generate_family(family_spec, dom, g);

    MultiplierResult out;
    out.per_eps_c.assign(eps_ladder.size(), 0.0);
    for (std::size_t k = 0; k < family.size(); ++k) {
        GriddedFunction member = family[k].f;
        member.mask = omega;
        const double rhs = luxemburg_norm(member, p, 1e-8);
        if (rhs == 0.0) continue;
        GriddedFunction u = riesz_potential(extend_by_zero(member), alpha, true, use_fft);
        const GriddedFunction g_fn = extend_by_zero(restrict_to(u, omega));  // chi_Omega * I^alpha
        double finest = 0.0;
        for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
            GriddedFunction D = hypersingular_truncated(g_fn, alpha, eps_ladder[e], d_coeff, use_fft);
            D.mask = omega;
            for (std::size_t i = 0; i < D.values.size(); ++i)
                if (!omega[i]) D.values[i] = 0.0;
            const double val = luxemburg_norm(D, p, 1e-8) / rhs;
            out.per_eps_c[e] = std::max(out.per_eps_c[e], val);
            if (e + 1 == eps_ladder.size()) finest = val;
        }
        out.rows.push_back(HardyRow{static_cast<int>(k), family[k].descriptor, finest * rhs, rhs, finest});
        out.c_est = std::max(out.c_est, finest);
    }
    if (out.per_eps_c.size() >= 2) {
        const double a = out.per_eps_c[out.per_eps_c.size() - 2];
        const double b = out.per_eps_c.back();
        out.eps_stable = std::abs(b - a) <= 0.10 * std::max(a, b);
    }
    return out;
}

struct StrichartzReport {
    int count = 0;  // max over axes of the line-component count
    HardyReport hardy;
};

// Corollary check at constant exponent: requires 1 < p < 1/alpha.
inline StrichartzReport strichartz_corollary_check(const DomainSpec& dom, const Grid& g, double p_const,
                                                   double alpha, const TestFamily& family_spec,
                                                   bool use_fft = true) {
    if (!(p_const > 1.0) || !(p_const < 1.0 / alpha))
        throw std::range_error("strichartz_corollary_check: requires 1 < p < 1/alpha");
    StrichartzReport rep;
    for (int axis = 0; axis < g.dim; ++axis) rep.count = std::max(rep.count, strichartz_count(dom, g, axis));
    const ExponentField p = make_constant_exponent(g, p_const);
    const HardyContext ctx = make_hardy_context(dom, g, p, alpha, HardyWeight::delta, use_fft);
    rep.hardy = estimate_hardy_constant(ctx, family_spec);
    return rep;
}

}  // namespace hardylab
