#include <gtest/gtest.h>

#include <cmath>

#include "hardylab/calibration.hpp"
#include "hardylab/operators.hpp"
#include "hardylab/rng.hpp"

using namespace hardylab;

namespace {

Grid window1d(double a, double b, int m) { return make_grid(1, Vec{a, 0.0}, Vec{b - a, 0.0}, m); }
Grid window2d(double a, double b, int m) { return make_grid(2, Vec{a, a}, Vec{b - a, b - a}, m); }

GriddedFunction gaussian_on(const DomainSpec& dom, const Grid& g, double sigma, Vec center = {0.0, 0.0}) {
    GriddedFunction f = sample_function(g, [&](const Vec& x) {
        const double r2 = g.dim == 1 ? (x[0] - center[0]) * (x[0] - center[0])
                                     : (x[0] - center[0]) * (x[0] - center[0]) +
                                           (x[1] - center[1]) * (x[1] - center[1]);
        return std::exp(-r2 / (2.0 * sigma * sigma));
    });
    return restrict_to(f, dom);
}

// analytic d for n=1: 2 Gamma(1-a) cos(pi a / 2) / a  (Fourier symbol route)
double d1_analytic(double a) { return 2.0 * std::tgamma(1.0 - a) * std::cos(M_PI * a / 2.0) / a; }
double d2_analytic(double a) {
    const double c1 = std::tgamma(1.0 - a) * std::cos(M_PI * a / 2.0) / a;
    return 2.0 * std::sqrt(M_PI) * std::tgamma((1.0 + a) / 2.0) / std::tgamma(1.0 + a / 2.0) * c1;
}

}  // namespace

TEST(RieszPotential, ZeroAndLinearity) {
    const Grid g = window1d(-2, 2, 256);
    EXPECT_EQ(max_abs(riesz_potential(make_function(g), 0.5)), 0.0);

    Rng rng(42, "linear");
    GriddedFunction a = make_function(g), b = make_function(g);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        a.values[i] = rng.uniform(-1, 1);
        b.values[i] = rng.uniform(-1, 1);
    }
    const auto Ia = riesz_potential(a, 0.5);
    const auto Ib = riesz_potential(b, 0.5);
    GriddedFunction combo = make_function(g);
    for (std::size_t i = 0; i < combo.values.size(); ++i) combo.values[i] = 2.0 * a.values[i] - 3.0 * b.values[i];
    const auto Ic = riesz_potential(combo, 0.5);
    for (std::size_t i = 0; i < Ic.values.size(); ++i)
        EXPECT_NEAR(Ic.values[i], 2.0 * Ia.values[i] - 3.0 * Ib.values[i], 1e-11);
}

TEST(RieszPotential, IndicatorClosedForm) {
    // I^a chi_(0,1), n=1, a=1/2: (2/gamma) (sqrt(x) - sqrt(x-1)) for x > 1
    const Grid g = window1d(-2, 3, 1280);
    const auto dom = make_interval(0, 1);
    const auto chi = restrict_to(sample_function(g, [](const Vec&) { return 1.0; }), dom);
    const auto pot = riesz_potential(chi, 0.5);
    const double gam = gamma_n(1, 0.5);
    for (const double target : {2.0, 1.7, 2.5}) {
        const auto i = static_cast<std::size_t>((target - g.origin[0]) / g.h(0));
        const double x = g.center(i)[0];
        const double exact = 2.0 * (std::sqrt(x) - std::sqrt(x - 1.0)) / gam;
        EXPECT_NEAR(pot.values[i], exact, 1e-4);
    }
}

TEST(RieszPotential, FastPathMatchesDirect) {
    const Grid g1 = window1d(-1, 1, 64);
    Rng rng(7, "fftdirect");
    GriddedFunction f = make_function(g1);
    for (auto& v : f.values) v = rng.uniform(-1, 1);
    const auto fast = riesz_potential(f, 0.4, true, true);
    const auto direct = riesz_potential(f, 0.4, true, false);
    for (std::size_t i = 0; i < fast.values.size(); ++i) EXPECT_NEAR(fast.values[i], direct.values[i], 1e-10);

    const Grid g2 = window2d(-1, 1, 24);
    GriddedFunction f2 = make_function(g2);
    for (auto& v : f2.values) v = rng.uniform(-1, 1);
    const auto fast2 = riesz_potential(f2, 0.6, true, true);
    const auto direct2 = riesz_potential(f2, 0.6, true, false);
    for (std::size_t i = 0; i < fast2.values.size(); ++i) EXPECT_NEAR(fast2.values[i], direct2.values[i], 1e-10);
}

TEST(Hypersingular, ConstantDifferencePartVanishes) {
    // for f = c the difference part drops out; what remains is exactly the
    // zero-extension boundary mass, checked against an independent sum
    const Grid g = window1d(-2, 2, 128);
    const double c = 1.7, alpha = 0.5, eps = 4.0 * g.h(0), d = d1_analytic(alpha);
    const auto f = sample_function(g, [&](const Vec&) { return c; });
    const auto D = hypersingular_truncated(f, alpha, eps, d);

    KernelOptions opt;
    opt.eps = eps;
    opt.with_tail = true;
    const KernelTable t = make_power_kernel(g, -1.0 - alpha, opt);
    for (const std::size_t xi : {std::size_t{64}, std::size_t{32}, std::size_t{100}}) {
        KahanSum boundary;  // offsets whose source cell x-o lies outside the lattice
        for (long o = -(g.m - 1); o <= g.m - 1; ++o) {
            const long src = static_cast<long>(xi) - o;
            if (src < 0 || src >= g.m) boundary.add(t.at(o));
        }
        EXPECT_NEAR(D.values[xi], c * (boundary.value() + t.tail) / d, 1e-10);
    }
    EXPECT_THROW(hypersingular_truncated(f, alpha, 0.5 * g.h(0), d), resolution_error);
}

TEST(Hypersingular, LinearityAndFastPath) {
    const Grid g = window1d(-2, 2, 96);
    Rng rng(9, "hyplin");
    GriddedFunction a = make_function(g), b = make_function(g);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        a.values[i] = rng.uniform(-1, 1);
        b.values[i] = rng.uniform(-1, 1);
    }
    const double alpha = 0.6, eps = 6.0 * g.h(0), d = d1_analytic(alpha);
    const auto Da = hypersingular_truncated(a, alpha, eps, d);
    const auto Db = hypersingular_truncated(b, alpha, eps, d);
    GriddedFunction combo = make_function(g);
    for (std::size_t i = 0; i < combo.values.size(); ++i) combo.values[i] = 1.5 * a.values[i] + 0.5 * b.values[i];
    const auto Dc = hypersingular_truncated(combo, alpha, eps, d);
    for (std::size_t i = 0; i < Dc.values.size(); ++i)
        EXPECT_NEAR(Dc.values[i], 1.5 * Da.values[i] + 0.5 * Db.values[i], 1e-9);

    const auto direct = hypersingular_truncated(a, alpha, eps, d, false);
    for (std::size_t i = 0; i < direct.values.size(); ++i) EXPECT_NEAR(Da.values[i], direct.values[i], 1e-10);
}

TEST(Calibration, MatchesFourierSymbolN1) {
    for (const double a : {0.25, 0.5, 0.75}) {
        const CalibrationReport rep = d_calibration_report(1, a);
        EXPECT_LT(rep.drift, 0.01);
        EXPECT_NEAR(rep.d, d1_analytic(a), 0.01 * d1_analytic(a)) << "alpha=" << a;
    }
}

TEST(Calibration, MatchesFourierSymbolN2) {
    const CalibrationReport rep = d_calibration_report(2, 0.5);
    EXPECT_LT(rep.drift, 0.01);
    EXPECT_NEAR(rep.d, d2_analytic(0.5), 0.015 * d2_analytic(0.5));
}

TEST(Calibration, CachedAndGuarded) {
    const double d1 = d_coefficient(1, 0.5);
    EXPECT_GT(d1, 0.0);
    EXPECT_DOUBLE_EQ(d_coefficient(1, 0.5), d1);
    EXPECT_THROW(d_coefficient(1, 0.5, 2), std::range_error);
}

TEST(Inversion, GaussianBumpCriterion) {
    const Grid g = window1d(-2, 2, 2048);
    const auto dom = make_interval(-1, 1);
    const auto phi = gaussian_on(dom, g, 0.15);
    const auto p = make_constant_exponent(g, 2.0);
    const double h = g.h(0);
    const double d = d_coefficient(1, 0.5);
    const InversionResult res = inversion_error(phi, 0.5, p, {8 * h, 4 * h, 2 * h}, d);
    EXPECT_LT(res.final_error, 0.05);
    EXPECT_TRUE(res.strictly_decreasing);
}

TEST(Inversion, ZeroGuardAndJointRefinement) {
    const Grid g = window1d(-2, 2, 512);
    const auto p = make_constant_exponent(g, 2.0);
    const auto zero = make_function(g);
    const InversionResult rz = inversion_error(zero, 0.5, p, {8 * g.h(0), 4 * g.h(0)}, 5.0);
    EXPECT_EQ(rz.final_error, 0.0);

    // joint (m, 1/eps) refinement on a fast-decaying probe: error drops
    const auto dom = make_interval(-1, 1);
    const double d = d_coefficient(1, 0.5);
    double prev = 0.0;
    for (int k = 0; k < 2; ++k) {
        const Grid gk = window1d(-2, 2, 1024 << k);
        const auto probe = restrict_to(sample_function(gk,
                                                       [](const Vec& x) {
                                                           const double q = x[0] * x[0] / (2.0 * 0.35 * 0.35);
                                                           return (1.0 - 2.0 * q) * std::exp(-q);
                                                       }),
                                       dom);
        const auto pk = make_constant_exponent(gk, 2.0);
        const InversionResult r = inversion_error(probe, 0.5, pk, {2 * gk.h(0)}, d);
        if (k > 0) {
            EXPECT_LT(r.final_error, prev);
        }
        prev = r.final_error;
    }
}

TEST(DerivativeLadder, SmoothConvergesJumpStalls) {
    const Grid g = window1d(-2, 2, 1024);
    const auto dom = make_interval(-1, 1);
    const double h = g.h(0), alpha = 0.5;
    const double d = d_coefficient(1, alpha);
    const auto p = make_constant_exponent(g, 2.0);

    const auto smooth = riesz_potential(extend_by_zero(gaussian_on(dom, g, 0.2)), alpha);
    const DerivativeLadder ok = riesz_derivative(smooth, alpha, {32 * h, 16 * h, 8 * h, 4 * h, 2 * h}, p, d);
    EXPECT_TRUE(ok.converged);
    for (std::size_t i = 1; i < ok.distances.size(); ++i) EXPECT_LT(ok.distances[i], ok.distances[i - 1]);

    const auto jump = restrict_to(sample_function(g, [](const Vec& x) { return x[0] > 0.2 ? 1.0 : 0.0; }), dom);
    const DerivativeLadder bad =
        riesz_derivative(extend_by_zero(jump), alpha, {32 * h, 16 * h, 8 * h, 4 * h, 2 * h}, p, d);
    EXPECT_FALSE(bad.converged);

    // scaling f -> 2f doubles every table entry
    GriddedFunction twice = smooth;
    for (auto& v : twice.values) v *= 2.0;
    const DerivativeLadder scaled = riesz_derivative(twice, alpha, {32 * h, 16 * h, 8 * h, 4 * h, 2 * h}, p, d);
    for (std::size_t i = 0; i < scaled.distances.size(); ++i)
        EXPECT_NEAR(scaled.distances[i], 2.0 * ok.distances[i], 2e-6 * std::max(1.0, ok.distances[i]));
}

TEST(Maximal, ConstantAndLowerBoundAndSublinear) {
    const Grid g = window2d(-2, 2, 48);
    const auto dom = make_ball(Vec{0, 0}, 1.0);
    const auto plan = make_maximal_plan(dom, g);

    const auto c = restrict_to(sample_function(g, [](const Vec&) { return 3.25; }), dom);
    const auto Mc = maximal(c, plan);
    for (std::size_t i = 0; i < Mc.values.size(); ++i)
        if (Mc.mask[i]) EXPECT_NEAR(Mc.values[i], 3.25, 1e-9);

    Rng rng(11, "maximal");
    GriddedFunction a = make_function(g), b = make_function(g);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        a.values[i] = rng.uniform(-2, 2);
        b.values[i] = rng.uniform(-2, 2);
    }
    const auto ra = restrict_to(a, dom);
    const auto rb = restrict_to(b, dom);
    const auto Ma = maximal(ra, plan);
    const auto Mb = maximal(rb, plan);
    GriddedFunction sum = ra;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += rb.values[i];
    const auto Ms = maximal(sum, plan);
    for (std::size_t i = 0; i < Ma.values.size(); ++i) {
        if (!Ma.mask[i]) continue;
        EXPECT_GE(Ma.values[i] + 1e-12, std::abs(ra.values[i]));
        EXPECT_LE(Ms.values[i], Ma.values[i] + Mb.values[i] + 1e-9);
    }
}

TEST(ExtendedGrid, EmbedAligns) {
    const Grid g = window1d(-2, 2, 64);
    const Grid e = detail::extended_grid(g, 3);
    EXPECT_EQ(e.m, 192);
    EXPECT_NEAR(e.origin[0], -6.0, 1e-14);
    EXPECT_NEAR(e.h(0), g.h(0), 1e-16);
    const auto f = sample_function(g, [](const Vec& x) { return x[0]; });
    const auto fe = detail::embed(f, e);
    const auto win = detail::window_mask_in(g, e);
    for (std::size_t i = 0; i < fe.values.size(); ++i) {
        if (win[i]) {
            EXPECT_NEAR(fe.values[i], e.center(i)[0], 1e-13);
        } else {
            EXPECT_EQ(fe.values[i], 0.0);
        }
    }
}
