#include <gtest/gtest.h>

#include <cmath>

#include "hardylab/domain.hpp"
#include "hardylab/grid.hpp"
#include "hardylab/rng.hpp"

using namespace hardylab;

namespace {

Grid window1d(double a, double b, int m) { return make_grid(1, Vec{a, 0.0}, Vec{b - a, 0.0}, m); }
Grid window2d(double a, double b, int m) { return make_grid(2, Vec{a, a}, Vec{b - a, b - a}, m); }

}  // namespace

TEST(Grid, InvariantsEnforced) {
    EXPECT_THROW(make_grid(1, Vec{0, 0}, Vec{1, 0}, 4), validation_error);
    EXPECT_THROW(make_grid(3, Vec{0, 0}, Vec{1, 1}, 16), validation_error);
    EXPECT_THROW(make_grid(1, Vec{0, 0}, Vec{-1, 0}, 16), validation_error);
    const Grid g = window1d(-2, 2, 16);
    EXPECT_DOUBLE_EQ(g.h(0), 0.25);
    EXPECT_EQ(g.cell_count(), 16u);
    EXPECT_DOUBLE_EQ(g.center(0)[0], -1.875);
}

TEST(ChiMask, IntervalCenters) {
    // interval (-1,1) on window (-2,2), m=4: centers -1.5,-0.5,0.5,1.5
    const Grid g = window1d(-2, 2, 8);
    const auto dom = make_interval(-1, 1);
    // m=8 version keeps the same pattern which we spot check at m=4 centers
    const Grid g4 = Grid{1, {-2, 0}, {4, 0}, 4};
    const auto mask = chi_mask(dom, g4);
    EXPECT_EQ(mask[0], 0);
    EXPECT_EQ(mask[1], 1);
    EXPECT_EQ(mask[2], 1);
    EXPECT_EQ(mask[3], 0);
    (void)g;
}

TEST(ChiMask, BallCenterAndUnion) {
    const Grid g = window2d(-2, 2, 32);
    const auto ball = make_ball(Vec{0, 0}, 1.0);
    const auto mask = chi_mask(ball, g);
    // the cell containing the origin is inside
    std::size_t center_cell = g.flat(16, 16);
    EXPECT_EQ(mask[center_cell], 1);

    const auto two = make_union({make_ball(Vec{-0.8, 0}, 0.4), make_ball(Vec{0.8, 0}, 0.4)});
    const auto mu = chi_mask(two, g);
    const auto ma = chi_mask(two.parts[0], g);
    const auto mb = chi_mask(two.parts[1], g);
    for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_EQ(mu[i], ma[i] || mb[i] ? 1 : 0);
}

TEST(ChiMask, ContainmentError) {
    const Grid g = window1d(-1, 1, 16);
    EXPECT_THROW(chi_mask(make_interval(-2, 0.5), g), containment_error);
}

TEST(ChiMask, IdempotentUnderSelfUnion) {
    const Grid g = window2d(-2, 2, 16);
    const auto ball = make_ball(Vec{0.1, -0.2}, 0.9);
    EXPECT_EQ(chi_mask(ball, g), chi_mask(make_union({ball, ball}), g));
}

TEST(BoundaryDistance, ClosedForms) {
    const Grid g = window1d(-2, 2, 1024);
    const auto dom = make_interval(-1, 1);
    const auto d = boundary_distance(dom, g);
    // at the cell nearest x=0
    const std::size_t i0 = 512;  // center at -2 + (512.5)*h, h=4/1024 -> x=0.001953..
    const double x = g.center(i0)[0];
    EXPECT_NEAR(d.values[i0], 1.0 - std::abs(x), 1e-14);

    const Grid g2 = window2d(-2, 2, 64);
    const auto ball = make_ball(Vec{0, 0}, 1.0);
    const auto db = boundary_distance(ball, g2);
    for (std::size_t i = 0; i < db.values.size(); ++i) {
        if (!db.mask[i]) continue;
        const Vec c = g2.center(i);
        EXPECT_NEAR(db.values[i], 1.0 - std::hypot(c[0], c[1]), 1e-13);
    }
}

TEST(BoundaryDistance, TransformAgainstBruteForce) {
    // union shape: compare two-pass transform vs brute force over boundary
    // cells; max gap <= h*sqrt(n)
    const Grid g = window2d(-2, 2, 64);
    const auto dom = make_union({make_ball(Vec{-0.7, 0.1}, 0.55), make_ball(Vec{0.6, -0.2}, 0.7)});
    const auto mask = chi_mask(dom, g);
    const auto bd = detail::boundary_cells(g, mask);
    const auto d = boundary_distance(dom, g);
    const double h = g.h_max();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        double brute = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < mask.size(); ++j) {
            if (!bd[j]) continue;
            const Vec a = g.center(i), b = g.center(j);
            brute = std::min(brute, std::hypot(a[0] - b[0], a[1] - b[1]));
        }
        EXPECT_LE(std::abs(d.values[i] - brute), h * std::sqrt(2.0) + 1e-12);
    }
}

TEST(BoundaryDistance, NonNegativeAndVanishingNearBoundary) {
    const Grid g = window2d(-2, 2, 48);
    const auto dom = make_annulus(Vec{0, 0}, 0.4, 1.1);
    const auto d = boundary_distance(dom, g);
    const double h = g.h_max();
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (!d.mask[i]) continue;
        EXPECT_GE(d.values[i], 0.0);
        const Vec c = g.center(i);
        const double r = std::hypot(c[0], c[1]);
        const double truth = std::min(r - 0.4, 1.1 - r);
        if (truth < h) EXPECT_LE(d.values[i], truth + h * std::sqrt(2.0));
    }
}

TEST(ExtendRestrict, RoundTripAndSupport) {
    const Grid g = window1d(-2, 2, 64);
    const auto dom = make_interval(-1, 1);
    GriddedFunction f = sample_function(g, [](const Vec& x) { return std::cos(x[0]); });
    f = restrict_to(f, dom);
    const GriddedFunction ext = extend_by_zero(f);
    EXPECT_TRUE(ext.mask.empty());
    for (std::size_t i = 0; i < ext.values.size(); ++i) {
        if (f.mask[i])
            EXPECT_EQ(ext.values[i], f.values[i]);
        else
            EXPECT_EQ(ext.values[i], 0.0);
    }
    const GriddedFunction back = restrict_to(ext, dom);
    EXPECT_EQ(back.values, f.values);
    // integral preserved under zero extension
    EXPECT_DOUBLE_EQ(integrate(ext), integrate(f));
}

TEST(ExtendRestrict, ConstantOne) {
    const Grid g = window1d(-2, 2, 32);
    const auto dom = make_interval(-1, 1);
    GriddedFunction one = sample_function(g, [](const Vec&) { return 1.0; });
    const auto f = restrict_to(one, dom);
    const auto ext = extend_by_zero(f);
    for (std::size_t i = 0; i < ext.values.size(); ++i)
        EXPECT_EQ(ext.values[i], f.mask[i] ? 1.0 : 0.0);
}

TEST(Integrate, ExactForConstants) {
    for (int m : {16, 100, 1024}) {
        const Grid g = window1d(-1, 1, m);
        const GriddedFunction one = sample_function(g, [](const Vec&) { return 1.0; });
        EXPECT_NEAR(integrate(one), 2.0, 1e-13);
    }
}

TEST(Integrate, OddSymmetry) {
    const Grid g = window1d(-1, 1, 256);
    const GriddedFunction f = sample_function(g, [](const Vec& x) { return x[0]; });
    EXPECT_NEAR(integrate(f), 0.0, 1e-15);
}

TEST(Integrate, MidpointQuadraticOracle) {
    // f(x)=x^2 on (0,1), m=1024 -> 1/3 within 1e-6 (midpoint error h^2/24 * int |f''|)
    const Grid g = make_grid(1, Vec{0, 0}, Vec{1, 0}, 1024);
    const GriddedFunction f = sample_function(g, [](const Vec& x) { return x[0] * x[0]; });
    EXPECT_NEAR(integrate(f), 1.0 / 3.0, 1e-6);
}

TEST(Integrate, LinearAndMonotoneAndSecondOrder) {
    const Grid g = window1d(-1, 1, 128);
    const GriddedFunction f = sample_function(g, [](const Vec& x) { return std::exp(x[0]); });
    const GriddedFunction h = sample_function(g, [](const Vec& x) { return 1.0 + std::sin(x[0]); });
    GriddedFunction lin = f;
    for (std::size_t i = 0; i < lin.values.size(); ++i) lin.values[i] = 2.0 * f.values[i] + 3.0 * h.values[i];
    EXPECT_NEAR(integrate(lin), 2.0 * integrate(f) + 3.0 * integrate(h), 1e-12);
    // monotone
    EXPECT_LE(integrate(f), integrate([&] {
                  GriddedFunction b = f;
                  for (auto& v : b.values) v += 0.5;
                  return b;
              }()));
    // observed order >= 2 on a smooth integrand
    const double truth = std::exp(1.0) - std::exp(-1.0);
    double prev_err = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int m = 64 << k;
        const Grid gk = window1d(-1, 1, m);
        const double err = std::abs(integrate(sample_function(gk, [](const Vec& x) { return std::exp(x[0]); })) - truth);
        if (k > 0) EXPECT_LE(err, prev_err / 3.5);
        prev_err = err;
    }
}

TEST(Strichartz, ConvexAndUnionAndAnnulus) {
    const Grid g1 = window1d(-2, 2, 64);
    EXPECT_EQ(strichartz_count(make_interval(-1, 1), g1, 0), 1);

    const Grid g2 = window2d(-2, 2, 64);
    EXPECT_EQ(strichartz_count(make_box(Vec{-1, -1}, Vec{1, 1}), g2, 0), 1);
    EXPECT_EQ(strichartz_count(make_box(Vec{-1, -1}, Vec{1, 1}), g2, 1), 1);

    const auto two = make_union({make_ball(Vec{-0.9, 0}, 0.5), make_ball(Vec{0.9, 0}, 0.5)});
    EXPECT_EQ(strichartz_count(two, g2, 0), 2);

    const auto ann = make_annulus(Vec{0, 0}, 0.4, 1.2);
    EXPECT_EQ(strichartz_count(ann, g2, 0), 2);
    EXPECT_EQ(strichartz_count(ann, g2, 1), 2);
}

TEST(Margin, RuleEnforced) {
    const auto dom = make_interval(-1, 1);  // diam 2, need margin 0.5
    EXPECT_NO_THROW(require_margin(dom, window1d(-2, 2, 16)));
    EXPECT_NO_THROW(require_margin(dom, window1d(-1.5, 1.5, 16)));
    EXPECT_THROW(require_margin(dom, window1d(-1.2, 1.2, 16)), containment_error);
}

TEST(Csv, RowMajorLexicographic) {
    const Grid g = window2d(0, 1, 8);
    const GriddedFunction f = sample_function(g, [](const Vec& x) { return x[0] + 10 * x[1]; });
    std::ostringstream os;
    to_csv(f, os);
    std::istringstream is(os.str());
    std::string header, first, second;
    std::getline(is, header);
    std::getline(is, first);
    std::getline(is, second);
    EXPECT_EQ(header, "x1,x2,value");
    // second row advances x2 (the fast axis)
    EXPECT_NE(first, second);
    EXPECT_EQ(first.substr(0, first.find(',')), second.substr(0, second.find(',')));
}

TEST(Rng, DeterministicStreams) {
    Rng a(42, "stream");
    Rng b(42, "stream");
    Rng c(42, "other");
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    bool differs = false;
    Rng a2(42, "stream");
    for (int i = 0; i < 100; ++i) differs = differs || a2.next_u64() != c.next_u64();
    EXPECT_TRUE(differs);
    Rng u(7, "u");
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}
