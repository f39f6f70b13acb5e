#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "doubling/atlas.hpp"

using namespace doubling;

namespace {

CVector pt(Complex a, Complex b) {
    CVector z(2);
    z << a, b;
    return z;
}

Atlas hyperbola_atlas(double e) {
    AtlasConfig cfg;
    cfg.singular_points = {CVector::Zero(2)};
    return build_atlas(parse_poly("z1*z2", 2), e * e, 1.0, std::sqrt(2.0) * e, cfg);
}

class HyperbolaAtlas : public ::testing::Test {
protected:
    static void SetUpTestSuite() { atlas_ = new Atlas(hyperbola_atlas(0.1)); }
    static void TearDownTestSuite() {
        delete atlas_;
        atlas_ = nullptr;
    }
    static Atlas* atlas_;
};
Atlas* HyperbolaAtlas::atlas_ = nullptr;

}  // namespace

TEST(Constants, FaithfulGamma) {
    EXPECT_DOUBLE_EQ(faithful_gamma(2, 2, 1.0), 38401.0);
    EXPECT_DOUBLE_EQ(faithful_gamma(2, 2, 2.0), 19201.0);
    for (int n = 2; n <= 4; ++n)
        EXPECT_NEAR(faithful_gamma(n, 3, n * 81.0), 600.0 * std::sqrt(2.0 * n * (n - 1)) + 1.0, 1e-9);
}

TEST(Constants, KappaBound) {
    EXPECT_NEAR(log_C1(2, 2), 4.0 * std::log(512000.0), 1e-12);
    EXPECT_DOUBLE_EQ(C2(2, 2), 768000.0);
    double a = kappa_bound(2, 2, 1.0, 0.01), b = kappa_bound(2, 2, 1.0, 0.005);
    EXPECT_NEAR(b - a, std::pow(512000.0, 4), 1e-9 * b);
    // K delta = C2: the log term vanishes; beyond it the bound is clamped at 0
    EXPECT_EQ(kappa_bound(2, 2, 1536000.0, 0.5), 0.0);
    EXPECT_EQ(kappa_bound(2, 2, 1536000.0, 0.75), 0.0);
    EXPECT_GT(kappa_bound(2, 2, 32.0, 0.999), 0.0);
}

TEST(Poincare, Examples) {
    EXPECT_NEAR(poincare_distance(0.0, 0.3), std::log(1.3 / 0.7), 1e-15);
    EXPECT_NEAR(poincare_distance(0.0, 0.3), 0.619, 1e-3);
    EXPECT_EQ(poincare_distance(Complex(0.2, 0.1), Complex(0.2, 0.1)), 0.0);
    EXPECT_NEAR(poincare_distance(Complex(0.1, 0.2), Complex(-0.3, 0.05)),
                poincare_distance(Complex(-0.3, 0.05), Complex(0.1, 0.2)), 1e-15);
}

TEST(Projection, LandsOnLevel) {
    PolyC P = normalized(parse_poly("z1^2 + z2^2", 2));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 100; ++s) {
        CVector z = pt(Complex(u(rng), u(rng)), Complex(u(rng), u(rng)));
        auto y = project_to_level(P, 0.005, z);
        ASSERT_TRUE(y.has_value());
        EXPECT_LE(std::abs(P(*y) - 0.005), 1e-12);
    }
}

TEST(Faithful, BudgetRefusal) {
    AtlasConfig cfg;
    cfg.mode = AtlasMode::faithful;
    cfg.singular_points = {CVector::Zero(2)};
    EXPECT_THROW(build_atlas(parse_poly("z1*z2", 2), 0.01, 1.0, 0.1414, cfg), BudgetExceeded);
}

TEST(Faithful, AdjacentCubeChartsOverlap) {
    // deep face-adjacent cubes where 12 R stays below the implicit-function radius
    PolyC P = parse_poly("z1*z2", 2);
    const double c = 0.01;
    CVector y0 = pt(0.5, c / 0.5);
    const double theta = chart_radius(P.eval_grad(y0).grad.norm(), markov_M(P), 2);
    const int s = 18;
    ASSERT_LE(12.0 * 2.0 * std::ldexp(1.0, -s), theta);
    RVector x = realify(y0);
    std::vector<std::int32_t> base(4);
    for (int i = 0; i < 4; ++i) base[i] = static_cast<std::int32_t>(std::floor((x[i] + 1.0) / std::ldexp(2.0, -s)));
    std::vector<SubCube> cubes{{s, base}};
    for (int i = 0; i < 4; ++i) {
        auto nb = base;
        nb[i] += 1;
        cubes.push_back({s, nb});
        std::vector<std::int32_t> fine(4);
        for (int j = 0; j < 4; ++j) fine[j] = 2 * base[j];
        fine[i] = 2 * base[i] - 1;  // level s+1 cube across the lower face
        cubes.push_back({s + 1, fine});
    }
    std::vector<AtlasChart> charts;
    AtlasConfig cfg;
    for (std::size_t k = 0; k < cubes.size(); ++k) {
        auto b = project_to_level(P, c, complexify(cubes[k].center()));
        ASSERT_TRUE(b.has_value());
        charts.push_back(
            make_atlas_chart(P, c, *b, k, cubes[k].level, cubes[k].radius(), AtlasMode::faithful, cfg));
        EXPECT_DOUBLE_EQ(charts.back().scale, 12.0 * cubes[k].radius());
    }
    Atlas atlas = Atlas::from_charts(P, c, charts, AtlasMode::faithful, 0.1);
    for (std::size_t k = 1; k < cubes.size(); ++k) EXPECT_GE(rho_lower_bound(atlas, 0, k), 0.1) << k;
    EXPECT_EQ(rho_lower_bound(atlas, 3, 3), 1.0);
}

TEST(Practical, RejectsCriticalLevel) {
    AtlasConfig cfg;
    cfg.singular_points = {CVector::Zero(2)};
    EXPECT_THROW(build_atlas(parse_poly("z1*z2", 2), 0.0, 1.0, 0.1, cfg), DomainError);
}

TEST_F(HyperbolaAtlas, Postconditions) {
    const Atlas& a = *atlas_;
    EXPECT_GT(a.size(), 100u);
    EXPECT_TRUE(a.coverage().passed);
    EXPECT_EQ(a.coverage().covered, a.coverage().samples);
    EXPECT_EQ(a.coverage().samples, 10000);
    std::mt19937_64 rng(5);
    for (std::size_t i = 0; i < a.size(); i += 7) {
        const auto& ch = a.chart(i);
        EXPECT_TRUE(verify_chart(ch.chart, 20, i).passed);
        for (int s = 0; s < 100; ++s) {
            CVector w = sample_complex_ball(rng, 1, 1.0);
            EXPECT_LE(std::abs(a.poly()(ch.psi(w)) - a.level()), 1e-10);
        }
    }
    for (const auto& e : a.edges()) EXPECT_GE(e.rho, a.rho_min());
}

TEST_F(HyperbolaAtlas, RhoTrivialCases) {
    const Atlas& a = *atlas_;
    EXPECT_EQ(rho_lower_bound(a, 5, 5), 1.0);
    // charts on opposite branches far apart
    std::size_t i = a.charts_containing(pt(1.0, 0.01)).front();
    std::size_t j = a.charts_containing(pt(-1.0, -0.01)).front();
    EXPECT_EQ(rho_lower_bound(a, i, j), 0.0);
}

TEST_F(HyperbolaAtlas, ChainsAndKobayashi) {
    const Atlas& a = *atlas_;
    CVector u1 = pt(1.0, 0.01), u2 = pt(0.01, 1.0);
    ChartChain one = chain_between(a, u1, u1);
    EXPECT_EQ(one.length(), 1u);
    ChartChain ch = chain_between(a, u1, u2);
    EXPECT_GT(ch.length(), 2u);
    for (std::size_t k = 0; k + 1 < ch.length(); ++k) {
        ASSERT_NE(a.edge_between(ch.charts[k], ch.charts[k + 1]), nullptr);
        EXPECT_GE(ch.rho[k], a.rho_min());
    }
    EXPECT_THROW(chain_between(a, u1, pt(0.5, 0.5)), DomainError);

    KobayashiResult kb = kobayashi_bound(a, u1, u2);
    EXPECT_TRUE(kb.mechanism_ok);
    EXPECT_EQ(kb.bound, 3.0 * kb.chain.length());
    for (const auto& l : kb.links) {
        EXPECT_TRUE(l.in_third_disk);
        EXPECT_LE(l.distance, 1.5);
        EXPECT_NEAR(l.distance, poincare_distance(l.a, l.b), 1e-15);
    }
}

TEST(ChainLength, GrowsAsEpsShrinks) {
    std::size_t prev = 0;
    for (double e : {0.1, 0.05, 0.01}) {
        Atlas a = hyperbola_atlas(e);
        std::size_t len = chain_between(a, pt(1.0, e * e), pt(e * e, 1.0)).length();
        EXPECT_GE(len, prev) << e;
        prev = len;
    }
}

TEST(Quadric, PracticalAtlasBasePoints) {
    const double e = 0.1;
    AtlasConfig cfg;
    cfg.singular_points = {CVector::Zero(2)};
    Atlas a = build_atlas(parse_poly("z1^2 + z2^2", 2), e * e, 2.0, e, cfg);
    EXPECT_TRUE(a.coverage().passed);
    for (const CVector& y : {pt(e, 0.0), pt(-e, 0.0), pt(0.0, e), pt(0.0, -e)})
        EXPECT_FALSE(a.charts_containing(y).empty());
}
