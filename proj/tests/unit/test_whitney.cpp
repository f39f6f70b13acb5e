#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "doubling/stats.hpp"
#include "doubling/whitney.hpp"

using namespace doubling;

namespace {

double dist(const RVector& a, const RVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

bool in_open_cube(const SubCube& c, const RVector& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lo = -1.0 + c.coords[i] * c.edge();
        if (!(x[i] > lo && x[i] < lo + c.edge())) return false;
    }
    return true;
}

}  // namespace

TEST(NeighborhoodK, Examples) {
    EXPECT_EQ(neighborhood_k(2, 2.0), 1);
    EXPECT_EQ(neighborhood_k(2, 3.0), 2);
    EXPECT_EQ(neighborhood_k(1, 1.0 + 1e-9), 1);
    EXPECT_THROW(neighborhood_k(2, 1.0), DomainError);
    for (int m = 1; m <= 4; ++m)
        for (double g : {1.5, 2.0, 4.0, 7.3}) {
            int k = neighborhood_k(m, g);
            // gamma r_s <= k edge_s + edge_s / 2 at s = 0 (scale free)
            EXPECT_LE(g * std::sqrt(m), 2.0 * k + 1.0 + 1e-12);
        }
}

TEST(BuildCover, OriginRegression) {
    WhitneyCover c = build_cover({{0.0, 0.0}}, 0.125, 2.0);
    EXPECT_EQ(c.size(), 192u);
    EXPECT_LE(static_cast<double>(c.size()), count_bound(2, 1, 2.0, 0.125));
    EXPECT_NEAR(count_bound(2, 1, 2.0, 0.125), 72.0 * std::log2(96.0), 1e-9);
    EXPECT_TRUE(c.sigma_inside_delta());
}

TEST(BuildCover, OneDimensional) {
    WhitneyCover c = build_cover({{0.0}}, 0.25, 2.0);
    ASSERT_GT(c.size(), 0u);
    for (std::size_t i = 0; i < c.size(); ++i) {
        SubCube q = c.cube(i);
        double lo = -1.0 + q.coords[0] * q.edge(), hi = lo + q.edge();
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        // 2I misses 0
        EXPECT_GT(std::abs(mid), 2.0 * half);
    }
}

TEST(BuildCover, EmptyPunctures) {
    WhitneyCover c = build_cover(2, {}, 0.01, 2.0);
    ASSERT_GT(c.size(), 0u);
    int lv = c.level(0);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c.level(i), lv);
    EXPECT_EQ(c.size(), static_cast<std::size_t>(std::pow(1 << lv, 2)));
}

TEST(BuildCover, Errors) {
    EXPECT_THROW(build_cover({{0.0, 0.0}}, 0.0, 2.0), DomainError);
    EXPECT_THROW(build_cover({{0.0, 0.0}}, 0.1, 1.0), DomainError);
}

TEST(BuildCover, InvariantsRandom) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> q(-31, 31);
    for (int m = 1; m <= 3; ++m) {
        for (double gamma : {1.5, 2.0, 4.0}) {
            std::vector<RVector> punct;
            for (int j = 0; j < 3; ++j) {
                RVector p(m);
                for (auto& v : p) v = q(rng) / 32.0;
                punct.push_back(p);
            }
            const double delta = 1.0 / 64;
            WhitneyCover c = build_cover(m, punct, delta, gamma);
            EXPECT_LE(static_cast<double>(c.size()), count_bound(m, punct.size(), gamma, delta));
            for (std::size_t i = 0; i < c.size(); ++i) {
                for (const auto& p : punct) ASSERT_TRUE(ball_separated_exact(c.cube(i), p, gamma));
                for (std::size_t j : c.face_neighbors(i)) EXPECT_LE(std::abs(c.level(i) - c.level(j)), 1);
            }
            int tested = 0;
            for (int s = 0; s < 2000; ++s) {
                RVector x(m);
                for (auto& v : x) v = u(rng);
                double dmin = 1e9;
                for (const auto& p : punct) dmin = std::min(dmin, dist(x, p));
                // partition: exactly one open cube among retained and final cubes
                int owners = 0;
                for (std::size_t i = 0; i < c.size(); ++i) owners += in_open_cube(c.cube(i), x);
                for (std::size_t i = 0; i < c.sigma_count(); ++i) owners += in_open_cube(c.sigma_cube(i), x);
                EXPECT_EQ(owners, 1);
                if (dmin < delta) continue;
                ++tested;
                EXPECT_FALSE(c.containing(x).empty());
            }
            EXPECT_GT(tested, 0);
        }
    }
}

TEST(BuildCover, LogScaling) {
    std::vector<double> x, y;
    for (int k = 4; k <= 12; ++k) {
        WhitneyCover c = build_cover({{0.25, -0.5}, {-0.375, 0.125}}, std::ldexp(1.0, -k), 2.0);
        x.push_back(k);
        y.push_back(static_cast<double>(c.size()));
    }
    EXPECT_GE(linear_fit(x, y).r2, 0.99);
}

TEST(IntersectionBall, Examples) {
    Ball a{{0.0, 0.0}, 1.0};
    EXPECT_DOUBLE_EQ(intersection_ball_radius(a, a), 1.0);
    Ball b{{2.0, 0.0}, 1.0};
    EXPECT_DOUBLE_EQ(intersection_ball_radius(a, b), 0.0);
    Ball far{{5.0, 0.0}, 1.0};
    EXPECT_DOUBLE_EQ(intersection_ball_radius(a, far), 0.0);

    // level s and s+1 cubes sharing part of a face, m = 2
    const int s = 5;
    SubCube big{s, {10, 10}}, small{s + 1, {22, 21}};
    Ball B{big.center(), big.radius()}, S{small.center(), small.radius()};
    EXPECT_NEAR(dist(B.center, S.center), std::sqrt(10.0) / std::ldexp(1.0, s + 1), 1e-15);
    double ratio = intersection_ball_radius(B, S) / S.radius;
    EXPECT_NEAR(ratio, 1.5 - std::sqrt(5.0) / 2.0, 1e-12);
    EXPECT_GE(ratio, 1.0 / 3.0);
}

TEST(FindChain, Postconditions) {
    WhitneyCover c = build_cover({{0.0, 0.0}}, std::ldexp(1.0, -6), 2.0);
    CubeChain ch = find_chain(c, {0.9, 0.9}, {-0.9, 0.9});
    ASSERT_GE(ch.cubes.size(), 2u);
    EXPECT_TRUE(c.cube(ch.cubes.front()).contains({0.9, 0.9}));
    EXPECT_TRUE(c.cube(ch.cubes.back()).contains({-0.9, 0.9}));
    for (std::size_t k = 0; k + 1 < ch.cubes.size(); ++k) {
        Ball a = c.ball(ch.cubes[k]), b = c.ball(ch.cubes[k + 1]);
        double q = a.radius / b.radius;
        EXPECT_TRUE(q == 0.5 || q == 1.0 || q == 2.0);
        auto nb = c.face_neighbors(ch.cubes[k]);
        EXPECT_NE(std::find(nb.begin(), nb.end(), ch.cubes[k + 1]), nb.end());
        EXPECT_GT(intersection_ball_radius(a, b), 0.0);
    }
    EXPECT_EQ(find_chain(c, {0.9, 0.9}, {0.9, 0.9}).cubes.size(), 1u);
    EXPECT_THROW(find_chain(c, {0.0, 0.001}, {0.9, 0.9}), NotCovered);
}

TEST(Serialization, Deterministic) {
    WhitneyCover a = build_cover({{0.5, 0.5}}, 0.05, 2.0);
    WhitneyCover b = build_cover({{0.5, 0.5}}, 0.05, 2.0);
    EXPECT_EQ(to_json(a), to_json(b));
}
