#include <cmath>
#include <deque>
#include <random>

#include <gtest/gtest.h>

#include "doubling/propagate.hpp"
#include "small_atlas.hpp"

using namespace doubling;

namespace {

CVector on_line(Complex z1) {
    CVector z(2);
    z << z1, (z1 + 1.0) / 2.0;
    return z;
}

// small disk of the line around z1 = 0.6 + 0.1i
DomainSpec corner_omega() {
    DomainSpec d;
    d.constraints.push_back({parse_poly("z1 - 0.6 - (0+0.1i)", 2), Constraint::Kind::at_most, 0.1});
    return d;
}

DomainSpec hyperbola_omega() {
    DomainSpec d = polydisk_domain(2, nullptr);
    d.constraints.push_back({std::nullopt, Constraint::Kind::at_least, 0.5});
    return d;
}

std::vector<CVector> grid_targets(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.9, 0.6);
    std::uniform_real_distribution<double> v(-0.9, 0.1);
    std::vector<CVector> out;
    for (int s = 0; s < 20; ++s) out.push_back(on_line(Complex(u(rng), v(rng))));
    return out;
}

}  // namespace

TEST(Constraint, NormAndPolynomial) {
    Constraint c{std::nullopt, Constraint::Kind::at_least, 0.5};
    CVector z = on_line(0.0);
    EXPECT_DOUBLE_EQ(c.value(z), 0.5);
    EXPECT_DOUBLE_EQ(c.slack(z), 0.0);
    EXPECT_EQ(c.lipschitz(z, 1.0), 1.0);
    Constraint d{parse_poly("z1^2", 2), Constraint::Kind::at_most, 1.0};
    CVector w(2);
    w << 0.5, 0.0;
    EXPECT_DOUBLE_EQ(d.slack(w), 0.75);
    EXPECT_DOUBLE_EQ(d.lipschitz(w, 0.1), 2.0 * 0.6);
}

TEST(Omega, CertifiedSubballStaysInside) {
    Atlas a = small_line_atlas(3, 4, 0.5, 0.15);
    DomainSpec om = corner_omega();
    auto anchors = omega_anchors(a, om, 32, 3);
    ASSERT_FALSE(anchors.empty());
    std::mt19937_64 rng(6);
    for (const auto& an : anchors) {
        const auto& ch = a.chart(an.chart);
        CVector w0 = ch.unit_coords(an.witness).value();
        for (int s = 0; s < 200; ++s) {
            CVector w = w0 + sample_complex_ball(rng, 1, an.rho);
            EXPECT_TRUE(om.contains(ch.psi(w)));
        }
    }
}

TEST(Chain, ExhaustiveMatchesShortestPath) {
    Atlas a = small_line_atlas(3, 4, 0.5, 0.15);
    ASSERT_EQ(a.size(), 12u);
    for (int p = 1; p <= 3; ++p) {
        DoublingParams prm{p, 1.0};
        Propagator prop(a, corner_omega(), prm);
        std::mt19937_64 rng(p);
        for (const auto& z : grid_targets(rng)) {
            PropagationResult fast = prop.bound(z);
            PropagationResult slow = chain_bound_exhaustive(a, prop.anchors(), z, prm);
            EXPECT_EQ(fast.log_bound, slow.log_bound);
        }
    }
}

TEST(Chain, WitnessRecomputes) {
    Atlas a = small_line_atlas(3, 4, 0.5, 0.15);
    DoublingParams prm{2, 1.0};
    Propagator prop(a, corner_omega(), prm);
    EXPECT_DOUBLE_EQ(prop.log_cp(), std::log(nonconcentric_constant(prm, 1.0)));
    std::mt19937_64 rng(9);
    for (const auto& z : grid_targets(rng)) {
        PropagationResult r = prop.bound(z);
        // c_p^ell / (rho_omega^p prod rho^p) from the witness
        double v = r.chain.length() * r.log_cp - 2.0 * std::log(r.chain.rho_omega);
        for (double rho : r.chain.rho) v -= 2.0 * std::log(rho);
        EXPECT_NEAR(v, r.log_bound, 1e-12 * std::abs(r.log_bound));
        EXPECT_EQ(r.terms.size(), r.chain.length());
        ASSERT_FALSE(a.charts_containing(z).empty());
        EXPECT_TRUE(a.chart(r.chain.charts.back()).unit_coords(z).has_value());
        for (std::size_t k = 0; k + 1 < r.chain.length(); ++k)
            EXPECT_EQ(a.edge_between(r.chain.charts[k], r.chain.charts[k + 1])->rho, r.chain.rho[k]);
    }
}

TEST(Chain, SingleChartBound) {
    Atlas a = small_line_atlas(3, 4, 0.5, 0.15);
    DoublingParams prm{1, 1.0};
    Propagator prop(a, corner_omega(), prm);
    const auto& an = prop.anchors().front();
    PropagationResult r = prop.bound(an.witness);
    ASSERT_EQ(r.chain.length(), 1u);
    EXPECT_NEAR(r.log_bound, prop.log_cp() - std::log(r.chain.rho_omega), 1e-15);
}

TEST(Chain, DensifyingNeverIncreases) {
    Atlas sparse = small_line_atlas(3, 3, 0.5, 0.15);
    Atlas dense = small_line_atlas(3, 3, 0.5, 0.15, 3);
    ASSERT_EQ(dense.size(), 12u);
    DoublingParams prm{2, 1.0};
    DomainSpec om;
    om.constraints.push_back({parse_poly("z1 - 0.1 - (0+0.1i)", 2), Constraint::Kind::at_most, 0.1});
    Propagator ps(sparse, om, prm), pd(dense, om, prm);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-0.9, 0.1);
    for (int s = 0; s < 30; ++s) {
        CVector z = on_line(Complex(u(rng), u(rng)));
        EXPECT_LE(pd.bound(z).log_bound, ps.bound(z).log_bound);
        EXPECT_EQ(pd.bound(z).log_bound, chain_bound_exhaustive(dense, pd.anchors(), z, prm).log_bound);
    }
}

TEST(Chain, Errors) {
    // two groups of charts with no overlap between them
    Atlas a = small_line_atlas(1, 4, 1.0, 0.05);
    DomainSpec om;
    om.constraints.push_back({parse_poly("z1 - 0.1 + (0+0.9i)", 2), Constraint::Kind::at_most, 0.1});
    Propagator prop(a, om, DoublingParams{1, 1.0});
    ASSERT_EQ(prop.anchors().size(), 1u);
    EXPECT_THROW(prop.bound(a.chart(0).base()), Disconnected);
    EXPECT_THROW(graph_diameter(a), Disconnected);
    CVector off(2);
    off << 0.0, 0.0;
    EXPECT_THROW(prop.bound(off), DomainError);
    EXPECT_THROW(prop.bound(on_line(Complex(-0.4, 0.0))), NotCovered);
}

TEST(Chain, HyperbolaBoundDominatesMeasured) {
    const double e = 0.1;
    AtlasConfig cfg;
    cfg.singular_points = {CVector::Zero(2)};
    Atlas a = build_atlas(parse_poly("z1*z2", 2), e * e, 1.0, std::sqrt(2.0) * e, cfg);
    CVector z(2);
    z << e * e, 1.0;
    PropagationResult r = chain_bound(a, hyperbola_omega(), z, DoublingParams{2, 1.0});
    EXPECT_GE(r.log_bound, std::log(50.0));
    EXPECT_TRUE(std::isfinite(r.log_bound));
    UniformBound ub = uniform_bound(a, 0.1, 2, DoublingParams{2, 1.0});
    EXPECT_GE(ub.log_value, std::log(50.0));
    EXPECT_EQ(ub.kappa, a.size());
}

TEST(Diameter, MatchesAllPairsBfs) {
    Atlas a = small_line_atlas(3, 4, 0.5, 0.15);
    int worst = 0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        std::vector<int> d(a.size(), -1);
        std::deque<std::size_t> q{s};
        d[s] = 0;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            for (auto [v, e] : a.neighbors(u))
                if (d[v] < 0) {
                    d[v] = d[u] + 1;
                    q.push_back(v);
                }
        }
        for (int x : d) worst = std::max(worst, x);
    }
    EXPECT_EQ(graph_diameter(a), static_cast<std::size_t>(worst) + 1);
}

TEST(Uniform, ExponentLaw) {
    DoublingParams prm{2, 1.0};
    UniformBound one = uniform_bound(1, 1, 0.1, 2, prm);
    EXPECT_NEAR(one.log_value, std::log(nonconcentric_constant(prm, 1.0) / 0.01), 1e-12);
    EXPECT_NEAR(std::exp(one.log_value), nonconcentric_constant(prm, 0.1), 1e-9 * std::exp(one.log_value));
    UniformBound two = uniform_bound(2, 5, 0.1, 2, prm);
    EXPECT_NEAR(two.log_value, 2.0 * one.log_value, 1e-12);
    EXPECT_NEAR(two.log_kappa_value, 5.0 * one.log_value, 1e-12);
}

TEST(KappaLower, Examples) {
    DoublingParams prm{2, 1.0};
    double step = nonconcentric_constant(prm, 0.1);
    EXPECT_NEAR(kappa_lower(step, 0.1, 2, prm), 1.0, 1e-12);
    EXPECT_THROW(kappa_lower(1.0, 0.1, 2, prm), DomainError);
    // affine in log(1/eps) for dc = 1/(2 eps^2)
    double a = kappa_lower(0.5 / 1e-2, 0.1, 2, prm), b = kappa_lower(0.5 / 1e-4, 0.1, 2, prm),
           c = kappa_lower(0.5 / 1e-6, 0.1, 2, prm);
    EXPECT_NEAR(b - a, c - b, 1e-12);
    EXPECT_GT(b, a);
}

TEST(PolyDC, ClosedForm) {
    DoublingParams prm{1, 1.0};
    PolyDCBound b = poly_dc_bound(2, 2, 1, 1.0, 0.01, prm);
    EXPECT_EQ(b.p, 2);
    DoublingParams p2{2, 1.0};
    double c3 = std::log2(100.0 * nonconcentric_constant(p2, 1.0)) * std::pow(512000.0, 4);
    EXPECT_NEAR(b.exponent, c3, 1e-9 * c3);
    EXPECT_NEAR(b.log_bound, c3 * std::log(768000.0 / 0.01), 1e-9 * b.log_bound);
    PolyDCBound h = poly_dc_bound(2, 2, 1, 1.0, 0.005, prm);
    EXPECT_NEAR(h.log_bound - b.log_bound, b.exponent * std::log(2.0), 1e-9 * h.log_bound);
    PolyDCBound cap = poly_dc_bound(2, 2, 1, 32.0, 0.01, prm);
    EXPECT_LT(cap.exponent, poly_dc_bound(2, 2, 1, 31.0, 0.01, prm).exponent);
    EXPECT_EQ(poly_dc_bound(2, 2, 2, 1.0, 0.01, prm).p, 4);
}

TEST(EmpiricalDC, ConstantAndMonotone) {
    PointSampler g = [](std::mt19937_64& rng) -> std::optional<CVector> {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        return on_line(Complex(u(rng), u(rng)));
    };
    PointSampler o = [](std::mt19937_64& rng) -> std::optional<CVector> {
        std::uniform_real_distribution<double> u(-0.1, 0.1);
        return on_line(Complex(u(rng), u(rng)));
    };
    EXPECT_EQ(empirical_dc([](const CVector&) { return Complex(1.0); }, g, o, 100, 0), 1.0);
    auto f = [](const CVector& z) { return z[0] + 0.5; };
    double prev = 0.0;
    for (int count : {10, 100, 1000, 10000}) {
        double v = empirical_dc(f, g, o, count, 4);
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_THROW(empirical_dc([](const CVector&) { return Complex(0.0); }, g, o, 10, 0), DomainError);
}
