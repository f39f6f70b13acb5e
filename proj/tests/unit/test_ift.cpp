#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "doubling/ift.hpp"

using namespace doubling;

namespace {

CVector pt(Complex a, Complex b) {
    CVector z(2);
    z << a, b;
    return z;
}

ImplicitChart chart_at(const PolyC& P, Complex c, const CVector& z0) {
    auto vg = P.eval_grad(z0);
    double M = markov_M(P);
    return ImplicitChart(P, c, align_frame(z0, vg.grad), chart_radius(vg.grad.norm(), M, P.dimension()), M);
}

}  // namespace

TEST(ChartRadius, Examples) {
    EXPECT_DOUBLE_EQ(chart_radius(1.0, 1.0, 2), 0.01);
    EXPECT_THROW(chart_radius(0.0, 1.0, 2), DomainError);
    const double e = 0.1;
    double M = 32.0 * (1.0 + e * e);
    EXPECT_NEAR(chart_radius(std::sqrt(2.0) * e, M, 2), std::sqrt(2.0) * e / (3200.0 * (1.0 + e * e)), 1e-16);
}

TEST(AlignFrame, Examples) {
    UnitaryFrame f = align_frame(CVector::Zero(2), pt(0.0, 0.7));
    EXPECT_LT((f.matrix - CMatrix::Identity(2, 2)).norm(), 1e-15);

    UnitaryFrame g = align_frame(CVector::Zero(2), pt(1.0, 0.0));
    EXPECT_LT((g.matrix.adjoint() * g.matrix - CMatrix::Identity(2, 2)).norm(), 1e-12);
    EXPECT_LT((g.matrix.col(1) - pt(1.0, 0.0)).norm(), 1e-12);

    EXPECT_THROW(align_frame(CVector::Zero(2), CVector::Zero(2)), DomainError);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        CVector grad(3);
        for (int i = 0; i < 3; ++i) grad[i] = Complex(n(rng), n(rng));
        UnitaryFrame h = align_frame(CVector::Zero(3), grad);
        EXPECT_LT((h.matrix.adjoint() * h.matrix - CMatrix::Identity(3, 3)).norm(), 1e-12);
        // df/dv_n = <grad, U e_n> has modulus |grad|; tangent derivatives vanish
        CVector df = h.matrix.transpose() * grad;
        EXPECT_NEAR(std::abs(df[2]), grad.norm(), 1e-12);
        EXPECT_LT(df.head(2).norm(), 1e-12);
        EXPECT_GE(h.matrix(2, 2).real(), 0.0);
    }
}

TEST(Solve, CenterAndClosedForm) {
    const double e = 0.1;
    PolyC h = normalized(parse_poly("z1*z2", 2));
    ImplicitChart ch = chart_at(h, e * e, pt(e, e));
    EXPECT_EQ(solve_implicit(ch, CVector::Zero(1)), Complex(0.0));

    PolyC q = parse_poly("z1^2 + z2^2", 2);
    ImplicitChart cq = chart_at(q, 1.0, pt(0.0, 1.0));
    CVector vbar(1);
    vbar << 0.01;
    auto t = cq.try_solve(vbar, 1.0);
    ASSERT_TRUE(t.has_value());
    EXPECT_NEAR(std::abs(*t + 1.0 - std::sqrt(1.0 - 1e-4)), 0.0, 1e-12);
    EXPECT_LE(std::abs(cq.residual(vbar, *t)), 1e-12);
    EXPECT_THROW(cq.solve(vbar), DomainError);  // 0.01 exceeds theta here

    vbar << 0.5 * cq.theta();
    Complex s = cq.solve(vbar);
    EXPECT_LE(std::abs(cq.residual(vbar, s)), 1e-12);
    EXPECT_LE(std::abs(s), cq.theta() / 49.0 + 1e-15);
}

TEST(VerifyChart, HyperbolaPasses) {
    const double e = 0.1;
    PolyC h = normalized(parse_poly("z1*z2", 2));
    ImplicitChart ch = chart_at(h, e * e, pt(e, e));
    ChartCertificate c = verify_chart(ch, 1000, 4);
    EXPECT_TRUE(c.passed);
    EXPECT_LE(c.max_grad_phi, 1.0 / 49.0);
    EXPECT_LE(c.max_phi_ratio, 1.0 / 49.0);
    EXPECT_LE(c.max_residual, 1e-10);
    EXPECT_GE(c.distortion, 0.99);
    EXPECT_TRUE(c.unique);
}

TEST(VerifyChart, OversizedRadiusRejected) {
    const double e = 0.1;
    PolyC h = normalized(parse_poly("z1*z2", 2));
    auto vg = h.eval_grad(pt(e, e));
    double M = markov_M(h), theta = chart_radius(vg.grad.norm(), M, 2);
    EXPECT_THROW(ImplicitChart(h, e * e, align_frame(pt(e, e), vg.grad), 2.0 * theta, M), DomainError);

    ImplicitChart ch = chart_at(h, e * e, pt(e, e));
    GraphTargets t;
    t.radius = 0.9 * e;
    EXPECT_FALSE(verify_graph(ch, t, 200, 1).passed);
}

TEST(VerifyChart, LinearIsFlat) {
    PolyC f = parse_poly("z2", 2);
    ImplicitChart ch = chart_at(f, 0.0, CVector::Zero(2));
    ChartCertificate c = verify_chart(ch, 200, 0);
    EXPECT_TRUE(c.passed);
    EXPECT_EQ(c.max_grad_phi, 0.0);
    EXPECT_EQ(c.distortion, 1.0);
}

TEST(Properties, LipschitzAlongSegments) {
    const double e = 0.05;
    PolyC h = normalized(parse_poly("z1*z2", 2));
    ImplicitChart ch = chart_at(h, e * e, pt(0.3, e * e / 0.3));
    std::mt19937_64 rng(8);
    for (int s = 0; s < 200; ++s) {
        CVector a = sample_complex_ball(rng, 1, ch.theta()), b = sample_complex_ball(rng, 1, ch.theta());
        Complex pa = ch.solve(a), pb = ch.solve(b);
        EXPECT_LE(std::abs(pa - pb), (a - b).norm() / 49.0 + 1e-15);
        EXPECT_LE(std::abs(h(ch.to_ambient(a, pa)) - e * e), 1e-10);
    }
}

TEST(Extension, MajorantBoundsSampledSlope) {
    const double e = 0.1;
    PolyC h = normalized(parse_poly("z1*z2", 2));
    ImplicitChart ch = chart_at(h, e * e, pt(0.5, e * e / 0.5));
    ExtensionCertifier cert(ch);
    ExtensionBound b = cert.at(0.05);
    ASSERT_TRUE(b.ok);
    std::mt19937_64 rng(9);
    for (int s = 0; s < 300; ++s) {
        CVector v = sample_complex_ball(rng, 1, b.radius, s % 3 == 0);
        auto t = ch.solve_along(v, b.radius);
        ASSERT_TRUE(t.has_value());
        EXPECT_LE(ch.grad_phi(v, *t).norm(), b.slope + 1e-12);
        EXPECT_LE(std::abs(*t), b.slope * v.norm() + 1e-12);
    }
    // the branch over (0.5, .) has a pole at distance 0.5: no certificate there
    EXPECT_FALSE(cert.at(0.6).ok);
}
