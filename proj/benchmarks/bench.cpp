#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "doubling/propagate.hpp"

using namespace doubling;

namespace {

const Atlas& hyperbola() {
    static const Atlas a = [] {
        AtlasConfig cfg;
        cfg.singular_points = {CVector::Zero(2)};
        return build_atlas(parse_poly("z1*z2", 2), 0.01, 1.0, std::sqrt(2.0) * 0.1, cfg);
    }();
    return a;
}

DomainSpec outer_omega() {
    DomainSpec d = polydisk_domain(2, nullptr);
    d.constraints.push_back({std::nullopt, Constraint::Kind::at_least, 0.5});
    return d;
}

}  // namespace

static void BM_PolyEval(benchmark::State& state) {
    PolyC P = parse_poly("z1^3*z2 - 2*z1*z2^2 + z3^4 - 0.5*z1*z2*z3 + 1", 3);
    CVector z(3);
    z << Complex(0.3, 0.1), Complex(-0.2, 0.4), Complex(0.1, -0.7);
    for (auto _ : state) benchmark::DoNotOptimize(P(z));
}
BENCHMARK(BM_PolyEval);

static void BM_PolyGradient(benchmark::State& state) {
    PolyC P = parse_poly("z1^3*z2 - 2*z1*z2^2 + z3^4 - 0.5*z1*z2*z3 + 1", 3);
    CVector z(3);
    z << Complex(0.3, 0.1), Complex(-0.2, 0.4), Complex(0.1, -0.7);
    for (auto _ : state) benchmark::DoNotOptimize(P.eval_grad(z));
}
BENCHMARK(BM_PolyGradient);

static void BM_BuildCover(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    std::vector<RVector> punct{RVector(m, 0.25), RVector(m, -0.5)};
    for (auto _ : state) benchmark::DoNotOptimize(build_cover(m, punct, std::ldexp(1.0, -8), 2.0).size());
}
BENCHMARK(BM_BuildCover)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_ChartSolve(benchmark::State& state) {
    const ImplicitChart& ch = hyperbola().chart(0).chart;
    std::mt19937_64 rng(1);
    std::vector<CVector> pts;
    for (int i = 0; i < 256; ++i) pts.push_back(sample_complex_ball(rng, 1, 0.9 * ch.theta()));
    std::size_t k = 0;
    for (auto _ : state) benchmark::DoNotOptimize(ch.solve(pts[k++ % pts.size()]));
}
BENCHMARK(BM_ChartSolve);

static void BM_PropagateQuery(benchmark::State& state) {
    Propagator prop(hyperbola(), outer_omega(), DoublingParams{2, 1.0});
    CVector z(2);
    z << 0.01, 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(prop.bound(z).log_bound);
}
BENCHMARK(BM_PropagateQuery)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
