#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "experiments.hpp"

using namespace doubling;
using namespace doubling::cli;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(DOUBLING_CLI) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST(Parsing, Points) {
    auto p = parse_points("0,0.5;-1,0.25", 2);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[1][1], 0.25);
    EXPECT_TRUE(parse_points("", 2).empty());
    EXPECT_THROW(parse_points("0,1,2", 2), ParseError);
    CVector z = parse_complex_point("1,2,3,4", 2);
    EXPECT_EQ(z[1], Complex(3.0, 4.0));
}

TEST(CoverCube, ReportChecks) {
    CoverCubeArgs a;
    a.punctures = {{0.0, 0.0}};
    Report r = cover_cube(a);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.doc["separation_failures"], 0);
    EXPECT_LE(r.doc["count"].get<double>(), r.doc["count_bound"].get<double>());

    CoverCubeArgs empty;
    Report v = cover_cube(empty);
    EXPECT_TRUE(v.passed);
}

TEST(Determinism, ReportsByteIdentical) {
    CoverCubeArgs a;
    a.dim = 3;
    a.punctures = {{0.25, -0.5, 0.0}, {0.5, 0.5, 0.5}};
    a.seed = 17;
    EXPECT_EQ(cover_cube(a).render(Format::report), cover_cube(a).render(Format::report));
    HyperbolaArgs h;
    h.eps = {0.2};
    h.samples = 2000;
    h.config.seed = 5;
    h.config.coverage_samples = 2000;
    Report x = hyperbola(h), y = hyperbola(h);
    EXPECT_EQ(x.render(Format::report), y.render(Format::report));
    EXPECT_EQ(x.render(Format::table), y.render(Format::table));
}

TEST(Hyperbola, DoublingConstant) {
    HyperbolaArgs h;
    h.eps = {0.1};
    h.bounds = false;
    Report r = hyperbola(h);
    EXPECT_TRUE(r.passed);
    double dc = r.doc["points"][0]["dc"];
    EXPECT_NEAR(dc, 50.0, 2.5);
    EXPECT_NEAR(r.doc["points"][0]["sampled_distance"].get<double>(), std::sqrt(2.0) * 0.1, 1e-10);
    EXPECT_THROW(hyperbola(HyperbolaArgs{{0.5}}), DomainError);
}

TEST(Quadric, DistanceAndRange) {
    QuadricArgs q;
    q.eps = {0.1};
    q.samples = 2000;
    Report r = quadric(q);
    EXPECT_NEAR(r.doc["points"][0]["sampled_distance"].get<double>(), 0.1, 1e-10);
    QuadricArgs bad;
    bad.n = 5;
    bad.eps = {0.1};
    EXPECT_THROW(quadric(bad), DomainError);
}

TEST(Product, SingularGrid) {
    EXPECT_EQ(product_critical_points(2).size(), 1u);
    auto c3 = product_critical_points(3);
    ASSERT_EQ(c3.size(), 4u);
    const double r1 = 1.0 - 1.0 / std::sqrt(3.0), r2 = 1.0 + 1.0 / std::sqrt(3.0);
    for (const auto& z : c3)
        for (int i = 0; i < 2; ++i)
            EXPECT_LT(std::min(std::abs(z[i] - r1), std::abs(z[i] - r2)), 1e-12);
    ProductArgs big;
    big.d = 5;
    big.eps = {0.1};
    EXPECT_THROW(product(big), BudgetExceeded);
}

TEST(Executable, ExitCodes) {
    EXPECT_EQ(run("cover-cube --dim 2 --punctures 0,0 --delta 0.0078125 --gamma 2"), 0);
    EXPECT_NE(run("cover-cube --dim 2 --punctures 0,0 --delta 0.0078125 --gamma 1"), 0);
    EXPECT_EQ(run("cover-cube --dim 2 --delta 0.0078125"), 0);
    EXPECT_EQ(run("experiment quadric --n 5 --eps 0.1"), 2);
    EXPECT_EQ(run("experiment product --d 5"), 3);
    EXPECT_EQ(run("doubling-bound --p 1 --alpha 0.5 --beta 0.25"), 0);
}

TEST(Executable, SeededRunsIdentical) {
    const std::string a = ::testing::TempDir() + "cli_a.json", b = ::testing::TempDir() + "cli_b.json";
    const std::string args = "cover-cube --dim 2 --punctures '0.5,0.25;-0.25,0' --delta 0.01 --seed 9 --out ";
    ASSERT_EQ(run(args + a), 0);
    ASSERT_EQ(run(args + b), 0);
    std::string x = slurp(a);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b));
}
