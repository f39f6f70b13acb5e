#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "doubling/atlas.hpp"
#include "doubling/propagate.hpp"
#include "doubling/whitney.hpp"

namespace doubling::cli {

enum class Format { report, table };

struct Report {
    nlohmann::json doc;
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
    bool passed = true;

    void check(const std::string& name, bool ok);
    std::string render(Format format) const;
};

// "x1,x2;y1,y2" -> points; empty string -> none
std::vector<RVector> parse_points(const std::string& text, int dim);
// realified "re1,im1,re2,im2" -> complex point
CVector parse_complex_point(const std::string& text, int n);
std::vector<double> parse_list(const std::string& text);

std::size_t atlas_components(const Atlas& atlas);

struct CoverCubeArgs {
    int dim = 2;
    std::vector<RVector> punctures;
    double delta = 0.0078125;
    double gamma = 2.0;
    int samples = 10000;
    std::uint64_t seed = 0;
    bool cubes = false;  // include the cube list
};
Report cover_cube(const CoverCubeArgs& args);

struct HypersurfaceArgs {
    std::string poly;
    int n = 2;
    Complex level = 0.0;
    double K = 0.0;  // 0: estimate by sampling
    double delta = 0.0;
    std::vector<CVector> singular;
    AtlasConfig config;
    int chart_samples = 100;
    std::string atlas_out;
};
Report cover_hypersurface(const HypersurfaceArgs& args);

struct ChainArgs {
    HypersurfaceArgs surface;
    CVector u1, u2;
};
Report chain(const ChainArgs& args);

struct BoundArgs {
    int p = 1;
    double A_p = 1.0;
    double alpha = 0.5, beta = 0.25;
    double rho = 0.1;
    std::optional<double> dc;
    std::optional<std::size_t> ell;
    int n = 2, d = 2, d1 = 1;
    std::optional<double> K, delta;
};
Report doubling_bound(const BoundArgs& args);

struct HyperbolaArgs {
    std::vector<double> eps;
    AtlasConfig config;
    int samples = 10000;
    bool bounds = true;  // chain and uniform bounds per point
};
Report hyperbola(const HyperbolaArgs& args);

struct QuadricArgs {
    int n = 2;
    std::vector<double> eps;
    AtlasConfig config;
    int samples = 10000;
};
Report quadric(const QuadricArgs& args);

struct ProductArgs {
    int d = 2;
    std::vector<double> eps;
    double gamma = 2.0;
    int samples = 10000;
    std::uint64_t seed = 0;
};
Report product(const ProductArgs& args);
// interior critical grid of prod_{j<d}(z - j) * prod_{j<d}(y - j)
std::vector<CVector> product_critical_points(int d);

Report verify(std::uint64_t seed, int samples);

// sum_{k<=terms} k^n z^k in 50-digit arithmetic
Complex polylog_series(int n, Complex z, int terms);

// samplers used by the experiments
PointSampler hyperbola_g_sampler(double eps);
PointSampler hyperbola_omega_sampler(double eps);
PointSampler quadric_g_sampler(int n, double eps);
PointSampler quadric_omega_sampler(int n, double eps);
DomainSpec hyperbola_omega(double eps);

}  // namespace doubling::cli
