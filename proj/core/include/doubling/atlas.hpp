#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "doubling/ift.hpp"
#include "doubling/whitney.hpp"

namespace doubling {

enum class AtlasMode { faithful, practical };

struct AtlasConfig {
    AtlasMode mode = AtlasMode::practical;
    double gamma = 6.0;  // practical mode only
    std::uint64_t seed = 0;
    double extension_slope = 0.5;
    int extension_samples = 40;
    int uniqueness_lines = 8;
    int core_samples = 24;
    int ball_samples = 24;
    double cover_margin = 0.8;  // ball samples count as covered only inside this fraction of a unit ball
    int repair_samples = 10000;
    int repair_rounds = 6;  // stop early after a round with no misses
    int coverage_samples = 10000;
    double rho_min = 0.1;
    std::size_t chart_budget = 400000;
    double cube_budget = 3e7;
    std::vector<CVector> singular_points;  // empty: seeded Newton search
};

/// One doubling chart psi(w) = graph point over lambda * w, w in the unit ball of C^{n-1}.
struct AtlasChart {
    std::size_t ball_index = 0;
    int level = 0;
    double ball_radius = 0.0;
    ImplicitChart chart;  // certified core of radius theta
    double scale = 0.0;   // r_j: verified graph radius
    double unit = 0.0;    // lambda_j = r_j / 4
    double slope = 0.0;   // bound on |grad phi| over the r_j ball

    const CVector& base() const { return chart.origin(); }
    int dimension() const { return chart.dimension(); }
    // ambient distance bound |psi(w) - base| <= reach() for |w| <= 1
    double reach() const;
    CVector psi(const CVector& w) const;
    // unit coordinates of z when z lies in psi(closed unit ball)
    std::optional<CVector> unit_coords(const CVector& z, double tol = 1e-8) const;
};

struct AtlasEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    double rho = 0.0;
    CVector witness;  // a point of U_a and U_b used for the certificate
};

struct OverlapCertificate {
    double rho = 0.0;
    CVector witness;
};

struct CoverageReport {
    int samples = 0;
    int covered = 0;
    bool passed = false;
};

// Spatial hash over chart base points, one grid per power-of-two scale.
class ChartIndex {
public:
    explicit ChartIndex(int n = 2) : n_(n) {}
    void insert(std::size_t id, const CVector& center, double reach);
    // ids whose box contains z (superset; callers test membership)
    std::vector<std::size_t> query(const CVector& z) const;
    // ids whose box meets the box of (center, reach)
    std::vector<std::size_t> query_box(const CVector& center, double reach) const;

private:
    int scale_of(double reach) const;
    std::uint64_t key(int scale, const std::int64_t* cell) const;
    int n_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
    std::vector<int> scales_;
};

class Atlas {
public:
    const PolyC& poly() const { return poly_; }  // normalized
    Complex level() const { return level_; }      // level of the normalized polynomial
    int dimension() const { return poly_.dimension(); }
    AtlasMode mode() const { return mode_; }
    double K() const { return K_; }
    double delta() const { return delta_; }
    double gamma() const { return gamma_; }
    double M() const { return M_; }
    double rho_min() const { return rho_min_; }
    const SingularSet& singular() const { return sing_; }

    std::size_t size() const { return charts_.size(); }
    const AtlasChart& chart(std::size_t i) const { return charts_.at(i); }
    const std::vector<AtlasChart>& charts() const { return charts_; }
    const std::vector<AtlasEdge>& edges() const { return edges_; }
    // (neighbor, edge id) pairs sorted by neighbor
    const std::vector<std::pair<std::size_t, std::size_t>>& neighbors(std::size_t i) const {
        return adj_.at(i);
    }
    const AtlasEdge* edge_between(std::size_t i, std::size_t j) const;

    std::vector<std::size_t> charts_containing(const CVector& z) const;
    bool on_level_set(const CVector& z, double tol = 1e-9) const;

    const CoverageReport& coverage() const { return coverage_; }
    std::size_t whitney_balls() const { return whitney_balls_; }
    std::size_t balls_meeting_Y() const { return balls_used_; }
    std::vector<std::size_t> charts_per_level() const;

    // Assembles an atlas from explicit charts (edges certified here).
    static Atlas from_charts(PolyC normalized_poly, Complex level, std::vector<AtlasChart> charts,
                             AtlasMode mode, double rho_min);

private:
    friend Atlas build_atlas(const PolyC&, Complex, double, double, const AtlasConfig&);
    void index_charts();
    void certify_edges();

    PolyC poly_;
    Complex level_ = 0.0;
    AtlasMode mode_ = AtlasMode::practical;
    double K_ = 0.0, delta_ = 0.0, gamma_ = 0.0, M_ = 0.0, rho_min_ = 0.0;
    SingularSet sing_;
    std::vector<AtlasChart> charts_;
    std::vector<AtlasEdge> edges_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj_;
    ChartIndex index_;
    CoverageReport coverage_;
    std::size_t whitney_balls_ = 0;
    std::size_t balls_used_ = 0;
};

double faithful_gamma(int n, int d, double K);
double kappa_bound(int n, int d, double K, double delta);
double log_C1(int n, int d);  // natural log of (4000 n^2 d^5)^{2n}
double C2(int n, int d);

// Minimum-norm Newton projection of z onto {P = c}.
std::optional<CVector> project_to_level(const PolyC& p, Complex c, const CVector& z,
                                        int max_iter = 60);

// Builds one chart at a point of Y; throws NumericalError when no radius verifies.
AtlasChart make_atlas_chart(const PolyC& normalized_poly, Complex level, const CVector& base,
                            std::size_t ball_index, int ball_level, double ball_radius,
                            AtlasMode mode, const AtlasConfig& config, int* radius_hint = nullptr);

OverlapCertificate certify_overlap(const PolyC& p, Complex c, const AtlasChart& a,
                                   const AtlasChart& b);

// Whitney cover of the realified cube around the punctures, restricted to cubes that may meet {Pn = cn}.
WhitneyCover level_set_cover(const PolyC& normalized_poly, Complex level, const std::vector<RVector>& punctures,
                             double delta, double gamma, double cube_budget);

struct BallCount {
    std::size_t candidates = 0;  // cubes not excluded by the majorant test
    std::size_t meeting = 0;     // Newton projection of the center lands in the ball
    std::vector<std::size_t> per_level;
};

// One-chart-per-ball count of the level set (no charts are built).
BallCount balls_meeting_level(const PolyC& P, Complex c, const std::vector<CVector>& singular, double delta,
                              double gamma, double cube_budget = 3e7);

Atlas build_atlas(const PolyC& P, Complex c, double K, double delta, const AtlasConfig& config = {});

double rho_lower_bound(const Atlas& atlas, std::size_t i, std::size_t j);

struct ChartChain {
    std::vector<std::size_t> charts;
    std::vector<double> rho;  // per consecutive pair
    double rho_omega = 0.0;   // rho(first chart, Omega) when anchored
    std::size_t length() const { return charts.size(); }
};

ChartChain chain_between(const Atlas& atlas, const CVector& u1, const CVector& u2);

double poincare_distance(Complex a, Complex b);

struct KobayashiLink {
    std::size_t chart = 0;
    Complex a, b;  // pulled-back pair in the unit disk
    double distance = 0.0;
    bool in_third_disk = false;
    bool within_bound = false;
};

struct KobayashiResult {
    ChartChain chain;
    double bound = 0.0;
    std::vector<KobayashiLink> links;
    bool mechanism_ok = false;
};

KobayashiResult kobayashi_bound(const Atlas& atlas, const CVector& p, const CVector& q);

std::string to_json(const Atlas& atlas);

}  // namespace doubling
