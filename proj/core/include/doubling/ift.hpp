#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "doubling/polyalg.hpp"

namespace doubling {

inline constexpr double kTolResidual = 1e-12;
inline constexpr int kNewtonMaxIter = 50;

struct UnitaryFrame {
    CMatrix matrix;  // columns are the frame axes; the last one is normal to the level set
    CVector origin;
};

struct DiskoBall {
    UnitaryFrame frame;
    double radius = 0.0;
};

double chart_radius(double eta, double M, int n);

// Householder frame whose last column is conj(grad)/|grad| (phase chosen so U(n-1,n-1) >= 0).
UnitaryFrame align_frame(const CVector& z0, const CVector& grad);

/// Local graph description z_n = phi(z_1..z_{n-1}) of {P = c} in frame coordinates.
class ImplicitChart {
public:
    ImplicitChart() = default;
    ImplicitChart(PolyC poly, Complex level, UnitaryFrame frame, double theta, double M);

    int dimension() const { return poly_.dimension(); }
    const PolyC& poly() const { return poly_; }
    Complex level() const { return level_; }
    const DiskoBall& diskoball() const { return db_; }
    const UnitaryFrame& frame() const { return db_.frame; }
    const CVector& origin() const { return db_.frame.origin; }
    double theta() const { return db_.radius; }
    double eta() const { return eta_; }
    double M() const { return M_; }

    CVector to_ambient(const CVector& vbar, Complex vn) const;
    CVector to_frame(const CVector& z) const;  // full frame coordinates U^*(z - origin)

    Complex residual(const CVector& vbar, Complex vn) const;
    // df/dv in frame coordinates
    CVector frame_gradient(const CVector& vbar, Complex vn) const;
    CVector grad_phi(const CVector& vbar, Complex vn) const;

    // Newton on the last frame coordinate; the root must satisfy |v_n| <= bound.
    std::optional<Complex> try_solve(const CVector& vbar, double bound, Complex guess = 0.0) const;
    // try_solve from 0, then continuation along the segment [0, vbar]
    std::optional<Complex> solve_along(const CVector& vbar, double bound) const;
    // requires |vbar| <= theta
    Complex solve(const CVector& vbar) const;

    // number of zeros of t -> f(vbar, t) in |t| < radius (argument principle); -1 if inconclusive
    int winding(const CVector& vbar, double radius) const;

private:
    PolyC poly_;
    Complex level_;
    DiskoBall db_;
    double eta_ = 0.0;
    double M_ = 0.0;
};

// Same function as ImplicitChart::solve, as a free operation.
Complex solve_implicit(const ImplicitChart& chart, const CVector& vbar);

struct ChartCertificate {
    double radius = 0.0;
    int samples = 0;
    double max_grad_phi = 0.0;
    double max_phi_ratio = 0.0;  // max |phi| / radius
    double max_residual = 0.0;
    double distortion = 1.0;     // 1 / sqrt(1 + L^2)
    int lines_checked = 0;
    bool converged = true;
    bool unique = true;
    bool slope_ok = true;
    bool tube_ok = true;
    bool residual_ok = true;
    bool passed = true;
};

struct GraphTargets {
    double radius = 0.0;
    double max_slope = 1.0 / 49.0;
    double max_tube = 1.0 / 49.0;  // bound on |phi| / radius
    double max_residual = 1e-10;
    int uniqueness_lines = 16;
};

// Checks at radius theta with the 1/49 targets.
ChartCertificate verify_chart(const ImplicitChart& chart, int samples, std::uint64_t seed = 0);
ChartCertificate verify_graph(const ImplicitChart& chart, const GraphTargets& targets, int samples,
                              std::uint64_t seed = 0);

// Majorant bounds for the graph over the closed polydisk |v_i| <= r in frame coordinates:
// drift = sup |df/dv_n - df/dv_n(0)|, tangent = sup |(df/dv_1..df/dv_{n-1})|.
// When drift < eta and slope = tangent / (eta - drift) < 1 the level set is a graph over
// the r-ball with |grad phi| <= slope and |phi| <= slope |vbar|.
struct ExtensionBound {
    double radius = 0.0;
    double drift = 0.0;
    double tangent = 0.0;
    double slope = 0.0;
    bool ok = false;
};

class ExtensionCertifier {
public:
    explicit ExtensionCertifier(const ImplicitChart& chart);
    ExtensionBound at(double r) const;

private:
    std::vector<PolyC> tangent_;
    PolyC normal_;
    double eta_ = 0.0;
};

// Uniform sample of the closed complex ball of radius r in dimension k.
CVector sample_complex_ball(std::mt19937_64& rng, int k, double r, bool on_boundary = false);

std::string to_json(const ImplicitChart& chart);

}  // namespace doubling
