#include "doubling/ift.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

namespace doubling {

namespace {

nlohmann::json complex_json(Complex c) { return nlohmann::json::array({c.real(), c.imag()}); }

}  // namespace

double chart_radius(double eta, double M, int n) {
    if (n < 2) throw DomainError("chart_radius needs n >= 2");
    if (!(eta > 0.0)) throw DomainError("gradient vanishes: point is near-critical");
    if (!(M > 0.0)) throw DomainError("second-derivative bound must be positive");
    return eta / (50.0 * M * std::sqrt(2.0 * n * (n - 1)));
}

UnitaryFrame align_frame(const CVector& z0, const CVector& grad) {
    const int n = static_cast<int>(grad.size());
    if (z0.size() != n) throw DomainError("frame origin dimension mismatch");
    double g = grad.norm();
    if (!(g > 0.0)) throw DomainError("zero gradient");
    CVector w = grad.conjugate() / g;
    double mag = std::abs(w[n - 1]);
    if (mag > 0.0) w *= std::conj(w[n - 1]) / mag;  // w_n real, non-negative
    w[n - 1] = Complex(std::abs(w[n - 1]), 0.0);
    CVector u = -w;
    u[n - 1] += 1.0;
    CMatrix U = CMatrix::Identity(n, n);
    double uu = u.squaredNorm();
    if (uu > 1e-300) U -= (2.0 / uu) * (u * u.adjoint());
    return UnitaryFrame{U, z0};
}

ImplicitChart::ImplicitChart(PolyC poly, Complex level, UnitaryFrame frame, double theta, double M)
    : poly_(std::move(poly)), level_(level), M_(M) {
    const int n = poly_.dimension();
    if (frame.matrix.rows() != n || frame.matrix.cols() != n || frame.origin.size() != n)
        throw DomainError("frame dimension mismatch");
    if ((frame.matrix.adjoint() * frame.matrix - CMatrix::Identity(n, n)).norm() > 1e-12)
        throw DomainError("frame is not unitary");
    auto vg = poly_.eval_grad(frame.origin);
    double scale = std::max(1.0, l1_norm(poly_));
    if (std::abs(vg.value - level_) > 1e-10 * scale) throw DomainError("chart origin is not on the level set");
    eta_ = vg.grad.norm();
    double cap = chart_radius(eta_, M_, n);
    if (!(theta > 0.0) || theta > cap * (1.0 + 1e-12))
        throw DomainError("diskoball radius exceeds the implicit-function radius");
    db_ = DiskoBall{std::move(frame), theta};
}

CVector ImplicitChart::to_ambient(const CVector& vbar, Complex vn) const {
    const int n = dimension();
    CVector v(n);
    v.head(n - 1) = vbar;
    v[n - 1] = vn;
    return db_.frame.origin + db_.frame.matrix * v;
}

CVector ImplicitChart::to_frame(const CVector& z) const {
    return db_.frame.matrix.adjoint() * (z - db_.frame.origin);
}

Complex ImplicitChart::residual(const CVector& vbar, Complex vn) const {
    return poly_(to_ambient(vbar, vn)) - level_;
}

CVector ImplicitChart::frame_gradient(const CVector& vbar, Complex vn) const {
    CVector g = poly_.eval_grad(to_ambient(vbar, vn)).grad;
    return db_.frame.matrix.transpose() * g;
}

CVector ImplicitChart::grad_phi(const CVector& vbar, Complex vn) const {
    const int n = dimension();
    CVector df = frame_gradient(vbar, vn);
    if (df[n - 1] == Complex(0.0)) throw NumericalError("normal derivative vanishes");
    return -df.head(n - 1) / df[n - 1];
}

std::optional<Complex> ImplicitChart::try_solve(const CVector& vbar, double bound, Complex guess) const {
    const int n = dimension();
    if (vbar.size() != n - 1) throw DomainError("vbar dimension mismatch");
    Complex t = guess;
    const CMatrix& U = db_.frame.matrix;
    const CVector base = db_.frame.origin + U.leftCols(n - 1) * vbar;
    const CVector normal = U.col(n - 1);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        auto vg = poly_.eval_grad(base + t * normal);
        Complex g = vg.value - level_;
        if (std::abs(g) <= kTolResidual) return std::abs(t) <= bound ? std::optional<Complex>(t) : std::nullopt;
        Complex dg = vg.grad.cwiseProduct(normal).sum();
        if (dg == Complex(0.0)) return std::nullopt;
        Complex step = g / dg;
        t -= step;
        if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) return std::nullopt;
        if (std::abs(t) > 4.0 * bound + 1.0) return std::nullopt;
        if (std::abs(step) <= 1e-15 * std::max(std::abs(t), bound)) {
            Complex r = poly_(base + t * normal) - level_;
            if (std::abs(r) <= 1e2 * kTolResidual && std::abs(t) <= bound) return t;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<Complex> ImplicitChart::solve_along(const CVector& vbar, double bound) const {
    if (auto t = try_solve(vbar, bound)) return t;
    const int steps = 16;
    Complex t = 0.0;
    for (int k = 1; k <= steps; ++k) {
        auto r = try_solve(vbar * (static_cast<double>(k) / steps), bound, t);
        if (!r) return std::nullopt;
        t = *r;
    }
    return t;
}

Complex ImplicitChart::solve(const CVector& vbar) const {
    if (vbar.size() != dimension() - 1) throw DomainError("vbar dimension mismatch");
    if (vbar.norm() > theta() * (1.0 + 1e-12)) throw DomainError("point lies outside the chart ball");
    auto t = solve_along(vbar, theta());
    if (!t) throw NumericalError("implicit solve did not converge");
    return *t;
}

int ImplicitChart::winding(const CVector& vbar, double radius) const {
    const int n = dimension();
    const CVector base = db_.frame.origin + db_.frame.matrix.leftCols(n - 1) * vbar;
    const CVector normal = db_.frame.matrix.col(n - 1);
    for (int N = 64; N <= (1 << 14); N *= 2) {
        double total = 0.0;
        bool fine = true;
        Complex prev = poly_(base + radius * normal) - level_;
        if (std::abs(prev) < 1e-300) return -1;
        for (int k = 1; k <= N && fine; ++k) {
            double a = 2.0 * std::numbers::pi * k / N;
            Complex cur = poly_(base + radius * std::polar(1.0, a) * normal) - level_;
            if (std::abs(cur) < 1e-300) return -1;
            double d = std::arg(cur / prev);
            if (std::abs(d) > std::numbers::pi / 4) fine = false;
            total += d;
            prev = cur;
        }
        if (fine) return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    }
    return -1;
}

Complex solve_implicit(const ImplicitChart& chart, const CVector& vbar) { return chart.solve(vbar); }

CVector sample_complex_ball(std::mt19937_64& rng, int k, double r, bool on_boundary) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CVector v(k);
    for (int i = 0; i < k; ++i) v[i] = Complex(g(rng), g(rng));
    double nv = v.norm();
    if (nv == 0.0) {
        v.setZero();
        v[0] = 1.0;
        nv = 1.0;
    }
    double rad = on_boundary ? r : r * std::pow(u(rng), 1.0 / (2.0 * k));
    return v * (rad / nv);
}

ExtensionCertifier::ExtensionCertifier(const ImplicitChart& chart) {
    const int n = chart.dimension();
    PolyC F = chart.poly().compose_affine(chart.origin(), chart.frame().matrix).plus_constant(-chart.level());
    for (int j = 0; j < n - 1; ++j) tangent_.push_back(F.derivative(j));
    PolyC dn = F.derivative(n - 1);
    Complex c0 = dn.coefficient(MultiIndex(n, 0));
    eta_ = std::abs(c0);
    normal_ = dn.plus_constant(-c0);
}

ExtensionBound ExtensionCertifier::at(double r) const {
    ExtensionBound b;
    b.radius = r;
    b.drift = polydisk_bound(normal_, r);
    double t2 = 0.0;
    for (const auto& q : tangent_) {
        double t = polydisk_bound(q, r);
        t2 += t * t;
    }
    b.tangent = std::sqrt(t2);
    if (b.drift < eta_) {
        b.slope = b.tangent / (eta_ - b.drift);
        b.ok = b.slope < 1.0;
    } else {
        b.slope = std::numeric_limits<double>::infinity();
    }
    return b;
}

ChartCertificate verify_graph(const ImplicitChart& chart, const GraphTargets& targets, int samples,
                              std::uint64_t seed) {
    ChartCertificate cert;
    cert.radius = targets.radius;
    const int n = chart.dimension();
    std::mt19937_64 rng(seed);
    const double r = targets.radius;
    for (int s = 0; s < samples; ++s) {
        CVector vbar = s == 0 ? CVector(CVector::Zero(n - 1))
                              : sample_complex_ball(rng, n - 1, r, s % 4 == 1);
        auto t = chart.solve_along(vbar, r);
        ++cert.samples;
        if (!t) {
            cert.converged = false;
            break;
        }
        double res = std::abs(chart.residual(vbar, *t));
        cert.max_residual = std::max(cert.max_residual, res);
        cert.max_grad_phi = std::max(cert.max_grad_phi, chart.grad_phi(vbar, *t).norm());
        cert.max_phi_ratio = std::max(cert.max_phi_ratio, std::abs(*t) / r);
    }
    int lines = std::min(targets.uniqueness_lines, std::max(samples, 1));
    std::mt19937_64 line_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (int l = 0; l < lines && cert.converged; ++l) {
        CVector vbar = l == 0 ? CVector(CVector::Zero(n - 1))
                              : sample_complex_ball(line_rng, n - 1, r, l % 2 == 1);
        ++cert.lines_checked;
        if (chart.winding(vbar, r) != 1) {
            cert.unique = false;
            break;
        }
    }
    cert.distortion = 1.0 / std::sqrt(1.0 + cert.max_grad_phi * cert.max_grad_phi);
    cert.slope_ok = cert.max_grad_phi <= targets.max_slope;
    cert.tube_ok = cert.max_phi_ratio <= targets.max_tube;
    cert.residual_ok = cert.max_residual <= targets.max_residual;
    cert.passed = cert.converged && cert.unique && cert.slope_ok && cert.tube_ok && cert.residual_ok;
    return cert;
}

ChartCertificate verify_chart(const ImplicitChart& chart, int samples, std::uint64_t seed) {
    GraphTargets t;
    t.radius = chart.theta();
    ChartCertificate c = verify_graph(chart, t, samples, seed);
    c.passed = c.passed && c.distortion >= 0.99;
    return c;
}

std::string to_json(const ImplicitChart& chart) {
    nlohmann::json doc;
    nlohmann::json origin = nlohmann::json::array();
    for (int i = 0; i < chart.origin().size(); ++i) origin.push_back(complex_json(chart.origin()[i]));
    nlohmann::json frame = nlohmann::json::array();
    const CMatrix& U = chart.frame().matrix;
    for (int i = 0; i < U.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < U.cols(); ++j) row.push_back(complex_json(U(i, j)));
        frame.push_back(row);
    }
    doc["origin"] = origin;
    doc["frame"] = frame;
    doc["theta"] = chart.theta();
    doc["eta"] = chart.eta();
    doc["M"] = chart.M();
    doc["level"] = complex_json(chart.level());
    return doc.dump();
}

}  // namespace doubling
