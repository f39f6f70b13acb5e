#include "doubling/polyalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace doubling {

namespace {

using PowTable = std::array<std::array<Complex, kMaxDegree + 1>, kMaxDim>;

void fill_powers(PowTable& pw, const CVector& z, int n, int d) {
    for (int i = 0; i < n; ++i) {
        pw[i][0] = 1.0;
        for (int e = 1; e <= d; ++e) pw[i][e] = pw[i][e - 1] * z[i];
    }
}

Complex ipow(Complex z, int e) {
    Complex r = 1.0;
    for (int i = 0; i < e; ++i) r *= z;
    return r;
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

PolyC::PolyC(int n) : n_(n) {
    if (n < 1 || n > kMaxDim) throw DomainError("polynomial dimension out of range");
}

PolyC::PolyC(int n, const TermMap& terms) : n_(n) {
    if (n < 1 || n > kMaxDim) throw DomainError("polynomial dimension out of range");
    for (const auto& [alpha, c] : terms) {
        if (static_cast<int>(alpha.size()) != n)
            throw DomainError("multi-index length does not match dimension");
        for (int e : alpha)
            if (e < 0) throw DomainError("negative exponent");
        if (c != Complex(0.0)) terms_.emplace(alpha, c);
    }
    rebuild();
}

void PolyC::rebuild() {
    degree_ = 0;
    coeffs_.clear();
    exps_.clear();
    for (const auto& [alpha, c] : terms_) {
        int deg = 0;
        for (int e : alpha) deg += e;
        if (deg > kMaxDegree) throw DomainError("polynomial degree too large");
        degree_ = std::max(degree_, deg);
        coeffs_.push_back(c);
        for (int e : alpha) exps_.push_back(static_cast<std::uint8_t>(e));
    }
}

Complex PolyC::coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? Complex(0.0) : it->second;
}

Complex PolyC::operator()(const CVector& z) const {
    if (z.size() != n_) throw DomainError("point dimension mismatch");
    PowTable pw;
    fill_powers(pw, z, n_, degree_);
    Complex v = 0.0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
        const std::uint8_t* a = &exps_[t * n_];
        Complex m = coeffs_[t];
        for (int i = 0; i < n_; ++i) m *= pw[i][a[i]];
        v += m;
    }
    return v;
}

ValueGrad PolyC::eval_grad(const CVector& z) const {
    if (z.size() != n_) throw DomainError("point dimension mismatch");
    PowTable pw;
    fill_powers(pw, z, n_, degree_);
    ValueGrad out{0.0, CVector::Zero(n_)};
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
        const std::uint8_t* a = &exps_[t * n_];
        Complex m = coeffs_[t];
        for (int i = 0; i < n_; ++i) m *= pw[i][a[i]];
        out.value += m;
        for (int k = 0; k < n_; ++k) {
            if (a[k] == 0) continue;
            Complex g = coeffs_[t] * static_cast<double>(a[k]);
            for (int i = 0; i < n_; ++i) g *= pw[i][i == k ? a[i] - 1 : a[i]];
            out.grad[k] += g;
        }
    }
    return out;
}

CMatrix PolyC::hessian(const CVector& z) const {
    if (z.size() != n_) throw DomainError("point dimension mismatch");
    PowTable pw;
    fill_powers(pw, z, n_, degree_);
    CMatrix h = CMatrix::Zero(n_, n_);
    std::array<int, kMaxDim> e{};
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
        const std::uint8_t* a = &exps_[t * n_];
        for (int j = 0; j < n_; ++j) {
            for (int k = j; k < n_; ++k) {
                for (int i = 0; i < n_; ++i) e[i] = a[i];
                double f = e[j];
                e[j] -= 1;
                f *= e[k];
                e[k] -= 1;
                if (f == 0.0) continue;
                Complex g = coeffs_[t] * f;
                for (int i = 0; i < n_; ++i) g *= pw[i][e[i]];
                h(j, k) += g;
                if (k != j) h(k, j) += g;
            }
        }
    }
    return h;
}

PolyC PolyC::operator+(const PolyC& other) const {
    if (other.n_ != n_) throw DomainError("dimension mismatch");
    TermMap t = terms_;
    for (const auto& [a, c] : other.terms_) t[a] += c;
    return PolyC(n_, t);
}

PolyC PolyC::operator-(const PolyC& other) const { return *this + other.scaled(-1.0); }

PolyC PolyC::operator*(const PolyC& other) const {
    if (other.n_ != n_) throw DomainError("dimension mismatch");
    TermMap t;
    MultiIndex s(n_);
    for (const auto& [a, c] : terms_) {
        for (const auto& [b, e] : other.terms_) {
            for (int i = 0; i < n_; ++i) s[i] = a[i] + b[i];
            t[s] += c * e;
        }
    }
    return PolyC(n_, t);
}

PolyC PolyC::scaled(Complex s) const {
    TermMap t;
    for (const auto& [a, c] : terms_) t.emplace(a, c * s);
    return PolyC(n_, t);
}

PolyC PolyC::plus_constant(Complex c) const {
    TermMap t = terms_;
    t[MultiIndex(n_, 0)] += c;
    return PolyC(n_, t);
}

PolyC PolyC::derivative(int var) const {
    if (var < 0 || var >= n_) throw DomainError("variable index out of range");
    TermMap t;
    for (const auto& [a, c] : terms_) {
        if (a[var] == 0) continue;
        MultiIndex b = a;
        b[var] -= 1;
        t[b] += c * static_cast<double>(a[var]);
    }
    return PolyC(n_, t);
}

PolyC PolyC::shifted(const CVector& center) const {
    if (center.size() != n_) throw DomainError("point dimension mismatch");
    TermMap out;
    std::vector<std::vector<Complex>> factors(n_);
    MultiIndex beta(n_);
    for (const auto& [a, c] : terms_) {
        for (int i = 0; i < n_; ++i) {
            factors[i].assign(a[i] + 1, 0.0);
            for (int j = 0; j <= a[i]; ++j)
                factors[i][j] = binom(a[i], j) * ipow(center[i], a[i] - j);
        }
        // odometer over beta <= alpha
        std::fill(beta.begin(), beta.end(), 0);
        while (true) {
            Complex m = c;
            for (int i = 0; i < n_; ++i) m *= factors[i][beta[i]];
            out[beta] += m;
            int i = 0;
            while (i < n_ && beta[i] == a[i]) beta[i++] = 0;
            if (i == n_) break;
            ++beta[i];
        }
    }
    return PolyC(n_, out);
}

PolyC PolyC::compose_affine(const CVector& a, const CMatrix& M) const {
    if (a.size() != n_ || M.rows() != n_) throw DomainError("affine map dimension mismatch");
    const int m = static_cast<int>(M.cols());
    std::vector<std::vector<PolyC>> powers(n_);
    for (int i = 0; i < n_; ++i) {
        TermMap lin;
        lin[MultiIndex(m, 0)] += a[i];
        for (int k = 0; k < m; ++k) {
            MultiIndex e(m, 0);
            e[k] = 1;
            lin[e] += M(i, k);
        }
        PolyC li(m, lin);
        powers[i].push_back(constant_poly(m, 1.0));
        for (int e = 1; e <= degree_; ++e) powers[i].push_back(powers[i].back() * li);
    }
    TermMap out;
    for (const auto& [alpha, c] : terms_) {
        PolyC prod = constant_poly(m, c);
        for (int i = 0; i < n_; ++i)
            if (alpha[i] > 0) prod = prod * powers[i][alpha[i]];
        for (const auto& [b, v] : prod.terms()) out[b] += v;
    }
    return PolyC(m, out);
}

PolyC monomial(int n, const MultiIndex& alpha, Complex coeff) {
    return PolyC(n, {{alpha, coeff}});
}

PolyC constant_poly(int n, Complex c) { return monomial(n, MultiIndex(n, 0), c); }

PolyC variable(int n, int var) {
    MultiIndex a(n, 0);
    a.at(var) = 1;
    return monomial(n, a);
}

double l1_norm(const PolyC& p) {
    double s = 0.0;
    for (const auto& [a, c] : p.terms()) s += std::abs(c);
    return s;
}

PolyC normalized(const PolyC& p) {
    double s = l1_norm(p);
    if (s == 0.0) throw DomainError("cannot normalize the zero polynomial");
    return p.scaled(1.0 / s);
}

ValueGrad eval_grad(const PolyC& p, const CVector& z) { return p.eval_grad(z); }

double markov_M(const PolyC& p) {
    if (p.is_zero()) throw DomainError("markov bound of the zero polynomial");
    if (p.degree() < 1) throw DomainError("markov bound needs degree >= 1");
    double d = p.degree();
    return p.dimension() * d * d * d * d * l1_norm(p);
}

double taylor_tail(const PolyC& q, double r) {
    double s = 0.0;
    for (const auto& [b, c] : q.terms()) {
        int deg = 0;
        for (int e : b) deg += e;
        if (deg > 0) s += std::abs(c) * std::pow(r, deg);
    }
    return s;
}

double polydisk_bound(const PolyC& q, double r) {
    double s = 0.0;
    for (const auto& [b, c] : q.terms()) {
        int deg = 0;
        for (int e : b) deg += e;
        s += std::abs(c) * std::pow(r, deg);
    }
    return s;
}

double gradient_bound(const PolyC& p, const CVector& center, double r) {
    double total = 0.0;
    for (int k = 0; k < p.dimension(); ++k) {
        double s = polydisk_bound(p.derivative(k).shifted(center), r);
        total += s * s;
    }
    return std::sqrt(total);
}

bool SingularSet::all_nondegenerate() const {
    return std::all_of(nondegenerate.begin(), nondegenerate.end(), [](bool b) { return b; });
}

double SingularSet::distance(const CVector& z) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : points) best = std::min(best, (z - w).norm());
    return best;
}

SingularSet make_singular_set(const PolyC& p, const std::vector<CVector>& points) {
    SingularSet s;
    for (const auto& w : points) {
        if (w.size() != p.dimension()) throw DomainError("singular point dimension mismatch");
        if (p.eval_grad(w).grad.norm() > kTolSingular)
            throw DomainError("supplied point is not a critical point");
        s.points.push_back(w);
        s.nondegenerate.push_back(std::abs(p.hessian(w).determinant()) >= kTolHessianDet);
    }
    return s;
}

SingularSet find_singular_points(const PolyC& p, int grid_per_axis, double box) {
    const int n = p.dimension();
    const int m = 2 * n;
    if (grid_per_axis < 1) throw DomainError("grid must have at least one node per axis");
    std::vector<CVector> found;
    std::vector<int> idx(m, 0);
    while (true) {
        RVector x(m);
        for (int i = 0; i < m; ++i)
            x[i] = grid_per_axis == 1 ? 0.0
                                      : -box + 2.0 * box * idx[i] / (grid_per_axis - 1);
        CVector z = complexify(x);
        for (int it = 0; it < 80; ++it) {
            CVector g = p.eval_grad(z).grad;
            if (g.norm() < 1e-15) break;
            CMatrix h = p.hessian(z);
            Eigen::FullPivLU<CMatrix> lu(h);
            if (!lu.isInvertible()) break;
            CVector step = lu.solve(g);
            z -= step;
            if (step.norm() < 1e-16 * (1.0 + z.norm())) break;
            if (z.norm() > 1e6) break;
        }
        if (p.eval_grad(z).grad.norm() <= kTolSingular) {
            bool dup = false;
            for (const auto& w : found)
                if ((w - z).norm() < 1e-7) dup = true;
            if (!dup) found.push_back(z);
        }
        int i = 0;
        while (i < m && idx[i] == grid_per_axis - 1) idx[i++] = 0;
        if (i == m) break;
        ++idx[i];
    }
    std::sort(found.begin(), found.end(), [](const CVector& a, const CVector& b) {
        for (int i = 0; i < a.size(); ++i) {
            if (std::abs(a[i].real() - b[i].real()) > 1e-9) return a[i].real() < b[i].real();
            if (std::abs(a[i].imag() - b[i].imag()) > 1e-9) return a[i].imag() < b[i].imag();
        }
        return false;
    });
    SingularSet s = make_singular_set(p, found);
    std::size_t nondeg = std::count(s.nondegenerate.begin(), s.nondegenerate.end(), true);
    double cap = std::pow(static_cast<double>(std::max(p.degree() - 1, 0)), n);
    if (static_cast<double>(nondeg) > cap)
        throw NumericalError("singular search found more nondegenerate points than the Bezout cap");
    return s;
}

double estimate_K(const PolyC& p, const SingularSet& sing, int sample_count, std::uint64_t seed) {
    if (sing.points.empty()) throw DomainError("singular set is empty");
    for (std::size_t i = 0; i < sing.points.size(); ++i) {
        if (!sing.nondegenerate[i] ||
            std::abs(p.hessian(sing.points[i]).determinant()) < kTolHessianDet)
            throw DomainError("degenerate or non-isolated singularity");
    }
    if (sample_count < 1) throw DomainError("sample_count must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = p.dimension();
    double best = std::numeric_limits<double>::infinity();
    CVector z(n);
    for (int s = 0; s < sample_count; ++s) {
        for (int i = 0; i < n; ++i) {
            double re = u(rng);
            double im = u(rng);
            z[i] = Complex(re, im);
        }
        double dist = sing.distance(z);
        if (dist == 0.0) continue;
        best = std::min(best, p.eval_grad(z).grad.norm() / dist);
    }
    return best;
}

RVector realify(const CVector& z) {
    RVector x(2 * z.size());
    for (int i = 0; i < z.size(); ++i) {
        x[2 * i] = z[i].real();
        x[2 * i + 1] = z[i].imag();
    }
    return x;
}

CVector complexify(const RVector& x) {
    if (x.size() % 2 != 0) throw DomainError("realified point must have even length");
    CVector z(static_cast<Eigen::Index>(x.size() / 2));
    for (std::size_t i = 0; i < x.size() / 2; ++i) z[i] = Complex(x[2 * i], x[2 * i + 1]);
    return z;
}

}  // namespace doubling
