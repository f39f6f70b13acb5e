#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "doubling/errors.hpp"

namespace doubling {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = std::vector<double>;

using MultiIndex = std::vector<int>;

inline constexpr double kTolSingular = 1e-10;
inline constexpr double kTolHessianDet = 1e-8;
inline constexpr int kMaxDim = 8;
inline constexpr int kMaxDegree = 40;

struct ValueGrad {
    Complex value;
    CVector grad;
};

/// Sparse polynomial in n complex variables. Immutable once built.
class PolyC {
public:
    using TermMap = std::map<MultiIndex, Complex>;

    PolyC() = default;
    explicit PolyC(int n);
    PolyC(int n, const TermMap& terms);

    int dimension() const { return n_; }
    int degree() const { return degree_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }
    Complex coefficient(const MultiIndex& alpha) const;

    Complex operator()(const CVector& z) const;
    ValueGrad eval_grad(const CVector& z) const;
    CMatrix hessian(const CVector& z) const;

    PolyC operator+(const PolyC& other) const;
    PolyC operator-(const PolyC& other) const;
    PolyC operator*(const PolyC& other) const;
    PolyC scaled(Complex s) const;
    PolyC plus_constant(Complex c) const;
    PolyC derivative(int var) const;

    // Re-expansion around `center`: returns Q with Q(h) = P(center + h).
    PolyC shifted(const CVector& center) const;

    // P(a + M w) as a polynomial in w (M is n x cols).
    PolyC compose_affine(const CVector& a, const CMatrix& M) const;

private:
    void rebuild();

    int n_ = 0;
    int degree_ = 0;
    TermMap terms_;
    // flat copy for evaluation
    std::vector<Complex> coeffs_;
    std::vector<std::uint8_t> exps_;
};

PolyC monomial(int n, const MultiIndex& alpha, Complex coeff = 1.0);
PolyC constant_poly(int n, Complex c);
PolyC variable(int n, int var);

PolyC parse_poly(std::string_view text, int n);
PolyC parse_poly_json(std::string_view json_text, int n);
std::string to_json(const PolyC& p);
std::string to_string(const PolyC& p);

double l1_norm(const PolyC& p);
PolyC normalized(const PolyC& p);
ValueGrad eval_grad(const PolyC& p, const CVector& z);
double markov_M(const PolyC& p);

// Sum of |b_beta| r^|beta| over the non-constant terms of P(center + h).
double taylor_tail(const PolyC& shifted_poly, double r);
// Sum of |b_beta| r^|beta| over all terms (bound of sup |Q| on the polydisk of radius r).
double polydisk_bound(const PolyC& q, double r);
// Upper bound of ||grad P|| on the closed polydisk of radius r around center.
double gradient_bound(const PolyC& p, const CVector& center, double r);

struct SingularSet {
    std::vector<CVector> points;
    std::vector<bool> nondegenerate;

    std::size_t size() const { return points.size(); }
    bool all_nondegenerate() const;
    double distance(const CVector& z) const;
};

// Validates user-supplied singular points: gradient vanishes and Hessian is checked.
SingularSet make_singular_set(const PolyC& p, const std::vector<CVector>& points);

// Seeded Newton search on grad P = 0 started from a grid over the realified cube.
SingularSet find_singular_points(const PolyC& p, int grid_per_axis = 5, double box = 1.5);

double estimate_K(const PolyC& p, const SingularSet& sing, int sample_count,
                  std::uint64_t seed = 0);

// Realification helpers: (Re z1, Im z1, Re z2, ...).
RVector realify(const CVector& z);
CVector complexify(const RVector& x);

}  // namespace doubling
