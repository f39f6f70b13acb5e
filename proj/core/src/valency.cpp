#include "doubling/valency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace doubling {

EulerianTriangle::EulerianTriangle(int n_max) {
    if (n_max < 0) throw DomainError("n_max must be non-negative");
    rows_.resize(n_max + 1);
    rows_[0] = {BigInt(1)};  // A(0,0) = 1 by convention
    for (int n = 1; n <= n_max; ++n) {
        rows_[n].assign(n, BigInt(0));
        for (int k = 0; k < n; ++k) {
            BigInt v = 0;
            if (k >= 1 && k - 1 < static_cast<int>(rows_[n - 1].size())) v += (n - k) * rows_[n - 1][k - 1];
            if (k < static_cast<int>(rows_[n - 1].size())) v += (k + 1) * rows_[n - 1][k];
            rows_[n][k] = v;
        }
    }
}

const BigInt& EulerianTriangle::at(int n, int k) const {
    if (n < 0 || n > n_max()) throw DomainError("eulerian row out of range");
    if (k < 0 || k >= static_cast<int>(rows_[n].size())) throw DomainError("eulerian index out of range");
    return rows_[n][k];
}

const std::vector<BigInt>& EulerianTriangle::row(int n) const {
    if (n < 0 || n > n_max()) throw DomainError("eulerian row out of range");
    return rows_[n];
}

BigInt eulerian(int n, int k) {
    if (n < 1) throw DomainError("eulerian needs n >= 1");
    if (k < 0 || k > n - 1) throw DomainError("eulerian index out of range");
    return EulerianTriangle(n).at(n, k);
}

BigInt eulerian_brute_force(int n, int k) {
    if (n < 1 || n > 10) throw DomainError("brute force limited to 1 <= n <= 10");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    BigInt count = 0;
    do {
        int descents = 0;
        for (int i = 0; i + 1 < n; ++i)
            if (perm[i] > perm[i + 1]) ++descents;
        if (descents == k) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

Complex polylog_neg(int n, Complex z) {
    if (n < 1) throw DomainError("polylog_neg needs n >= 1");
    if (!(std::abs(z) < 1.0)) throw DomainError("polylog_neg needs |z| < 1");
    EulerianTriangle tri(n);
    Complex num = 0.0;
    Complex zk = 1.0;
    for (int k = 1; k <= n; ++k) {
        zk *= z;
        num += tri.at(n, k - 1).convert_to<double>() * zk;
    }
    return num / std::pow(1.0 - z, n + 1);
}

double tail_sum(int p, double alpha) {
    if (p < 1) throw DomainError("tail_sum needs p >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("tail_sum needs 0 < alpha < 1");
    const int s = 2 * p - 1;
    double head = 0.0;
    for (int k = 1; k <= p; ++k) head += std::pow(static_cast<double>(k), s) * std::pow(alpha, k);
    return polylog_neg(s, alpha).real() - head;
}

double DoublingParams::A_prime() const {
    if (p < 1) throw DomainError("valency p must be at least 1");
    if (!(A_p >= 1.0)) throw DomainError("A_p must be at least 1");
    EulerianTriangle tri(2 * p - 1);
    const auto& row = tri.row(2 * p - 1);
    BigInt mx = *std::max_element(row.begin(), row.end());
    return A_p * mx.convert_to<double>();
}

double c_p_constant(const DoublingParams& params, double alpha, double beta) {
    if (!(0.0 < beta && beta < alpha && alpha < 1.0))
        throw DomainError("c_p needs 0 < beta < alpha < 1");
    const int p = params.p;
    return ((p + 1) * std::pow(alpha, p) + params.A_prime() / std::pow(1.0 - alpha, 2 * p + 1)) /
           std::pow(beta, p);
}

double nonconcentric_constant(const DoublingParams& params, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
    return c_p_constant(params, 0.25, 0.125) * c_p_constant(params, 0.5, rho / 4.0);
}

int bezout_valency(int d, int d1) {
    if (d < 1) throw DomainError("degree must be at least 1");
    if (d1 < 0) throw DomainError("degree must be non-negative");
    return std::max(1, d * d1);
}

double concentric_dc_check(const std::function<Complex(Complex)>& f, int p, double alpha,
                           double beta, int boundary_samples) {
    if (p < 1) throw DomainError("valency p must be at least 1");
    if (!(0.0 < beta && beta < alpha)) throw DomainError("need 0 < beta < alpha");
    double ma = 0.0, mb = 0.0;
    for (int k = 0; k < boundary_samples; ++k) {
        Complex u = std::polar(1.0, 2.0 * std::numbers::pi * k / boundary_samples);
        ma = std::max(ma, std::abs(f(alpha * u)));
        mb = std::max(mb, std::abs(f(beta * u)));
    }
    if (mb == 0.0) throw DomainError("function vanishes on the inner circle");
    return ma / mb;
}

}  // namespace doubling
