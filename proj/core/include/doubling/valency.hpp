#pragma once

#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "doubling/polyalg.hpp"

namespace doubling {

using BigInt = boost::multiprecision::cpp_int;

/// Eulerian numbers A(n, k): permutations of n letters with exactly k descents, 0 <= k <= n-1.
class EulerianTriangle {
public:
    explicit EulerianTriangle(int n_max);
    int n_max() const { return static_cast<int>(rows_.size()) - 1; }
    const BigInt& at(int n, int k) const;
    const std::vector<BigInt>& row(int n) const;

private:
    std::vector<std::vector<BigInt>> rows_;
};

BigInt eulerian(int n, int k);
// Descent count over all permutations of {1..n}; test oracle.
BigInt eulerian_brute_force(int n, int k);

Complex polylog_neg(int n, Complex z);
double tail_sum(int p, double alpha);

struct DoublingParams {
    int p = 1;
    double A_p = 1.0;

    // A_p * max_k A(2p-1, k)
    double A_prime() const;
};

double c_p_constant(const DoublingParams& params, double alpha, double beta);
double nonconcentric_constant(const DoublingParams& params, double rho);
int bezout_valency(int d, int d1);

// max over |z| = alpha of |f| divided by max over |z| = beta, by boundary sampling.
double concentric_dc_check(const std::function<Complex(Complex)>& f, int p, double alpha, double beta,
                           int boundary_samples = 4096);

}  // namespace doubling
