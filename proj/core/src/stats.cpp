#include "doubling/stats.hpp"

#include <Eigen/Dense>

#include "doubling/errors.hpp"

namespace doubling {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("linear fit needs at least two paired values");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = x[i];
        A(i, 1) = 1.0;
        b[i] = y[i];
    }
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    LinearFit f{c[0], c[1], 1.0};
    double mean = b.mean();
    double ss_tot = (b.array() - mean).square().sum();
    double ss_res = (A * c - b).squaredNorm();
    if (ss_tot > 0.0) f.r2 = 1.0 - ss_res / ss_tot;
    return f;
}

}  // namespace doubling
