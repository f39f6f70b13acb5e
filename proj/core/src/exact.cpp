#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "doubling/whitney.hpp"

namespace doubling {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_rational to_rational(double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite value in exact predicate");
    if (v == 0.0) return cpp_rational(0);
    int e = 0;
    double f = std::frexp(v, &e);
    auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
    e -= 53;
    cpp_rational r{cpp_int(mant)};
    if (e > 0) r *= cpp_rational(cpp_int(1) << e);
    if (e < 0) r /= cpp_rational(cpp_int(1) << (-e));
    return r;
}

enum class Cmp { less, equal, greater };

Cmp compare(const cpp_rational& a, const cpp_rational& b) {
    if (a < b) return Cmp::less;
    if (a > b) return Cmp::greater;
    return Cmp::equal;
}

// Coordinates in units of half an edge: the level-s cube c spans [2c - 2^s, 2c + 2 - 2^s].
double scaled(double x, int level) { return std::ldexp(x, level); }

}  // namespace

bool ball_separated_exact(const SubCube& cube, const RVector& p, double gamma) {
    const int m = static_cast<int>(cube.coords.size());
    if (static_cast<int>(p.size()) != m) throw DomainError("puncture dimension mismatch");
    const double side = std::ldexp(1.0, cube.level);
    double lhs = 0.0;
    for (int i = 0; i < m; ++i) {
        double diff = (2.0 * cube.coords[i] + 1.0 - side) - scaled(p[i], cube.level);
        lhs += diff * diff;
    }
    double rhs = gamma * gamma * m;
    if (std::abs(lhs - rhs) > 1e-9 * (lhs + rhs)) return lhs > rhs;

    cpp_rational lhs_q = 0;
    const cpp_rational side_q{cpp_int(1) << cube.level};
    for (int i = 0; i < m; ++i) {
        cpp_rational diff = cpp_rational(2 * static_cast<std::int64_t>(cube.coords[i]) + 1) - side_q -
                            to_rational(p[i]) * side_q;
        lhs_q += diff * diff;
    }
    cpp_rational g = to_rational(gamma);
    return compare(lhs_q, g * g * m) == Cmp::greater;
}

bool cube_within_exact(const SubCube& cube, const RVector& p, double delta) {
    const int m = static_cast<int>(cube.coords.size());
    if (static_cast<int>(p.size()) != m) throw DomainError("puncture dimension mismatch");
    const double side = std::ldexp(1.0, cube.level);
    double lhs = 0.0;
    for (int i = 0; i < m; ++i) {
        double lo = 2.0 * cube.coords[i] - side;
        double pp = scaled(p[i], cube.level);
        double far = std::max(std::abs(lo - pp), std::abs(lo + 2.0 - pp));
        lhs += far * far;
    }
    double rhs = scaled(delta, cube.level);
    rhs *= rhs;
    if (std::abs(lhs - rhs) > 1e-9 * (lhs + rhs)) return lhs < rhs;

    cpp_rational lhs_q = 0;
    const cpp_rational side_q{cpp_int(1) << cube.level};
    for (int i = 0; i < m; ++i) {
        cpp_rational lo = cpp_rational(2 * static_cast<std::int64_t>(cube.coords[i])) - side_q;
        cpp_rational pp = to_rational(p[i]) * side_q;
        cpp_rational a = abs(lo - pp);
        cpp_rational b = abs(lo + 2 - pp);
        cpp_rational far = a > b ? a : b;
        lhs_q += far * far;
    }
    cpp_rational dd = to_rational(delta) * side_q;
    return compare(lhs_q, dd * dd) != Cmp::greater;
}

}  // namespace doubling
