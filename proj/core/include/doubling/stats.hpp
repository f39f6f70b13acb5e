#pragma once

#include <vector>

namespace doubling {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// least squares y = slope x + intercept
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace doubling
