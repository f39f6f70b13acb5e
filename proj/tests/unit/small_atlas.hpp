#pragma once

#include <vector>

#include "doubling/atlas.hpp"

// Charts on the complex line z2 = (z1 + 1) / 2 with base points on a grid in z1.
// `extra` charts at cell centers are appended after the grid charts.
inline doubling::Atlas small_line_atlas(int rows, int cols, double step, double R, int extra = 0) {
    using namespace doubling;
    PolyC P = normalized(parse_poly("2*z2 - z1", 2));
    const Complex c = 1.0 / 3.0;
    AtlasConfig cfg;
    std::vector<Complex> z1;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) z1.emplace_back(-0.9 + j * step, -0.9 + i * step);
    for (int k = 0; k < extra; ++k)
        z1.emplace_back(-0.9 + (k % (cols - 1) + 0.5) * step, -0.9 + (k / (cols - 1) + 0.5) * step);
    std::vector<AtlasChart> charts;
    for (std::size_t i = 0; i < z1.size(); ++i) {
        CVector z(2);
        z << z1[i], (z1[i] + 1.0) / 2.0;
        charts.push_back(make_atlas_chart(P, c, z, i, 0, R, AtlasMode::practical, cfg));
    }
    return Atlas::from_charts(P, c, std::move(charts), AtlasMode::practical, 0.0);
}
