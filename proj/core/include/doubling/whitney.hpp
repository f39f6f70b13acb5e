#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "doubling/polyalg.hpp"

namespace doubling {

inline constexpr int kMaxLevel = 30;

struct SubCube {
    int level = 0;
    std::vector<std::int32_t> coords;

    double edge() const;
    double radius() const;  // circumscribed, sqrt(m) / 2^s
    RVector center() const;
    bool contains(const RVector& x) const;  // closed cube
};

struct Ball {
    RVector center;
    double radius = 0.0;
};

struct CubeChain {
    std::vector<std::size_t> cubes;
};

// Called on every candidate cube; returning false drops it (and its subtree).
using CubeFilter = std::function<bool(int level, const std::int32_t* coords)>;

struct CoverOptions {
    CubeFilter keep;
    std::size_t max_cubes = 60'000'000;
};

class WhitneyCover {
public:
    int dimension() const { return m_; }
    const std::vector<RVector>& punctures() const { return punctures_; }
    double delta() const { return delta_; }
    double gamma() const { return gamma_; }
    int k() const { return k_; }
    int stop_level() const { return stop_level_; }    // ceil(log2(3 m gamma / delta))
    int final_level() const { return final_level_; }  // level of sigma_final
    bool sigma_inside_delta() const { return sigma_inside_; }
    bool filtered() const { return filtered_; }

    std::size_t size() const { return levels_.size(); }
    int level(std::size_t i) const { return levels_[i]; }
    const std::int32_t* coords(std::size_t i) const { return &coords_[i * m_]; }
    SubCube cube(std::size_t i) const;
    Ball ball(std::size_t i) const;

    // |S_l| for l = 0..final_level
    std::vector<std::size_t> level_counts() const;
    std::size_t sigma_count() const { return sigma_.size() / m_; }
    SubCube sigma_cube(std::size_t i) const;

    std::optional<std::size_t> find(int level, const std::int32_t* coords) const;
    bool in_sigma(int level, const std::int32_t* coords) const;
    std::vector<std::size_t> face_neighbors(std::size_t i) const;
    // retained cubes whose closed cube contains x
    std::vector<std::size_t> containing(const RVector& x) const;
    std::vector<std::pair<std::size_t, std::size_t>> adjacency() const;

private:
    friend WhitneyCover build_cover(int, const std::vector<RVector>&, double, double,
                                    const CoverOptions&);
    int m_ = 0;
    std::vector<RVector> punctures_;
    double delta_ = 0.0;
    double gamma_ = 0.0;
    int k_ = 0;
    int stop_level_ = 0;
    int final_level_ = 0;
    bool sigma_inside_ = false;
    bool filtered_ = false;
    std::vector<std::uint8_t> levels_;
    std::vector<std::int32_t> coords_;
    std::vector<std::size_t> level_offset_;  // size final_level + 2
    std::vector<std::int32_t> sigma_;        // sorted, level final_level
};

int neighborhood_k(int m, double gamma);
int stop_level(int m, double gamma, double delta);
double count_bound(int m, std::size_t d, double gamma, double delta);

// Index range [lo, hi] of the closed level-s cubes containing coordinate x (may lie outside Q).
std::pair<std::int64_t, std::int64_t> containing_range(double x, int level);

WhitneyCover build_cover(int m, const std::vector<RVector>& punctures, double delta,
                         double gamma, const CoverOptions& options = {});
// Dimension taken from the punctures (which must be nonempty).
WhitneyCover build_cover(const std::vector<RVector>& punctures, double delta, double gamma,
                         const CoverOptions& options = {});

// Exact predicates (floating filter with rational fallback).
bool ball_separated_exact(const SubCube& cube, const RVector& puncture, double gamma);
bool cube_within_exact(const SubCube& cube, const RVector& p, double delta);

double intersection_ball_radius(const Ball& b1, const Ball& b2);

CubeChain find_chain(const WhitneyCover& cover, const RVector& v, const RVector& w);

std::string to_json(const WhitneyCover& cover, bool with_adjacency = true);

}  // namespace doubling
