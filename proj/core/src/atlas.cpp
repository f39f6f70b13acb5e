#include "doubling/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include <json.hpp>

namespace doubling {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sum over the non-constant part of P(center + h) for |h_i| <= r, via the majorant series.
double majorant_tail(const PolyC& p, const CVector& center, double r) {
    double s = 0.0;
    for (const auto& [alpha, c] : p.terms()) {
        double full = std::abs(c), at = std::abs(c);
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            double a = std::abs(center[i]);
            full *= std::pow(a + r, alpha[i]);
            at *= std::pow(a, alpha[i]);
        }
        s += full - at;
    }
    return s;
}

bool in_cube(const CVector& z, double slack = 0.0) {
    for (int i = 0; i < z.size(); ++i)
        if (std::abs(z[i].real()) > 1.0 + slack || std::abs(z[i].imag()) > 1.0 + slack) return false;
    return true;
}

CVector cube_center(int level, const std::int32_t* coords, int n) {
    CVector z(n);
    const double h = std::ldexp(1.0, -level);
    for (int i = 0; i < n; ++i)
        z[i] = Complex(-1.0 + (2.0 * coords[2 * i] + 1.0) * h, -1.0 + (2.0 * coords[2 * i + 1] + 1.0) * h);
    return z;
}

CVector sample_real_ball(std::mt19937_64& rng, int n, double r) {
    // uniform in the real 2n-ball, returned as a complex n-vector
    return sample_complex_ball(rng, n, r);
}

}  // namespace

// ---------------------------------------------------------------- charts

double AtlasChart::reach() const { return unit * std::sqrt(1.0 + slope * slope) * (1.0 + 1e-9); }

CVector AtlasChart::psi(const CVector& w) const {
    CVector vbar = unit * w;
    auto t = chart.solve_along(vbar, scale);
    if (!t) throw NumericalError("chart evaluation did not converge");
    return chart.to_ambient(vbar, *t);
}

std::optional<CVector> AtlasChart::unit_coords(const CVector& z, double tol) const {
    const int n = dimension();
    CVector v = chart.to_frame(z);
    CVector vbar = v.head(n - 1);
    if (vbar.norm() > unit * (1.0 + 1e-12)) return std::nullopt;
    if (std::abs(v[n - 1]) >= scale) return std::nullopt;
    auto phi = chart.try_solve(vbar, scale, v[n - 1]);
    if (!phi) return std::nullopt;
    if (std::abs(*phi - v[n - 1]) > tol * std::max(scale, 1e-3)) return std::nullopt;
    return CVector(vbar / unit);
}

// ---------------------------------------------------------------- index

int ChartIndex::scale_of(double reach) const {
    return static_cast<int>(std::ceil(std::log2(std::max(2.0 * reach, 1e-300))));
}

std::uint64_t ChartIndex::key(int scale, const std::int64_t* cell) const {
    std::uint64_t h = mix(static_cast<std::uint64_t>(scale + 4096));
    for (int i = 0; i < 2 * n_; ++i) h = mix(h ^ static_cast<std::uint64_t>(cell[i]));
    return h;
}

void ChartIndex::insert(std::size_t id, const CVector& center, double reach) {
    const int s = scale_of(reach);
    if (std::find(scales_.begin(), scales_.end(), s) == scales_.end()) {
        scales_.push_back(s);
        std::sort(scales_.begin(), scales_.end());
    }
    const double h = std::ldexp(1.0, s);
    RVector x = realify(center);
    const int m = 2 * n_;
    std::vector<std::int64_t> lo(m), hi(m), cur(m);
    for (int i = 0; i < m; ++i) {
        lo[i] = static_cast<std::int64_t>(std::floor((x[i] - reach) / h));
        hi[i] = static_cast<std::int64_t>(std::floor((x[i] + reach) / h));
        cur[i] = lo[i];
    }
    while (true) {
        cells_[key(s, cur.data())].push_back(static_cast<std::uint32_t>(id));
        int i = 0;
        while (i < m && cur[i] == hi[i]) cur[i] = lo[i], ++i;
        if (i == m) break;
        ++cur[i];
    }
}

std::vector<std::size_t> ChartIndex::query(const CVector& z) const {
    std::vector<std::size_t> out;
    RVector x = realify(z);
    const int m = 2 * n_;
    std::vector<std::int64_t> cell(m);
    for (int s : scales_) {
        const double h = std::ldexp(1.0, s);
        for (int i = 0; i < m; ++i) cell[i] = static_cast<std::int64_t>(std::floor(x[i] / h));
        auto it = cells_.find(key(s, cell.data()));
        if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> ChartIndex::query_box(const CVector& center, double reach) const {
    std::vector<std::size_t> out;
    RVector x = realify(center);
    const int m = 2 * n_;
    const int s0 = scale_of(reach);
    std::vector<std::int64_t> lo(m), hi(m), cur(m);
    for (int s : scales_) {
        if (s < s0) continue;
        const double h = std::ldexp(1.0, s);
        for (int i = 0; i < m; ++i) {
            lo[i] = static_cast<std::int64_t>(std::floor((x[i] - reach) / h));
            hi[i] = static_cast<std::int64_t>(std::floor((x[i] + reach) / h));
            cur[i] = lo[i];
        }
        while (true) {
            auto it = cells_.find(key(s, cur.data()));
            if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
            int i = 0;
            while (i < m && cur[i] == hi[i]) cur[i] = lo[i], ++i;
            if (i == m) break;
            ++cur[i];
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------- constants

double faithful_gamma(int n, int d, double K) {
    if (!(K > 0.0)) throw DomainError("K must be positive");
    if (n < 2 || d < 2) throw DomainError("faithful_gamma needs n >= 2 and d >= 2");
    double M = n * std::pow(static_cast<double>(d), 4);
    return 600.0 * M * std::sqrt(2.0 * n * (n - 1)) / K + 1.0;
}

double log_C1(int n, int d) {
    return 2.0 * n * std::log(4000.0 * n * n * std::pow(static_cast<double>(d), 5));
}

double C2(int n, int d) { return 6000.0 * n * n * n * std::pow(static_cast<double>(d), 4); }

double kappa_bound(int n, int d, double K, double delta) {
    if (!(K > 0.0)) throw DomainError("K must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    double lg = std::log2(C2(n, d) / (K * delta));
    if (lg <= 0.0) return 0.0;
    return std::exp(log_C1(n, d) - 2.0 * n * std::log(K)) * lg;
}

// ---------------------------------------------------------------- construction helpers

std::optional<CVector> project_to_level(const PolyC& p, Complex c, const CVector& z0, int max_iter) {
    CVector z = z0;
    for (int it = 0; it < max_iter; ++it) {
        auto vg = p.eval_grad(z);
        Complex r = vg.value - c;
        double g2 = vg.grad.squaredNorm();
        if (std::abs(r) <= 1e-15) return z;
        if (!(g2 > 1e-300)) return std::nullopt;
        CVector step = (r / g2) * vg.grad.conjugate();
        z -= step;
        if (!z.allFinite() || z.norm() > 1e6) return std::nullopt;
        if (step.norm() <= 1e-16 * std::max(1.0, z.norm())) break;
    }
    if (std::abs(p(z) - c) <= 1e-13) return z;
    return std::nullopt;
}

AtlasChart make_atlas_chart(const PolyC& P, Complex c, const CVector& base, std::size_t ball_index,
                            int ball_level, double ball_radius, AtlasMode mode,
                            const AtlasConfig& config, int* radius_hint) {
    const int n = P.dimension();
    auto vg = P.eval_grad(base);
    if (std::abs(vg.value - c) > 1e-10) throw DomainError("chart base point is not on the level set");
    UnitaryFrame frame = align_frame(base, vg.grad);
    const double M = markov_M(P);
    const double theta = chart_radius(vg.grad.norm(), M, n);
    AtlasChart out;
    out.ball_index = ball_index;
    out.level = ball_level;
    out.ball_radius = ball_radius;
    out.chart = ImplicitChart(P, c, frame, theta, M);
    std::uint64_t seed = mix(config.seed ^ mix(ball_index) ^ mix(static_cast<std::uint64_t>(ball_level)));
    ChartCertificate core = verify_chart(out.chart, config.core_samples, seed);
    if (!core.passed) throw NumericalError("implicit chart failed verification");

    if (mode == AtlasMode::faithful) {
        double r = 12.0 * ball_radius;
        if (r > theta * (1.0 + 1e-12)) throw DomainError("gradient too small for a faithful chart of this ball");
        GraphTargets t;
        t.radius = r;
        t.uniqueness_lines = config.uniqueness_lines;
        if (!verify_graph(out.chart, t, config.extension_samples, seed).passed)
            throw NumericalError("faithful chart failed verification");
        out.scale = r;
        out.slope = 1.0 / 49.0;
        out.unit = r / 4.0;
        return out;
    }

    ExtensionCertifier cert(out.chart);
    auto radius = [&](int i) { return 12.0 * ball_radius * std::pow(0.75, i); };
    auto passes = [&](int i) {
        ExtensionBound b = cert.at(radius(i));
        return b.ok && b.slope <= config.extension_slope;
    };
    const int last = 200;
    int i = radius_hint ? std::clamp(*radius_hint, 0, last) : 0;
    int found = -1;
    if (passes(i)) {
        found = i;
        while (found > 0 && passes(found - 1)) --found;
    } else {
        for (++i; i <= last && radius(i) > theta; ++i) {
            if (passes(i)) {
                found = i;
                break;
            }
        }
    }
    if (found >= 0 && radius(found) > theta) {
        ExtensionBound b = cert.at(radius(found));
        GraphTargets t;
        t.radius = b.radius;
        t.max_slope = b.slope * (1.0 + 1e-6) + 1e-12;
        t.max_tube = t.max_slope;
        t.uniqueness_lines = config.uniqueness_lines;
        if (!verify_graph(out.chart, t, config.extension_samples, seed).passed)
            throw NumericalError("extension bound contradicted by sampling");
        out.scale = b.radius;
        out.slope = b.slope;
        if (radius_hint) *radius_hint = found;
    } else {
        out.scale = theta;
        out.slope = 1.0 / 49.0;
    }
    out.unit = out.scale / 4.0;
    return out;
}

namespace {

double overlap_side(const PolyC& p, Complex c, const CVector& y, const AtlasChart& host,
                    const AtlasChart& other) {
    const int n = host.dimension();
    if (std::abs(p(y) - c) > 1e-11) return 0.0;
    CVector vh = host.chart.to_frame(y);
    double wc = vh.head(n - 1).norm() / host.unit;
    if (wc >= 1.0 || std::abs(vh[n - 1]) >= host.scale) return 0.0;
    CVector vo = other.chart.to_frame(y);
    double a = vo.head(n - 1).norm();
    double b = std::abs(vo[n - 1]);
    if (a >= other.unit || b >= other.scale) return 0.0;
    double step = host.unit * std::sqrt(1.0 + host.slope * host.slope);
    double rho = std::min({1.0 - wc, (other.unit - a) / step, (other.scale - b) / step});
    return std::max(0.0, rho * (1.0 - 1e-9) - 1e-12);
}

}  // namespace

OverlapCertificate certify_overlap(const PolyC& p, Complex c, const AtlasChart& a, const AtlasChart& b) {
    std::vector<CVector> witnesses{a.base(), b.base()};
    for (double t : {0.5, 0.25, 0.75}) {
        CVector mid = (1.0 - t) * a.base() + t * b.base();
        if (auto y = project_to_level(p, c, mid)) witnesses.push_back(*y);
    }
    OverlapCertificate best;
    for (const auto& y : witnesses) {
        double r = std::min(overlap_side(p, c, y, a, b), overlap_side(p, c, y, b, a));
        if (r > best.rho) {
            best.rho = r;
            best.witness = y;
        }
    }
    return best;
}

// ---------------------------------------------------------------- atlas

const AtlasEdge* Atlas::edge_between(std::size_t i, std::size_t j) const {
    const auto& nb = adj_.at(i);
    auto it = std::lower_bound(nb.begin(), nb.end(), std::make_pair(j, std::size_t{0}));
    if (it != nb.end() && it->first == j) return &edges_[it->second];
    return nullptr;
}

std::vector<std::size_t> Atlas::charts_containing(const CVector& z) const {
    std::vector<std::size_t> out;
    if (z.size() != dimension()) throw DomainError("point dimension mismatch");
    for (std::size_t id : index_.query(z))
        if (charts_[id].unit_coords(z)) out.push_back(id);
    return out;
}

bool Atlas::on_level_set(const CVector& z, double tol) const {
    return z.size() == dimension() && std::abs(poly_(z) - level_) <= tol;
}

std::vector<std::size_t> Atlas::charts_per_level() const {
    std::vector<std::size_t> out;
    for (const auto& ch : charts_) {
        if (ch.level >= static_cast<int>(out.size())) out.resize(ch.level + 1, 0);
        ++out[ch.level];
    }
    return out;
}

void Atlas::index_charts() {
    index_ = ChartIndex(dimension());
    for (std::size_t i = 0; i < charts_.size(); ++i) index_.insert(i, charts_[i].base(), charts_[i].reach());
}

void Atlas::certify_edges() {
    edges_.clear();
    adj_.assign(charts_.size(), {});
    std::set<std::pair<std::size_t, std::size_t>> tried;
    for (std::size_t i = 0; i < charts_.size(); ++i) {
        const auto& ci = charts_[i];
        for (std::size_t j : index_.query_box(ci.base(), ci.reach())) {
            if (j == i) continue;
            auto key = std::minmax(i, j);
            if (!tried.insert(key).second) continue;
            const auto& cj = charts_[j];
            if ((ci.base() - cj.base()).norm() >= ci.reach() + cj.reach()) continue;
            OverlapCertificate cert = certify_overlap(poly_, level_, charts_[key.first], charts_[key.second]);
            if (cert.rho < rho_min_ || cert.rho <= 0.0) continue;
            edges_.push_back(AtlasEdge{key.first, key.second, cert.rho, cert.witness});
        }
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const AtlasEdge& x, const AtlasEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        adj_[edges_[e].a].emplace_back(edges_[e].b, e);
        adj_[edges_[e].b].emplace_back(edges_[e].a, e);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

Atlas Atlas::from_charts(PolyC poly, Complex level, std::vector<AtlasChart> charts, AtlasMode mode,
                         double rho_min) {
    Atlas a;
    a.poly_ = std::move(poly);
    a.level_ = level;
    a.mode_ = mode;
    a.rho_min_ = rho_min;
    a.M_ = markov_M(a.poly_);
    a.charts_ = std::move(charts);
    a.index_charts();
    a.certify_edges();
    return a;
}

WhitneyCover level_set_cover(const PolyC& Pn, Complex cn, const std::vector<RVector>& punctures, double delta,
                             double gamma, double cube_budget) {
    const int n = Pn.dimension();
    CoverOptions opts;
    opts.max_cubes = static_cast<std::size_t>(cube_budget);
    opts.keep = [&](int level, const std::int32_t* coords) {
        CVector z = cube_center(level, coords, n);
        double R = std::sqrt(2.0 * n) * std::ldexp(1.0, -level);
        double gap = std::abs(Pn(z) - cn);
        return !(gap > majorant_tail(Pn, z, R) * (1.0 + 1e-9) + 1e-14);
    };
    return build_cover(2 * n, punctures, delta, gamma, opts);
}

BallCount balls_meeting_level(const PolyC& P, Complex c, const std::vector<CVector>& singular, double delta,
                              double gamma, double cube_budget) {
    const int n = P.dimension();
    const double norm = l1_norm(P);
    PolyC Pn = P.scaled(1.0 / norm);
    Complex cn = c / norm;
    std::vector<RVector> punctures;
    for (const auto& w : singular) punctures.push_back(realify(w));
    WhitneyCover cover = level_set_cover(Pn, cn, punctures, delta, gamma, cube_budget);
    BallCount out;
    out.candidates = cover.size();
    std::vector<std::size_t> per_level;
    for (std::size_t b = 0; b < cover.size(); ++b) {
        const int level = cover.level(b);
        const double R = std::sqrt(2.0 * n) * std::ldexp(1.0, -level);
        const CVector center = cube_center(level, cover.coords(b), n);
        auto y = project_to_level(Pn, cn, center);
        if (y && (*y - center).norm() <= R) {
            ++out.meeting;
            if (level >= static_cast<int>(out.per_level.size())) out.per_level.resize(level + 1, 0);
            ++out.per_level[level];
        }
    }
    return out;
}

Atlas build_atlas(const PolyC& P, Complex c, double K, double delta, const AtlasConfig& config) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    if (!(K > 0.0)) throw DomainError("K must be positive");
    if (P.degree() < 1) throw DomainError("polynomial must be non-constant");
    const int n = P.dimension();
    if (n < 2) throw DomainError("atlas needs n >= 2");
    const double norm = l1_norm(P);

    Atlas atlas;
    atlas.poly_ = P.scaled(1.0 / norm);
    atlas.level_ = c / norm;
    atlas.mode_ = config.mode;
    atlas.K_ = K;
    atlas.delta_ = delta;
    atlas.M_ = markov_M(atlas.poly_);
    atlas.rho_min_ = config.rho_min;
    const PolyC& Pn = atlas.poly_;
    const Complex cn = atlas.level_;

    atlas.sing_ = config.singular_points.empty() ? find_singular_points(Pn)
                                                 : make_singular_set(Pn, config.singular_points);
    for (const auto& w : atlas.sing_.points)
        if (std::abs(Pn(w) - cn) <= 1e-12) throw DomainError("level is a critical value");

    std::vector<RVector> punctures;
    for (const auto& w : atlas.sing_.points) punctures.push_back(realify(w));

    if (config.mode == AtlasMode::faithful) {
        atlas.gamma_ = faithful_gamma(n, P.degree(), K);
        double estimate = count_bound(2 * n, std::max<std::size_t>(1, punctures.size()), atlas.gamma_, delta);
        if (estimate > config.cube_budget)
            throw BudgetExceeded("faithful construction needs gamma = " + std::to_string(atlas.gamma_) +
                                 " and about " + std::to_string(estimate) +
                                 " cubes; kappa bound = " + std::to_string(kappa_bound(n, P.degree(), K, delta)));
    } else {
        atlas.gamma_ = config.gamma;
    }

    WhitneyCover cover = level_set_cover(Pn, cn, punctures, delta, atlas.gamma_, config.cube_budget);
    atlas.whitney_balls_ = cover.size();
    atlas.index_ = ChartIndex(n);

    auto covered = [&](const CVector& y) {
        for (std::size_t id : atlas.index_.query(y))
            if (atlas.charts_[id].unit_coords(y)) return true;
        return false;
    };
    auto covered_within = [&](const CVector& y, double margin) {
        for (std::size_t id : atlas.index_.query(y))
            if (auto w = atlas.charts_[id].unit_coords(y); w && w->norm() <= margin) return true;
        return false;
    };
    auto add_chart = [&](AtlasChart&& ch) {
        if (atlas.charts_.size() >= config.chart_budget) throw BudgetExceeded("atlas exceeds the chart budget");
        atlas.index_.insert(atlas.charts_.size(), ch.base(), ch.reach());
        atlas.charts_.push_back(std::move(ch));
    };

    for (std::size_t b = 0; b < cover.size(); ++b) {
        const int level = cover.level(b);
        const double R = std::sqrt(2.0 * n) * std::ldexp(1.0, -level);
        const CVector center = cube_center(level, cover.coords(b), n);
        std::mt19937_64 rng(mix(config.seed ^ mix(b + 1)));
        int hint = 0;
        bool used = false;
        const int tries = config.mode == AtlasMode::faithful ? 1 : config.ball_samples;
        for (int s = 0; s < tries; ++s) {
            CVector x = s == 0 ? center : CVector(center + sample_real_ball(rng, n, R));
            auto y = project_to_level(Pn, cn, x);
            if (!y || (*y - center).norm() > 2.0 * R) continue;
            used = true;
            if (config.mode == AtlasMode::practical && covered_within(*y, config.cover_margin)) continue;
            try {
                add_chart(make_atlas_chart(Pn, cn, *y, b, level, R, config.mode, config, &hint));
            } catch (const NumericalError&) {
            }
        }
        if (used) ++atlas.balls_used_;
    }

    // G sampler: random points of the realified cube projected to Y
    auto sample_G = [&](std::mt19937_64& rng) -> std::optional<CVector> {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int attempt = 0; attempt < 64; ++attempt) {
            CVector x(n);
            for (int i = 0; i < n; ++i) x[i] = Complex(u(rng), u(rng));
            auto y = project_to_level(Pn, cn, x);
            if (!y || !in_cube(*y)) continue;
            if (!atlas.sing_.points.empty() && atlas.sing_.distance(*y) < delta) continue;
            return y;
        }
        return std::nullopt;
    };

    if (config.mode == AtlasMode::practical) {
        std::mt19937_64 rng(mix(config.seed ^ 0x5245504149520000ULL));
        for (int round = 0; round < config.repair_rounds; ++round) {
            int misses = 0;
            for (int s = 0; s < config.repair_samples; ++s) {
                auto y = sample_G(rng);
                if (!y || covered(*y)) continue;
                ++misses;
                auto cubes = cover.containing(realify(*y));
                std::size_t b = cubes.empty() ? kNone : cubes.front();
                int level = cubes.empty() ? cover.final_level() : cover.level(b);
                double R = std::sqrt(2.0 * n) * std::ldexp(1.0, -level);
                int hint = 0;
                try {
                    add_chart(make_atlas_chart(Pn, cn, *y, b, level, R, config.mode, config, &hint));
                } catch (const NumericalError&) {
                }
            }
            if (misses == 0) break;
        }
    }

    {
        std::mt19937_64 rng(mix(config.seed ^ 0x434f564552414745ULL));
        CoverageReport rep;
        for (int s = 0; s < config.coverage_samples; ++s) {
            auto y = sample_G(rng);
            if (!y) continue;
            ++rep.samples;
            if (covered(*y)) ++rep.covered;
        }
        rep.passed = rep.samples > 0 && rep.covered == rep.samples;
        atlas.coverage_ = rep;
    }

    atlas.certify_edges();
    return atlas;
}

double rho_lower_bound(const Atlas& atlas, std::size_t i, std::size_t j) {
    if (i >= atlas.size() || j >= atlas.size()) throw DomainError("chart index out of range");
    if (i == j) return 1.0;
    if (const AtlasEdge* e = atlas.edge_between(i, j)) return e->rho;
    const auto& a = atlas.chart(i);
    const auto& b = atlas.chart(j);
    if ((a.base() - b.base()).norm() >= a.reach() + b.reach()) return 0.0;
    return certify_overlap(atlas.poly(), atlas.level(), a, b).rho;
}

ChartChain chain_between(const Atlas& atlas, const CVector& u1, const CVector& u2) {
    for (const CVector* u : {&u1, &u2})
        if (!atlas.on_level_set(*u)) throw DomainError("point is not on the level set");
    auto src = atlas.charts_containing(u1);
    auto dst = atlas.charts_containing(u2);
    if (src.empty() || dst.empty()) throw NotCovered("point is not covered by the atlas");
    std::vector<char> target(atlas.size(), 0), seen(atlas.size(), 0);
    for (auto j : dst) target[j] = 1;
    std::vector<std::size_t> parent(atlas.size(), kNone);
    std::deque<std::size_t> queue;
    for (auto j : src) {
        seen[j] = 1;
        queue.push_back(j);
    }
    std::size_t hit = kNone;
    while (!queue.empty()) {
        std::size_t cur = queue.front();
        queue.pop_front();
        if (target[cur]) {
            hit = cur;
            break;
        }
        for (auto [nb, e] : atlas.neighbors(cur)) {
            if (seen[nb]) continue;
            seen[nb] = 1;
            parent[nb] = cur;
            queue.push_back(nb);
        }
    }
    if (hit == kNone) throw Disconnected("points lie in different components of the atlas");
    ChartChain chain;
    for (std::size_t cur = hit; cur != kNone; cur = parent[cur]) chain.charts.push_back(cur);
    std::reverse(chain.charts.begin(), chain.charts.end());
    for (std::size_t k = 0; k + 1 < chain.charts.size(); ++k)
        chain.rho.push_back(atlas.edge_between(chain.charts[k], chain.charts[k + 1])->rho);
    return chain;
}

double poincare_distance(Complex a, Complex b) {
    if (!(std::abs(a) < 1.0 && std::abs(b) < 1.0)) throw DomainError("points must lie in the unit disk");
    double t = std::abs(a - b) / std::abs(1.0 - std::conj(a) * b);
    return std::log((1.0 + t) / (1.0 - t));
}

KobayashiResult kobayashi_bound(const Atlas& atlas, const CVector& p, const CVector& q) {
    KobayashiResult res;
    res.chain = chain_between(atlas, p, q);
    const auto& ids = res.chain.charts;
    res.bound = 3.0 * static_cast<double>(ids.size());
    std::vector<CVector> pts{p};
    for (std::size_t k = 0; k + 1 < ids.size(); ++k) pts.push_back(atlas.edge_between(ids[k], ids[k + 1])->witness);
    pts.push_back(q);
    res.mechanism_ok = true;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const auto& ch = atlas.chart(ids[k]);
        auto wa = ch.unit_coords(pts[k]);
        auto wb = ch.unit_coords(pts[k + 1]);
        KobayashiLink link;
        link.chart = ids[k];
        if (!wa || !wb) {
            res.mechanism_ok = false;
            res.links.push_back(link);
            continue;
        }
        CVector d = *wb - *wa;
        if (d.norm() > 0.0) {
            CVector u = d / d.norm();
            // the line through wa, wb meets B_4 in a disk of radius >= 3 about its foot point
            link.a = u.dot(*wa) / 3.0;
            link.b = u.dot(*wb) / 3.0;
        }
        link.in_third_disk = std::abs(link.a) <= 1.0 / 3.0 + 1e-12 && std::abs(link.b) <= 1.0 / 3.0 + 1e-12;
        link.distance = poincare_distance(link.a, link.b);
        link.within_bound = link.distance <= 1.5;
        res.mechanism_ok = res.mechanism_ok && link.in_third_disk && link.within_bound;
        res.links.push_back(link);
    }
    return res;
}

std::string to_json(const Atlas& atlas) {
    auto cj = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
    nlohmann::json doc;
    doc["n"] = atlas.dimension();
    doc["mode"] = atlas.mode() == AtlasMode::faithful ? "faithful" : "practical";
    doc["polynomial"] = nlohmann::json::parse(to_json(atlas.poly()));
    doc["level"] = cj(atlas.level());
    doc["K"] = atlas.K();
    doc["delta"] = atlas.delta();
    doc["gamma"] = atlas.gamma();
    doc["M"] = atlas.M();
    doc["rho_min"] = atlas.rho_min();
    nlohmann::json charts = nlohmann::json::array();
    for (const auto& ch : atlas.charts()) {
        nlohmann::json c = nlohmann::json::parse(to_json(ch.chart));
        c["r"] = ch.scale;
        c["lambda"] = ch.unit;
        c["slope"] = ch.slope;
        c["ball_level"] = ch.level;
        c["ball_radius"] = ch.ball_radius;
        charts.push_back(std::move(c));
    }
    doc["charts"] = std::move(charts);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : atlas.edges()) edges.push_back({{"a", e.a}, {"b", e.b}, {"rho", e.rho}});
    doc["edges"] = std::move(edges);
    doc["coverage"] = {{"samples", atlas.coverage().samples},
                       {"covered", atlas.coverage().covered},
                       {"passed", atlas.coverage().passed}};
    return doc.dump();
}

}  // namespace doubling
