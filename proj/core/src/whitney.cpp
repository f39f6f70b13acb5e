#include "doubling/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <queue>
#include <numeric>

#include <json.hpp>

namespace doubling {

namespace {

bool lex_less(const std::int32_t* a, const std::int32_t* b, int m) {
    for (int i = 0; i < m; ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

void sort_flat(std::vector<std::int32_t>& flat, int m) {
    const std::size_t count = flat.size() / m;
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return lex_less(&flat[a * m], &flat[b * m], m);
    });
    std::vector<std::int32_t> out(flat.size());
    for (std::size_t i = 0; i < count; ++i)
        std::memcpy(&out[i * m], &flat[order[i] * m], sizeof(std::int32_t) * m);
    flat.swap(out);
}

std::optional<std::size_t> search_flat(const std::vector<std::int32_t>& flat, std::size_t begin,
                                       std::size_t end, const std::int32_t* key, int m) {
    std::size_t lo = begin, hi = end;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (lex_less(&flat[mid * m], key, m))
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < end && std::memcmp(&flat[lo * m], key, sizeof(std::int32_t) * m) == 0) return lo;
    return std::nullopt;
}

}  // namespace

double SubCube::edge() const { return std::ldexp(2.0, -level); }

double SubCube::radius() const {
    return std::sqrt(static_cast<double>(coords.size())) * std::ldexp(1.0, -level);
}

RVector SubCube::center() const {
    RVector c(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
        c[i] = -1.0 + (2.0 * coords[i] + 1.0) * std::ldexp(1.0, -level);
    return c;
}

bool SubCube::contains(const RVector& x) const {
    for (std::size_t i = 0; i < coords.size(); ++i) {
        double lo = -1.0 + 2.0 * coords[i] * std::ldexp(1.0, -level);
        if (x[i] < lo || x[i] > lo + edge()) return false;
    }
    return true;
}

int neighborhood_k(int m, double gamma) {
    if (m < 1) throw DomainError("dimension must be positive");
    if (!(gamma > 1.0)) throw DomainError("gamma must exceed 1");
    double g = std::sqrt(static_cast<double>(m)) * gamma;
    int k = static_cast<int>(std::ceil((g - 1.0) / 2.0));
    if (k < 0) k = 0;
    // guard against rounding in sqrt: need (2k+1)^2 >= gamma^2 m
    while (static_cast<double>(2 * k + 1) * (2 * k + 1) < gamma * gamma * m) ++k;
    return k;
}

int stop_level(int m, double gamma, double delta) {
    return static_cast<int>(std::ceil(std::log2(3.0 * m * gamma / delta)));
}

double count_bound(int m, std::size_t d, double gamma, double delta) {
    return static_cast<double>(d) * std::pow(3.0 * std::sqrt(static_cast<double>(m)) * gamma, m) *
           std::log2(3.0 * m * gamma / delta);
}

std::pair<std::int64_t, std::int64_t> containing_range(double x, int level) {
    // cube c at level s covers [-1 + 2c/2^s, -1 + 2(c+1)/2^s]; u = (x+1) 2^{s-1}
    double u = std::ldexp(x, level - 1) + std::ldexp(1.0, level - 1);
    double f = std::floor(u);
    auto c = static_cast<std::int64_t>(f);
    if (f == u) return {c - 1, c};
    return {c, c};
}

SubCube WhitneyCover::cube(std::size_t i) const {
    SubCube c;
    c.level = levels_[i];
    c.coords.assign(coords(i), coords(i) + m_);
    return c;
}

Ball WhitneyCover::ball(std::size_t i) const {
    SubCube c = cube(i);
    return Ball{c.center(), c.radius()};
}

SubCube WhitneyCover::sigma_cube(std::size_t i) const {
    SubCube c;
    c.level = final_level_;
    c.coords.assign(&sigma_[i * m_], &sigma_[i * m_] + m_);
    return c;
}

std::vector<std::size_t> WhitneyCover::level_counts() const {
    std::vector<std::size_t> out(final_level_ + 1, 0);
    for (int s = 0; s <= final_level_; ++s) out[s] = level_offset_[s + 1] - level_offset_[s];
    return out;
}

std::optional<std::size_t> WhitneyCover::find(int level, const std::int32_t* key) const {
    if (level < 0 || level > final_level_) return std::nullopt;
    return search_flat(coords_, level_offset_[level], level_offset_[level + 1], key, m_);
}

bool WhitneyCover::in_sigma(int level, const std::int32_t* key) const {
    if (level != final_level_) return false;
    return search_flat(sigma_, 0, sigma_.size() / m_, key, m_).has_value();
}

std::vector<std::size_t> WhitneyCover::face_neighbors(std::size_t i) const {
    const int s = levels_[i];
    const std::int32_t* c = coords(i);
    const std::int64_t side = std::int64_t{1} << s;
    std::vector<std::size_t> out;
    std::vector<std::int32_t> key(m_);
    for (int a = 0; a < m_; ++a) {
        for (int dir : {-1, 1}) {
            std::int64_t na = static_cast<std::int64_t>(c[a]) + dir;
            if (na < 0 || na >= side) continue;
            std::copy(c, c + m_, key.begin());
            key[a] = static_cast<std::int32_t>(na);
            if (auto j = find(s, key.data())) out.push_back(*j);
            if (s > 0) {
                std::vector<std::int32_t> parent(m_);
                for (int t = 0; t < m_; ++t) parent[t] = key[t] >> 1;
                if ((na >> 1) != (c[a] >> 1))
                    if (auto j = find(s - 1, parent.data())) out.push_back(*j);
            }
            if (s < final_level_) {
                std::vector<std::int32_t> child(m_);
                const int others = m_ - 1;
                for (int mask = 0; mask < (1 << others); ++mask) {
                    int bit = 0;
                    for (int t = 0; t < m_; ++t) {
                        if (t == a) {
                            child[t] = 2 * key[t] + (dir > 0 ? 0 : 1);
                        } else {
                            child[t] = 2 * c[t] + ((mask >> bit) & 1);
                            ++bit;
                        }
                    }
                    if (auto j = find(s + 1, child.data())) out.push_back(*j);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> WhitneyCover::containing(const RVector& x) const {
    if (static_cast<int>(x.size()) != m_) throw DomainError("point dimension mismatch");
    std::vector<std::size_t> out;
    for (double v : x)
        if (!(v >= -1.0 && v <= 1.0)) return out;
    std::vector<std::int32_t> key(m_);
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges(m_);
    for (int s = 0; s <= final_level_; ++s) {
        if (level_offset_[s] == level_offset_[s + 1]) continue;
        const std::int64_t side = std::int64_t{1} << s;
        for (int i = 0; i < m_; ++i) {
            auto r = containing_range(x[i], s);
            ranges[i] = {std::max<std::int64_t>(r.first, 0), std::min<std::int64_t>(r.second, side - 1)};
        }
        std::vector<std::int64_t> cur(m_);
        for (int i = 0; i < m_; ++i) cur[i] = ranges[i].first;
        while (true) {
            for (int i = 0; i < m_; ++i) key[i] = static_cast<std::int32_t>(cur[i]);
            if (auto j = find(s, key.data())) out.push_back(*j);
            int i = 0;
            while (i < m_ && cur[i] == ranges[i].second) {
                cur[i] = ranges[i].first;
                ++i;
            }
            if (i == m_) break;
            ++cur[i];
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> WhitneyCover::adjacency() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j : face_neighbors(i))
            if (i < j) out.emplace_back(i, j);
    return out;
}

WhitneyCover build_cover(const std::vector<RVector>& punctures, double delta, double gamma,
                         const CoverOptions& options) {
    if (punctures.empty()) throw DomainError("dimension cannot be inferred from an empty puncture list");
    return build_cover(static_cast<int>(punctures.front().size()), punctures, delta, gamma, options);
}

WhitneyCover build_cover(int m, const std::vector<RVector>& punctures, double delta, double gamma,
                         const CoverOptions& options) {
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    if (!(delta < 1.0)) throw DomainError("delta must be below 1");
    if (!(gamma > 1.0)) throw DomainError("gamma must exceed 1");
    if (m < 1 || m > 2 * kMaxDim) throw DomainError("dimension out of range");
    for (const auto& p : punctures) {
        if (static_cast<int>(p.size()) != m) throw DomainError("puncture dimension mismatch");
        for (double v : p)
            if (!std::isfinite(v)) throw DomainError("puncture coordinates must be finite");
    }
    WhitneyCover cov;
    cov.m_ = m;
    cov.punctures_ = punctures;
    cov.delta_ = delta;
    cov.gamma_ = gamma;
    cov.k_ = neighborhood_k(m, gamma);
    cov.stop_level_ = stop_level(m, gamma, delta);
    cov.filtered_ = static_cast<bool>(options.keep);
    const int k = cov.k_;

    std::vector<std::int32_t> sigma(m, 0);  // level 0: Q itself
    cov.level_offset_.push_back(0);
    cov.level_offset_.push_back(0);  // no retained cube at level 0
    std::vector<std::int64_t> lo(punctures.size() * m), hi(punctures.size() * m);
    std::vector<std::int32_t> child(m);
    int s = 0;
    bool inside = false;
    while (true) {
        ++s;
        if (s > kMaxLevel) throw BudgetExceeded("subdivision exceeded the maximum level");
        for (std::size_t p = 0; p < punctures.size(); ++p) {
            for (int i = 0; i < m; ++i) {
                auto r = containing_range(punctures[p][i], s);
                lo[p * m + i] = r.first - k;
                hi[p * m + i] = r.second + k;
            }
        }
        std::vector<std::int32_t> next_sigma;
        std::vector<std::int32_t> retained;
        const std::size_t parents = sigma.size() / m;
        for (std::size_t q = 0; q < parents; ++q) {
            const std::int32_t* par = &sigma[q * m];
            for (int mask = 0; mask < (1 << m); ++mask) {
                for (int i = 0; i < m; ++i) child[i] = 2 * par[i] + ((mask >> i) & 1);
                bool in_sig = false;
                for (std::size_t p = 0; p < punctures.size() && !in_sig; ++p) {
                    bool all = true;
                    for (int i = 0; i < m && all; ++i)
                        all = child[i] >= lo[p * m + i] && child[i] <= hi[p * m + i];
                    in_sig = all;
                }
                if (options.keep && !options.keep(s, child.data())) continue;
                auto& dst = in_sig ? next_sigma : retained;
                dst.insert(dst.end(), child.begin(), child.end());
            }
            if (cov.coords_.size() / m + retained.size() / m + next_sigma.size() / m >
                options.max_cubes)
                throw BudgetExceeded("cover exceeds the configured cube budget");
        }
        sort_flat(retained, m);
        sort_flat(next_sigma, m);
        cov.coords_.insert(cov.coords_.end(), retained.begin(), retained.end());
        cov.levels_.insert(cov.levels_.end(), retained.size() / m, static_cast<std::uint8_t>(s));
        cov.level_offset_.push_back(cov.coords_.size() / m);
        sigma.swap(next_sigma);

        inside = true;
        SubCube sc;
        sc.level = s;
        for (std::size_t q = 0; q < sigma.size() / m && inside; ++q) {
            sc.coords.assign(&sigma[q * m], &sigma[q * m] + m);
            bool any = false;
            for (const auto& p : punctures) {
                if (cube_within_exact(sc, p, delta)) {
                    any = true;
                    break;
                }
            }
            inside = any;
        }
        if (sigma.empty() || inside) break;
    }
    cov.final_level_ = s;
    cov.sigma_inside_ = inside;
    cov.sigma_ = std::move(sigma);
    return cov;
}

double intersection_ball_radius(const Ball& b1, const Ball& b2) {
    if (b1.center.size() != b2.center.size()) throw DomainError("ball dimension mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < b1.center.size(); ++i) {
        double t = b1.center[i] - b2.center[i];
        d2 += t * t;
    }
    double dist = std::sqrt(d2);
    if (dist >= b1.radius + b2.radius) return 0.0;
    double r = 0.5 * (b1.radius + b2.radius - dist);
    return std::min({r, b1.radius, b2.radius});
}

CubeChain find_chain(const WhitneyCover& cover, const RVector& v, const RVector& w) {
    for (const RVector* x : {&v, &w}) {
        if (static_cast<int>(x->size()) != cover.dimension())
            throw DomainError("point dimension mismatch");
        for (const auto& p : cover.punctures()) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) d2 += ((*x)[i] - p[i]) * ((*x)[i] - p[i]);
            if (std::sqrt(d2) < cover.delta()) throw NotCovered("point lies in the delta-neighborhood");
        }
    }
    auto src = cover.containing(v);
    auto dst = cover.containing(w);
    if (src.empty() || dst.empty()) throw NotCovered("point outside the cover");
    std::vector<char> target(cover.size(), 0);
    for (auto j : dst) target[j] = 1;
    const std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent(cover.size(), none);
    std::vector<char> seen(cover.size(), 0);
    // best-first toward w: any face chain will do
    auto gap = [&](std::size_t j) {
        RVector c = cover.cube(j).center();
        double d2 = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) d2 += (c[i] - w[i]) * (c[i] - w[i]);
        return d2;
    };
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (auto j : src) {
        seen[j] = 1;
        queue.emplace(gap(j), j);
    }
    std::size_t hit = none;
    while (!queue.empty()) {
        std::size_t cur = queue.top().second;
        queue.pop();
        if (target[cur]) {
            hit = cur;
            break;
        }
        for (std::size_t nb : cover.face_neighbors(cur)) {
            if (seen[nb]) continue;
            seen[nb] = 1;
            parent[nb] = cur;
            queue.emplace(gap(nb), nb);
        }
    }
    if (hit == none) throw Disconnected("points lie in different components of the cover");
    CubeChain chain;
    for (std::size_t cur = hit; cur != none; cur = parent[cur]) chain.cubes.push_back(cur);
    std::reverse(chain.cubes.begin(), chain.cubes.end());
    return chain;
}

std::string to_json(const WhitneyCover& cover, bool with_adjacency) {
    nlohmann::json doc;
    doc["dimension"] = cover.dimension();
    doc["delta"] = cover.delta();
    doc["gamma"] = cover.gamma();
    doc["k"] = cover.k();
    doc["punctures"] = cover.punctures();
    doc["final_level"] = cover.final_level();
    nlohmann::json cubes = nlohmann::json::array();
    for (std::size_t i = 0; i < cover.size(); ++i) {
        SubCube c = cover.cube(i);
        cubes.push_back({{"level", c.level}, {"coords", c.coords}, {"center", c.center()},
                         {"radius", c.radius()}});
    }
    doc["cubes"] = std::move(cubes);
    if (with_adjacency) {
        nlohmann::json adj = nlohmann::json::array();
        for (auto [i, j] : cover.adjacency()) adj.push_back({i, j});
        doc["adjacency"] = std::move(adj);
    }
    return doc.dump(1);
}

}  // namespace doubling
