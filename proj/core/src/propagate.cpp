#include "doubling/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include <json.hpp>

namespace doubling {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

double log_cp_for(const DoublingParams& params, int p) {
    DoublingParams q = params;
    q.p = p;
    return std::log(nonconcentric_constant(q, 1.0));
}

double log_step(double log_cp, int p, double rho) { return log_cp - p * std::log(rho); }

std::vector<std::size_t> bfs_levels(const Atlas& atlas, std::size_t src, std::vector<int>& dist) {
    dist.assign(atlas.size(), -1);
    std::vector<std::size_t> order{src};
    dist[src] = 0;
    for (std::size_t h = 0; h < order.size(); ++h) {
        std::size_t u = order[h];
        for (auto [v, e] : atlas.neighbors(u)) {
            if (dist[v] >= 0) continue;
            dist[v] = dist[u] + 1;
            order.push_back(v);
        }
    }
    return order;
}

}  // namespace

// ---------------------------------------------------------------- domains

double Constraint::value(const CVector& z) const { return S ? std::abs((*S)(z)) : z.norm(); }

double Constraint::slack(const CVector& z) const {
    double v = value(z);
    return kind == Kind::at_least ? v - bound : bound - v;
}

double Constraint::lipschitz(const CVector& z, double r) const {
    if (!S) return 1.0;
    return gradient_bound(*S, z, r);
}

bool DomainSpec::contains(const CVector& z) const {
    for (const auto& c : constraints)
        if (c.slack(z) < -tol) return false;
    return true;
}

std::vector<CVector> DomainSpec::sample(std::mt19937_64& rng, int count, const PolyC* p, Complex level) const {
    if (!sampler) throw DomainError("domain has no sampler");
    std::vector<CVector> out;
    for (int s = 0; s < count; ++s) {
        auto z = sampler(rng);
        if (!z || !contains(*z)) continue;
        if (p && std::abs((*p)(*z) - level) > 1e-9) continue;
        out.push_back(*z);
    }
    return out;
}

DomainSpec polydisk_domain(int n, PointSampler sampler) {
    DomainSpec d;
    for (int i = 0; i < n; ++i) d.constraints.push_back({variable(n, i), Constraint::Kind::at_most, 1.0});
    d.sampler = std::move(sampler);
    return d;
}

PointSampler projected_sampler(const PolyC& p, Complex c) {
    return [p, c](std::mt19937_64& rng) -> std::optional<CVector> {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const int n = p.dimension();
        CVector x(n);
        for (int i = 0; i < n; ++i) x[i] = Complex(u(rng), u(rng));
        return project_to_level(p, c, x);
    };
}

// ---------------------------------------------------------------- rho(U, Omega)

OmegaAnchor certify_omega(const AtlasChart& chart, const DomainSpec& omega, int witnesses, std::uint64_t seed) {
    OmegaAnchor best;
    const int k = chart.dimension() - 1;
    const double step = chart.unit * std::sqrt(1.0 + chart.slope * chart.slope);
    std::mt19937_64 rng(seed);
    for (int s = 0; s < witnesses; ++s) {
        CVector w = s == 0 ? CVector(CVector::Zero(k)) : sample_complex_ball(rng, k, 0.9);
        CVector z;
        try {
            z = chart.psi(w);
        } catch (const NumericalError&) {
            continue;
        }
        bool inside = true;
        for (const auto& c : omega.constraints)
            if (!(c.slack(z) > 0.0)) inside = false;
        if (!inside) continue;
        auto fits = [&](double rho) {
            for (const auto& c : omega.constraints)
                if (c.lipschitz(z, rho * step) * rho * step > c.slack(z) * (1.0 - 1e-9)) return false;
            return true;
        };
        double hi = 1.0 - w.norm();
        if (hi <= best.rho) continue;
        double lo = 0.0;
        if (fits(hi)) {
            lo = hi;
        } else {
            for (int it = 0; it < 50; ++it) {
                double mid = 0.5 * (lo + hi);
                (fits(mid) ? lo : hi) = mid;
            }
        }
        lo *= 1.0 - 1e-9;
        if (lo > best.rho) {
            best.rho = lo;
            best.witness = z;
        }
    }
    return best;
}

std::vector<OmegaAnchor> omega_anchors(const Atlas& atlas, const DomainSpec& omega, int witnesses,
                                       std::uint64_t seed) {
    std::vector<OmegaAnchor> out;
    for (std::size_t j = 0; j < atlas.size(); ++j) {
        const auto& ch = atlas.chart(j);
        // cheap rejection: the whole chart image sits within reach() of the base
        bool far = false;
        for (const auto& c : omega.constraints)
            if (c.slack(ch.base()) < -c.lipschitz(ch.base(), ch.reach()) * ch.reach()) far = true;
        if (far) continue;
        OmegaAnchor a = certify_omega(ch, omega, witnesses, seed ^ (0x9e3779b97f4a7c15ULL * (j + 1)));
        if (a.rho > 0.0) {
            a.chart = j;
            out.push_back(std::move(a));
        }
    }
    return out;
}

// ---------------------------------------------------------------- chains

double chain_log_bound(double log_cp, int p, double rho_omega, const std::vector<double>& rho) {
    double s = log_step(log_cp, p, rho_omega);
    for (double r : rho) s += log_step(log_cp, p, r);
    return s;
}

namespace {

PropagationResult make_result(const Atlas& atlas, const std::vector<std::size_t>& path, double rho_omega,
                              double log_cp, int p) {
    PropagationResult res;
    res.p = p;
    res.log_cp = log_cp;
    res.chain.charts = path;
    res.chain.rho_omega = rho_omega;
    res.terms.push_back(EdgeTerm{kNone, path.front(), rho_omega, log_step(log_cp, p, rho_omega)});
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        double r = atlas.edge_between(path[k], path[k + 1])->rho;
        res.chain.rho.push_back(r);
        res.terms.push_back(EdgeTerm{path[k], path[k + 1], r, log_step(log_cp, p, r)});
    }
    res.log_bound = chain_log_bound(log_cp, p, rho_omega, res.chain.rho);
    res.bound = std::exp(res.log_bound);
    return res;
}

}  // namespace

Propagator::Propagator(const Atlas& atlas, const DomainSpec& omega, DoublingParams params, int witnesses,
                       std::uint64_t seed)
    : atlas_(&atlas), params_(params) {
    anchors_ = omega_anchors(atlas, omega, witnesses, seed);
    rho_omega_.assign(atlas.size(), 0.0);
    for (const auto& a : anchors_) rho_omega_[a.chart] = a.rho;
    log_cp_ = log_cp_for(params_, params_.p);
}

PropagationResult Propagator::bound(const CVector& z) const {
    const Atlas& atlas = *atlas_;
    if (!atlas.on_level_set(z)) throw DomainError("point is not on the level set");
    auto targets = atlas.charts_containing(z);
    if (targets.empty()) throw NotCovered("point is not covered by the atlas");
    if (anchors_.empty()) throw DomainError("Omega meets no chart with a certified subball");
    const int p = params_.p;
    std::vector<char> is_target(atlas.size(), 0), done(atlas.size(), 0);
    for (auto t : targets) is_target[t] = 1;
    std::vector<double> dist(atlas.size(), std::numeric_limits<double>::infinity());
    std::vector<std::size_t> parent(atlas.size(), kNone);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (const auto& a : anchors_) {
        double d = log_step(log_cp_, p, a.rho);
        if (d < dist[a.chart]) {
            dist[a.chart] = d;
            pq.emplace(d, a.chart);
        }
    }
    std::size_t hit = kNone;
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (is_target[u]) {
            hit = u;
            break;
        }
        for (auto [v, e] : atlas.neighbors(u)) {
            double nd = d + log_step(log_cp_, p, atlas.edges()[e].rho);
            if (nd < dist[v]) {
                dist[v] = nd;
                parent[v] = u;
                pq.emplace(nd, v);
            }
        }
    }
    if (hit == kNone) throw Disconnected("no chain joins Omega and the point");
    std::vector<std::size_t> path;
    for (std::size_t u = hit; u != kNone; u = parent[u]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    return make_result(atlas, path, rho_omega_[path.front()], log_cp_, p);
}

PropagationResult chain_bound(const Atlas& atlas, const DomainSpec& omega, const CVector& z,
                              const DoublingParams& params) {
    return Propagator(atlas, omega, params).bound(z);
}

PropagationResult chain_bound_exhaustive(const Atlas& atlas, const std::vector<OmegaAnchor>& anchors,
                                         const CVector& z, const DoublingParams& params) {
    if (atlas.size() > 20) throw DomainError("exhaustive chain search is limited to 20 charts");
    auto targets = atlas.charts_containing(z);
    if (targets.empty()) throw NotCovered("point is not covered by the atlas");
    const int p = params.p;
    const double log_cp = log_cp_for(params, p);
    std::vector<char> is_target(atlas.size(), 0), on_path(atlas.size(), 0);
    for (auto t : targets) is_target[t] = 1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_path, path;
    double best_rho = 0.0;
    for (const auto& a : anchors) {
        std::vector<double> rho;
        std::function<void(std::size_t)> walk = [&](std::size_t u) {
            path.push_back(u);
            on_path[u] = 1;
            if (is_target[u]) {
                double v = chain_log_bound(log_cp, p, a.rho, rho);
                if (v < best) {
                    best = v;
                    best_path = path;
                    best_rho = a.rho;
                }
            }
            for (auto [v, e] : atlas.neighbors(u)) {
                if (on_path[v]) continue;
                rho.push_back(atlas.edges()[e].rho);
                walk(v);
                rho.pop_back();
            }
            on_path[u] = 0;
            path.pop_back();
        };
        walk(a.chart);
    }
    if (best_path.empty()) throw Disconnected("no chain joins Omega and the point");
    return make_result(atlas, best_path, best_rho, log_cp, p);
}

std::size_t graph_diameter(const Atlas& atlas) {
    if (atlas.size() == 0) return 0;
    std::vector<int> dist;
    auto ecc = [&](std::size_t s) {
        auto order = bfs_levels(atlas, s, dist);
        if (order.size() != atlas.size()) throw Disconnected("atlas graph is disconnected");
        return dist[order.back()];
    };
    // iFUB from a max-degree chart
    std::size_t u = 0;
    for (std::size_t i = 1; i < atlas.size(); ++i)
        if (atlas.neighbors(i).size() > atlas.neighbors(u).size()) u = i;
    ecc(u);
    std::vector<int> du = dist;
    int eu = *std::max_element(du.begin(), du.end());
    std::vector<std::vector<std::size_t>> fringe(eu + 1);
    for (std::size_t i = 0; i < du.size(); ++i) fringe[du[i]].push_back(i);
    int lb = eu, ub = 2 * eu;
    for (int i = eu; i > 0 && ub > lb; --i) {
        int bi = 0;
        for (std::size_t x : fringe[i]) bi = std::max(bi, ecc(x));
        lb = std::max(lb, bi);
        if (lb > 2 * (i - 1)) break;
        ub = 2 * (i - 1);
    }
    return static_cast<std::size_t>(lb) + 1;
}

UniformBound uniform_bound(std::size_t ell, std::size_t kappa, double rho, int p, const DoublingParams& params) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
    UniformBound b;
    b.ell = ell;
    b.kappa = kappa;
    double step = log_step(log_cp_for(params, p), p, rho);
    b.log_value = static_cast<double>(ell) * step;
    b.log_kappa_value = static_cast<double>(kappa) * step;
    return b;
}

UniformBound uniform_bound(const Atlas& atlas, double rho, int p, const DoublingParams& params) {
    return uniform_bound(graph_diameter(atlas), atlas.size(), rho, p, params);
}

double kappa_lower(double dc, double rho, int p, const DoublingParams& params) {
    if (!(dc > 1.0)) throw DomainError("doubling constant must exceed 1");
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
    double step = log_step(log_cp_for(params, p), p, rho);
    if (!(step > 0.0)) throw DomainError("c_p / rho^p must exceed 1");
    return std::log(dc) / step;
}

PolyDCBound poly_dc_bound(int n, int d, int d1, double K, double delta, const DoublingParams& params) {
    if (d1 < 1) throw DomainError("d1 must be at least 1");
    if (!(K > 0.0)) throw DomainError("K must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    PolyDCBound b;
    b.p = bezout_valency(d, d1);
    double log2_10p_cp = (b.p * std::log(10.0) + log_cp_for(params, b.p)) / std::log(2.0);
    b.log_C3 = std::log(log2_10p_cp) + log_C1(n, d);
    b.exponent = std::exp(b.log_C3 - 2.0 * n * std::log(K));
    double base = std::log(C2(n, d) / (K * delta));
    b.log_bound = base > 0.0 ? b.exponent * base : 0.0;
    return b;
}

double empirical_dc(const SampleFunction& f, const PointSampler& g_sampler, const PointSampler& omega_sampler,
                    int count, std::uint64_t seed, int omega_count) {
    std::mt19937_64 rg(seed), ro(seed ^ 0x4f4d454741ULL);
    double mg = 0.0, mo = 0.0;
    for (int s = 0; s < count; ++s)
        if (auto z = g_sampler(rg)) mg = std::max(mg, std::abs(f(*z)));
    for (int s = 0; s < omega_count; ++s)
        if (auto z = omega_sampler(ro)) mo = std::max(mo, std::abs(f(*z)));
    if (!(mo > 0.0)) throw DomainError("f vanishes on the sampled Omega");
    return mg / mo;
}

std::string to_json(const PropagationResult& r) {
    nlohmann::json doc;
    doc["log_bound"] = r.log_bound;
    doc["bound"] = std::isfinite(r.bound) ? nlohmann::json(r.bound) : nlohmann::json("inf");
    doc["p"] = r.p;
    doc["log_cp"] = r.log_cp;
    doc["chain"] = r.chain.charts;
    doc["rho_omega"] = r.chain.rho_omega;
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : r.terms) {
        nlohmann::json e;
        if (t.from == kNone)
            e["from"] = "omega";
        else
            e["from"] = t.from;
        e["to"] = t.to;
        e["rho"] = t.rho;
        e["log_term"] = t.log_term;
        terms.push_back(e);
    }
    doc["terms"] = terms;
    return doc.dump();
}

}  // namespace doubling
