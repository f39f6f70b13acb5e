#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "doubling/stats.hpp"
#include "doubling/valency.hpp"

namespace doubling::cli {

namespace {

nlohmann::json cj(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json point_json(const CVector& z) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < z.size(); ++i) a.push_back(cj(z[i]));
    return a;
}

std::string num(const nlohmann::json& v) {
    if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
        return buf;
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

double sampled_min_norm(const std::vector<CVector>& pts) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : pts) m = std::min(m, z.norm());
    return m;
}

Complex random_disk_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Complex z(u(rng), u(rng));
        if (std::abs(z) <= 1.0) return z;
    }
}

struct AtlasChecks {
    bool coverage = false;
    std::size_t components = 0;
    double min_rho = 1.0;
    double max_chart_residual = 0.0;
};

AtlasChecks check_atlas(const Atlas& atlas, int per_chart, std::uint64_t seed) {
    AtlasChecks c;
    c.coverage = atlas.coverage().passed;
    c.components = atlas_components(atlas);
    for (const auto& e : atlas.edges()) c.min_rho = std::min(c.min_rho, e.rho);
    std::mt19937_64 rng(seed);
    const int k = atlas.dimension() - 1;
    for (const auto& ch : atlas.charts()) {
        for (int s = 0; s < per_chart; ++s) {
            CVector w = sample_complex_ball(rng, k, 1.0);
            double r = std::abs(atlas.poly()(ch.psi(w)) - atlas.level());
            c.max_chart_residual = std::max(c.max_chart_residual, r);
        }
    }
    return c;
}

void put_atlas(nlohmann::json& rec, const Atlas& atlas, const AtlasChecks& c) {
    rec["kappa"] = atlas.size();
    rec["whitney_balls"] = atlas.whitney_balls();
    rec["balls_meeting_Y"] = atlas.balls_meeting_Y();
    rec["edges"] = atlas.edges().size();
    rec["coverage"] = {{"samples", atlas.coverage().samples}, {"covered", atlas.coverage().covered}};
    rec["components"] = c.components;
    rec["min_edge_rho"] = c.min_rho;
    rec["max_chart_residual"] = c.max_chart_residual;
    rec["charts_per_level"] = atlas.charts_per_level();
}

PolyC hyperbola_poly() { return parse_poly("z1*z2", 2); }

PolyC quadric_poly(int n) {
    PolyC p(n);
    for (int i = 0; i < n; ++i) p = p + monomial(n, [&] {
                                        MultiIndex a(n, 0);
                                        a[i] = 2;
                                        return a;
                                    }());
    return p;
}

}  // namespace

Complex polylog_series(int n, Complex z, int terms) {
    using big = boost::multiprecision::cpp_bin_float_50;
    big re = 0, im = 0, zr = 1, zi = 0;
    const big a = z.real(), b = z.imag();
    for (int k = 1; k <= terms; ++k) {
        big nr = zr * a - zi * b;
        zi = zr * b + zi * a;
        zr = nr;
        big w = pow(big(k), n);
        re += w * zr;
        im += w * zi;
    }
    return {re.convert_to<double>(), im.convert_to<double>()};
}

// ---------------------------------------------------------------- report

void Report::check(const std::string& name, bool ok) {
    doc["checks"][name] = ok;
    passed = passed && ok;
    doc["passed"] = passed;
}

std::string Report::render(Format format) const {
    if (format == Format::report) return doc.dump(2) + "\n";
    std::ostringstream out;
    if (rows.empty()) {
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (it.value().is_primitive()) out << it.key() << '\t' << num(it.value()) << '\n';
        return out.str();
    }
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "\t" : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << num(row[i]);
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------- parsing

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (tok.find_first_not_of(" \t", used) != std::string::npos) throw ParseError("bad number: " + tok);
        out.push_back(v);
    }
    return out;
}

std::vector<RVector> parse_points(const std::string& text, int dim) {
    std::vector<RVector> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        if (tok.find_first_not_of(" \t") == std::string::npos) continue;
        RVector p = parse_list(tok);
        if (static_cast<int>(p.size()) != dim)
            throw ParseError("point '" + tok + "' needs " + std::to_string(dim) + " coordinates");
        out.push_back(p);
    }
    return out;
}

CVector parse_complex_point(const std::string& text, int n) {
    RVector x = parse_list(text);
    if (static_cast<int>(x.size()) != 2 * n)
        throw ParseError("complex point needs " + std::to_string(2 * n) + " real coordinates");
    return complexify(x);
}

std::size_t atlas_components(const Atlas& atlas) {
    std::vector<char> seen(atlas.size(), 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < atlas.size(); ++i) {
        if (seen[i]) continue;
        ++count;
        std::deque<std::size_t> q{i};
        seen[i] = 1;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            for (auto [v, e] : atlas.neighbors(u))
                if (!seen[v]) seen[v] = 1, q.push_back(v);
        }
    }
    return count;
}

// ---------------------------------------------------------------- samplers

PointSampler hyperbola_g_sampler(double eps) {
    return [eps](std::mt19937_64& rng) -> std::optional<CVector> {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double c = eps * eps;
        double r = std::exp(std::log(c) * u(rng));
        Complex t = std::polar(r, 2.0 * std::numbers::pi * u(rng));
        CVector z(2);
        if (u(rng) < 0.5)
            z << t, c / t;
        else
            z << c / t, t;
        return z;
    };
}

PointSampler hyperbola_omega_sampler(double eps) {
    return [eps](std::mt19937_64& rng) -> std::optional<CVector> {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double r = std::exp(std::log(0.5) * u(rng));
        Complex t = std::polar(r, 2.0 * std::numbers::pi * u(rng));
        CVector z(2);
        z << t, eps * eps / t;
        return z;
    };
}

DomainSpec hyperbola_omega(double eps) {
    DomainSpec d = polydisk_domain(2, hyperbola_omega_sampler(eps));
    d.constraints.push_back({variable(2, 0), Constraint::Kind::at_least, 0.5});
    return d;
}

PointSampler quadric_g_sampler(int n, double eps) {
    return [n, eps](std::mt19937_64& rng) -> std::optional<CVector> {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        CVector z(n);
        Complex s = eps * eps;
        for (int i = 0; i + 1 < n; ++i) {
            z[i] = random_disk_point(rng);
            s -= z[i] * z[i];
        }
        Complex last = std::sqrt(s);
        if (u(rng) < 0.5) last = -last;
        if (std::abs(last) > 1.0) return std::nullopt;
        z[n - 1] = last;
        return z;
    };
}

PointSampler quadric_omega_sampler(int n, double eps) {
    auto g = quadric_g_sampler(n, eps);
    return [g](std::mt19937_64& rng) -> std::optional<CVector> {
        auto z = g(rng);
        if (!z || z->norm() < 0.5) return std::nullopt;
        return z;
    };
}

// ---------------------------------------------------------------- cover-cube

Report cover_cube(const CoverCubeArgs& a) {
    Report rep;
    WhitneyCover cover = build_cover(a.dim, a.punctures, a.delta, a.gamma);
    const int m = a.dim;
    rep.doc["command"] = "cover-cube";
    rep.doc["dimension"] = m;
    rep.doc["punctures"] = a.punctures;
    rep.doc["delta"] = a.delta;
    rep.doc["gamma"] = a.gamma;
    rep.doc["k"] = cover.k();
    rep.doc["stop_level"] = cover.stop_level();
    rep.doc["final_level"] = cover.final_level();
    rep.doc["count"] = cover.size();
    rep.doc["level_counts"] = cover.level_counts();
    const double bound = count_bound(m, a.punctures.size(), a.gamma, a.delta);
    rep.doc["count_bound"] = bound;

    std::size_t bad = 0;
    for (std::size_t i = 0; i < cover.size(); ++i) {
        SubCube c = cover.cube(i);
        for (const auto& p : a.punctures)
            if (!ball_separated_exact(c, p, a.gamma)) ++bad;
    }
    rep.doc["separation_failures"] = bad;

    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int tested = 0, hit = 0;
    if (!a.punctures.empty()) {
        for (long attempt = 0; tested < a.samples && attempt < 100L * a.samples; ++attempt) {
            RVector x(m);
            for (auto& v : x) v = u(rng);
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& p : a.punctures) {
                double d2 = 0.0;
                for (int i = 0; i < m; ++i) d2 += (x[i] - p[i]) * (x[i] - p[i]);
                dmin = std::min(dmin, std::sqrt(d2));
            }
            if (dmin < a.delta) continue;
            ++tested;
            if (!cover.containing(x).empty()) ++hit;
        }
    }
    rep.doc["coverage"] = {{"samples", tested}, {"covered", hit}};
    rep.doc["vacuous"] = a.punctures.empty();
    rep.check("separation", bad == 0);
    rep.check("coverage", hit == tested);
    rep.check("count_bound", a.punctures.empty() || static_cast<double>(cover.size()) <= bound);
    rep.check("sigma_inside_delta", a.punctures.empty() || cover.sigma_inside_delta());
    if (a.cubes) rep.doc["cover"] = nlohmann::json::parse(to_json(cover, false));
    rep.columns = {"level", "count"};
    auto lc = cover.level_counts();
    for (std::size_t l = 0; l < lc.size(); ++l) rep.rows.push_back({l, lc[l]});
    return rep;
}

// ---------------------------------------------------------------- hypersurface

namespace {

struct Surface {
    PolyC poly;
    std::vector<CVector> singular;
    double K = 0.0;
};

Surface prepare_surface(const HypersurfaceArgs& a) {
    Surface s;
    s.poly = parse_poly(a.poly, a.n);
    PolyC pn = normalized(s.poly);
    SingularSet sing = a.singular.empty() ? find_singular_points(pn) : make_singular_set(pn, a.singular);
    s.singular = sing.points;
    s.K = a.K > 0.0 ? a.K : estimate_K(pn, sing, 20000, a.config.seed);
    return s;
}

}  // namespace

Report cover_hypersurface(const HypersurfaceArgs& a) {
    Report rep;
    Surface s = prepare_surface(a);
    AtlasConfig cfg = a.config;
    cfg.singular_points = s.singular;
    rep.doc["command"] = "cover-hypersurface";
    rep.doc["polynomial"] = to_string(s.poly);
    rep.doc["n"] = a.n;
    rep.doc["level"] = cj(a.level);
    rep.doc["K"] = s.K;
    rep.doc["delta"] = a.delta;
    rep.doc["mode"] = cfg.mode == AtlasMode::faithful ? "faithful" : "practical";
    nlohmann::json sing = nlohmann::json::array();
    for (const auto& w : s.singular) sing.push_back(point_json(w));
    rep.doc["singular_points"] = sing;
    if (cfg.mode == AtlasMode::faithful) {
        rep.doc["faithful_gamma"] = faithful_gamma(a.n, s.poly.degree(), s.K);
        rep.doc["kappa_bound"] = kappa_bound(a.n, s.poly.degree(), s.K, a.delta);
    }
    Atlas atlas = build_atlas(s.poly, a.level, s.K, a.delta, cfg);
    rep.doc["gamma"] = atlas.gamma();
    AtlasChecks c = check_atlas(atlas, a.chart_samples, cfg.seed ^ 0x43484152ULL);
    put_atlas(rep.doc, atlas, c);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < atlas.size(); ++i)
        if (!verify_chart(atlas.chart(i).chart, a.chart_samples, cfg.seed + i).passed) ++failed;
    rep.doc["charts_failing_verification"] = failed;
    rep.check("coverage", c.coverage);
    rep.check("connected", c.components == 1);
    rep.check("edge_rho", c.min_rho >= atlas.rho_min());
    rep.check("chart_on_Y", c.max_chart_residual <= 1e-10);
    rep.check("chart_verification", failed == 0);
    if (cfg.mode == AtlasMode::faithful)
        rep.check("kappa_bound", static_cast<double>(atlas.size()) <= rep.doc["kappa_bound"].get<double>());
    if (!a.atlas_out.empty()) {
        std::ofstream f(a.atlas_out);
        f << to_json(atlas) << '\n';
    }
    rep.columns = {"level", "charts"};
    auto per = atlas.charts_per_level();
    for (std::size_t l = 0; l < per.size(); ++l)
        if (per[l]) rep.rows.push_back({l, per[l]});
    return rep;
}

Report chain(const ChainArgs& a) {
    Report rep;
    Surface s = prepare_surface(a.surface);
    AtlasConfig cfg = a.surface.config;
    cfg.singular_points = s.singular;
    Atlas atlas = build_atlas(s.poly, a.surface.level, s.K, a.surface.delta, cfg);
    const double norm = l1_norm(s.poly);
    rep.doc["command"] = "chain";
    rep.doc["polynomial"] = to_string(s.poly);
    rep.doc["kappa"] = atlas.size();
    rep.doc["u1"] = point_json(a.u1);
    rep.doc["u2"] = point_json(a.u2);
    for (const CVector* u : {&a.u1, &a.u2})
        if (std::abs(s.poly(*u) - a.surface.level) > 1e-9 * std::max(1.0, norm))
            throw DomainError("point is not on the level set");
    KobayashiResult kr = kobayashi_bound(atlas, a.u1, a.u2);
    rep.doc["chain"] = kr.chain.charts;
    rep.doc["rho"] = kr.chain.rho;
    rep.doc["length"] = kr.chain.length();
    rep.doc["kobayashi_bound"] = kr.bound;
    nlohmann::json links = nlohmann::json::array();
    bool valid = true;
    for (std::size_t k = 0; k + 1 < kr.chain.charts.size(); ++k) {
        const AtlasEdge* e = atlas.edge_between(kr.chain.charts[k], kr.chain.charts[k + 1]);
        valid = valid && e && e->rho >= atlas.rho_min();
    }
    for (const auto& l : kr.links)
        links.push_back({{"chart", l.chart}, {"a", cj(l.a)}, {"b", cj(l.b)}, {"distance", l.distance},
                         {"in_third_disk", l.in_third_disk}, {"within_bound", l.within_bound}});
    rep.doc["links"] = links;
    rep.check("chain_valid", valid);
    rep.check("kobayashi_mechanism", kr.mechanism_ok);
    rep.check("bound_is_three_ell", kr.bound == 3.0 * static_cast<double>(kr.chain.length()));
    rep.columns = {"step", "chart", "rho_to_next", "poincare"};
    for (std::size_t k = 0; k < kr.chain.charts.size(); ++k)
        rep.rows.push_back({k, kr.chain.charts[k], k < kr.chain.rho.size() ? nlohmann::json(kr.chain.rho[k]) : "",
                            kr.links[k].distance});
    return rep;
}

// ---------------------------------------------------------------- doubling-bound

Report doubling_bound(const BoundArgs& a) {
    Report rep;
    DoublingParams params{a.p, a.A_p};
    rep.doc["command"] = "doubling-bound";
    rep.doc["p"] = a.p;
    rep.doc["A_p"] = a.A_p;
    rep.doc["A_prime"] = params.A_prime();
    const double cp = c_p_constant(params, a.alpha, a.beta);
    rep.doc["c_p"] = {{"alpha", a.alpha}, {"beta", a.beta}, {"value", cp}};
    const double nc = nonconcentric_constant(params, a.rho);
    rep.doc["nonconcentric"] = {{"rho", a.rho}, {"value", nc}};
    double a2 = a.alpha + 0.5 * (1.0 - a.alpha);
    rep.check("c_p_monotone_alpha", c_p_constant(params, a2, a.beta) >= cp);
    double b2 = 0.5 * (a.beta + a.alpha);
    rep.check("c_p_monotone_beta", c_p_constant(params, a.alpha, b2) <= cp);
    double half = nonconcentric_constant(params, a.rho / 2.0);
    rep.check("nonconcentric_homogeneity",
              std::abs(half - std::pow(2.0, a.p) * nc) <= 1e-12 * std::abs(half));
    if (a.dc) rep.doc["kappa_lower"] = kappa_lower(*a.dc, a.rho, a.p, params);
    if (a.ell) {
        UniformBound u = uniform_bound(*a.ell, *a.ell, a.rho, a.p, params);
        rep.doc["uniform"] = {{"ell", u.ell}, {"log_value", u.log_value}};
    }
    if (a.K && a.delta) {
        PolyDCBound b = poly_dc_bound(a.n, a.d, a.d1, *a.K, *a.delta, params);
        rep.doc["poly_dc_bound"] = {{"n", a.n},           {"d", a.d},
                                    {"d1", a.d1},         {"K", *a.K},
                                    {"delta", *a.delta},  {"p", b.p},
                                    {"log_C3", b.log_C3}, {"exponent", b.exponent},
                                    {"log_bound", b.log_bound}};
    }
    return rep;
}

// ---------------------------------------------------------------- experiments

Report hyperbola(const HyperbolaArgs& a) {
    Report rep;
    rep.doc["command"] = "experiment hyperbola";
    rep.doc["gamma"] = a.config.gamma;
    rep.doc["seed"] = a.config.seed;
    rep.doc["mode"] = a.config.mode == AtlasMode::faithful ? "faithful" : "practical";
    rep.columns = {"eps", "log2_inv_eps", "kappa", "components", "dc", "dc_expected", "kappa_lower", "chain_length",
                   "log_chain_bound", "ell"};
    DoublingParams params{2, 1.0};
    std::vector<double> xs, ks, lows, logs;
    nlohmann::json points = nlohmann::json::array();
    bool dist_ok = true, dc_ok = true, below = true, cover_ok = true, bound_ok = true;
    std::vector<double> eps = a.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::vector<std::size_t> lengths;
    for (double e : eps) {
        if (!(e > 0.0 && e < 0.5)) throw DomainError("eps must lie in (0, 1/2)");
        const double c = e * e;
        AtlasConfig cfg = a.config;
        cfg.singular_points = {CVector::Zero(2)};
        cfg.coverage_samples = a.samples;
        Atlas atlas = build_atlas(hyperbola_poly(), c, 1.0, std::sqrt(2.0) * e, cfg);
        AtlasChecks chk = check_atlas(atlas, 4, cfg.seed ^ 0x48595045ULL);
        nlohmann::json rec;
        rec["eps"] = e;
        put_atlas(rec, atlas, chk);
        cover_ok = cover_ok && chk.coverage && chk.components == 1 && chk.max_chart_residual <= 1e-10;

        // distance to the singular point along the vanishing cycle and over random points of Y
        std::vector<CVector> pts;
        for (int k = 0; k < 64; ++k) {
            Complex t = std::polar(e, 2.0 * std::numbers::pi * k / 64);
            CVector z(2);
            z << t, std::conj(t);
            pts.push_back(z);
        }
        std::mt19937_64 rng(cfg.seed ^ 0x44495354ULL);
        auto g = hyperbola_g_sampler(e);
        for (int s = 0; s < a.samples; ++s) pts.push_back(*g(rng));
        double res = 0.0;
        for (const auto& z : pts) res = std::max(res, std::abs(z[0] * z[1] - c));
        double dist = sampled_min_norm(pts);
        rec["sampled_distance"] = dist;
        rec["distance_expected"] = std::sqrt(2.0) * e;
        dist_ok = dist_ok && std::abs(dist - std::sqrt(2.0) * e) <= 1e-10 && res <= 1e-12;

        double dc = empirical_dc([](const CVector& z) { return z[1]; }, hyperbola_g_sampler(e),
                                 hyperbola_omega_sampler(e), a.samples, cfg.seed, a.samples);
        double expected = 1.0 / (2.0 * c);
        rec["dc"] = dc;
        rec["dc_expected"] = expected;
        dc_ok = dc_ok && std::abs(dc - expected) <= 0.05 * expected;
        double kl = kappa_lower(dc, 0.1, 2, params);
        rec["kappa_lower"] = kl;
        below = below && kl <= static_cast<double>(atlas.size());

        std::size_t len = 0;
        double log_cb = 0.0;
        std::size_t ell = 0;
        if (a.bounds) {
            CVector u1(2), u2(2);
            u1 << 1.0, c;
            u2 << c, 1.0;
            ChartChain ch = chain_between(atlas, u1, u2);
            len = ch.length();
            lengths.push_back(len);
            rec["chain_length"] = len;
            Propagator prop(atlas, hyperbola_omega(e), params);
            PropagationResult pr = prop.bound(u2);
            log_cb = pr.log_bound;
            rec["chain_bound"] = nlohmann::json::parse(to_json(pr));
            UniformBound ub = uniform_bound(atlas, 0.1, 2, params);
            ell = ub.ell;
            rec["ell"] = ell;
            rec["log_uniform_bound"] = ub.log_value;
            rec["log_uniform_bound_kappa"] = ub.log_kappa_value;
            bound_ok = bound_ok && log_cb >= std::log(dc) && ub.log_value >= std::log(dc);
        }
        points.push_back(rec);
        double x = std::log2(1.0 / e);
        xs.push_back(x);
        ks.push_back(static_cast<double>(atlas.size()));
        lows.push_back(kl);
        logs.push_back(std::log(1.0 / e));
        rep.rows.push_back({e, x, atlas.size(), chk.components, dc, expected, kl, len, log_cb, ell});
    }
    rep.doc["points"] = points;
    if (xs.size() >= 2) {
        LinearFit f = linear_fit(xs, ks);
        rep.doc["kappa_fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
        LinearFit fl = linear_fit(logs, lows);
        rep.doc["kappa_lower_fit"] = {{"slope", fl.slope}, {"intercept", fl.intercept}, {"r2", fl.r2}};
        if (xs.size() >= 3) rep.check("kappa_affine", f.r2 >= 0.99);
        rep.check("kappa_lower_affine", fl.r2 >= 0.99);
    }
    rep.check("atlas", cover_ok);
    rep.check("distance", dist_ok);
    rep.check("dc", dc_ok);
    rep.check("kappa_lower_below_kappa", below);
    if (a.bounds) {
        rep.check("bounds_dominate_dc", bound_ok);
        rep.check("chain_length_monotone", std::is_sorted(lengths.begin(), lengths.end()));
    }
    return rep;
}

Report quadric(const QuadricArgs& a) {
    if (a.n != 2 && a.n != 3) throw DomainError("quadric experiment supports n = 2 or 3");
    Report rep;
    const int n = a.n;
    rep.doc["command"] = "experiment quadric";
    rep.doc["n"] = n;
    rep.doc["gamma"] = a.config.gamma;
    rep.doc["seed"] = a.config.seed;
    rep.doc["kappa_kind"] = n == 2 ? "charts" : "balls_meeting_Y";
    rep.columns = {"eps", "log2_inv_eps", "kappa", "sampled_distance", "dc"};
    std::vector<double> eps = a.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::vector<double> xs, ks;
    nlohmann::json points = nlohmann::json::array();
    bool dist_ok = true, cover_ok = true;
    for (double e : eps) {
        if (!(e > 0.0 && e < 0.5)) throw DomainError("eps must lie in (0, 1/2)");
        const double c = e * e;
        nlohmann::json rec;
        rec["eps"] = e;
        std::mt19937_64 rng(a.config.seed ^ 0x51554144ULL);
        std::vector<CVector> pts;
        std::normal_distribution<double> g(0.0, 1.0);
        for (int k = 0; k < 64; ++k) {
            Eigen::VectorXd x(n);
            for (int i = 0; i < n; ++i) x[i] = g(rng);
            pts.push_back((e / x.norm()) * x.cast<Complex>());
        }
        auto gs = quadric_g_sampler(n, e);
        for (int s = 0; s < a.samples; ++s)
            if (auto z = gs(rng)) pts.push_back(*z);
        double res = 0.0;
        for (const auto& z : pts) res = std::max(res, std::abs(z.cwiseProduct(z).sum() - c));
        double dist = sampled_min_norm(pts);
        rec["sampled_distance"] = dist;
        rec["residual"] = res;
        dist_ok = dist_ok && std::abs(dist - e) <= 1e-10 && res <= 1e-12;
        double dc = empirical_dc([](const CVector& z) { return z[0]; }, quadric_g_sampler(n, e),
                                 quadric_omega_sampler(n, e), a.samples, a.config.seed, a.samples);
        rec["dc"] = dc;
        std::size_t kappa = 0;
        if (n == 2) {
            AtlasConfig cfg = a.config;
            cfg.singular_points = {CVector::Zero(2)};
            cfg.coverage_samples = a.samples;
            Atlas atlas = build_atlas(quadric_poly(2), c, 2.0, e, cfg);
            AtlasChecks chk = check_atlas(atlas, 4, cfg.seed ^ 0x51ULL);
            put_atlas(rec, atlas, chk);
            cover_ok = cover_ok && chk.coverage && chk.components == 1 && chk.max_chart_residual <= 1e-10;
            kappa = atlas.size();
        } else {
            BallCount b = balls_meeting_level(quadric_poly(n), c, {CVector::Zero(n)}, e, a.config.gamma,
                                              a.config.cube_budget);
            rec["kappa"] = b.meeting;
            rec["candidate_balls"] = b.candidates;
            rec["balls_per_level"] = b.per_level;
            kappa = b.meeting;
        }
        points.push_back(rec);
        xs.push_back(std::log2(1.0 / e));
        ks.push_back(static_cast<double>(kappa));
        rep.rows.push_back({e, xs.back(), kappa, dist, dc});
    }
    rep.doc["points"] = points;
    if (xs.size() >= 2) {
        LinearFit f = linear_fit(xs, ks);
        rep.doc["kappa_fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
        if (xs.size() >= 3) rep.check("kappa_affine", f.r2 >= 0.99);
    }
    rep.check("distance", dist_ok);
    if (n == 2) rep.check("atlas", cover_ok);
    return rep;
}

std::vector<CVector> product_critical_points(int d) {
    if (d < 2) throw DomainError("product experiment needs d >= 2");
    // f(z) = prod_{j<d}(z - j); f' has one root in each (j, j+1)
    PolyC f = constant_poly(1, 1.0);
    for (int j = 0; j < d; ++j) f = f * variable(1, 0).plus_constant(-static_cast<double>(j));
    PolyC df = f.derivative(0);
    auto val = [&](double x) {
        CVector z(1);
        z[0] = x;
        return df(z).real();
    };
    std::vector<double> roots;
    for (int j = 0; j + 1 < d; ++j) {
        double lo = j, hi = j + 1;
        double flo = val(lo);
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            double fm = val(mid);
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push_back(0.5 * (lo + hi));
    }
    std::vector<CVector> pts;
    for (double a : roots)
        for (double b : roots) {
            CVector w(2);
            w << a, b;
            pts.push_back(w);
        }
    return pts;
}

Report product(const ProductArgs& a) {
    if (a.d > 4) throw BudgetExceeded("product experiment is limited to d <= 4");
    Report rep;
    const int d = a.d;
    rep.doc["command"] = "experiment product";
    rep.doc["d"] = d;
    rep.doc["gamma"] = a.gamma;
    std::vector<CVector> crit = product_critical_points(d);
    // P = f(z) f(y)
    PolyC fz = constant_poly(2, 1.0), fy = constant_poly(2, 1.0);
    for (int j = 0; j < d; ++j) {
        fz = fz * variable(2, 0).plus_constant(-static_cast<double>(j));
        fy = fy * variable(2, 1).plus_constant(-static_cast<double>(j));
    }
    PolyC P = fz * fy;
    rep.doc["polynomial"] = to_string(P);
    SingularSet sing = make_singular_set(P, crit);
    rep.doc["singular_points"] = nlohmann::json::array();
    for (const auto& w : crit) rep.doc["singular_points"].push_back(point_json(w));
    rep.check("singular_count", static_cast<int>(sing.size()) == (d - 1) * (d - 1));
    rep.check("nondegenerate", sing.all_nondegenerate());
    // cube Q_{d+1}: [-1, d] for the real parts, centered interval of the same size for the imaginary parts
    const double half = 0.5 * (d + 1);
    const double center_re = 0.5 * (d - 1);
    std::vector<RVector> punctures;
    for (const auto& w : crit) {
        RVector x = realify(w);
        for (int i = 0; i < 2; ++i) {
            x[2 * i] = (x[2 * i] - center_re) / half;
            x[2 * i + 1] = x[2 * i + 1] / half;
        }
        punctures.push_back(x);
    }
    rep.columns = {"eps", "log2_inv_eps", "kappa", "count_bound", "ratio"};
    std::vector<double> eps = a.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::vector<double> ratios, xs, ks;
    nlohmann::json points = nlohmann::json::array();
    bool sep_ok = true, bound_ok = true;
    for (double e : eps) {
        if (!(e > 0.0 && e < 0.5)) throw DomainError("eps must lie in (0, 1/2)");
        const double delta = e / half;
        WhitneyCover cover = build_cover(4, punctures, delta, a.gamma);
        std::size_t bad = 0;
        for (std::size_t i = 0; i < cover.size(); ++i) {
            SubCube c = cover.cube(i);
            for (const auto& p : punctures)
                if (!ball_separated_exact(c, p, a.gamma)) ++bad;
        }
        double bound = count_bound(4, punctures.size(), a.gamma, delta);
        double x = std::log2(1.0 / e);
        double ratio = static_cast<double>(cover.size()) / ((d - 1) * (d - 1) * x);
        sep_ok = sep_ok && bad == 0;
        bound_ok = bound_ok && static_cast<double>(cover.size()) <= bound;
        points.push_back({{"eps", e},
                          {"delta_unit_cube", delta},
                          {"kappa", cover.size()},
                          {"count_bound", bound},
                          {"ratio", ratio},
                          {"level_counts", cover.level_counts()}});
        ratios.push_back(ratio);
        xs.push_back(x);
        ks.push_back(static_cast<double>(cover.size()));
        rep.rows.push_back({e, x, cover.size(), bound, ratio});
    }
    rep.doc["points"] = points;
    rep.check("separation", sep_ok);
    rep.check("count_bound", bound_ok);
    if (ratios.size() >= 2) {
        auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        double spread = *hi / *lo - 1.0;
        rep.doc["ratio_spread"] = spread;
        LinearFit f = linear_fit(xs, ks);
        rep.doc["kappa_fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
                                {"slope_per_puncture", f.slope / ((d - 1) * (d - 1))}};
        rep.check("ratio_stable", spread <= 0.15);
    }
    return rep;
}

// ---------------------------------------------------------------- verify

Report verify(std::uint64_t seed, int samples) {
    Report rep;
    rep.doc["command"] = "verify";
    rep.doc["seed"] = seed;
    std::mt19937_64 rng(seed);

    bool eul = true;
    for (int n = 1; n <= 8; ++n)
        for (int k = 0; k < n; ++k) eul = eul && eulerian(n, k) == eulerian_brute_force(n, k);
    rep.check("valency_eulerian", eul);
    double worst = 0.0;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 200; ++s) {
        Complex z;
        do z = Complex(0.9 * u(rng), 0.9 * u(rng));
        while (std::abs(z) > 0.9);
        int n = 1 + s % 6;
        Complex series = polylog_series(n, z, 2000);
        Complex closed = polylog_neg(n, z);
        worst = std::max(worst, std::abs(closed - series) / std::max(1.0, std::abs(series)));
    }
    rep.doc["polylog_worst_error"] = worst;
    rep.check("valency_polylog", worst <= 1e-10);

    std::size_t bad = 0, tested = 0, missed = 0;
    for (int m = 1; m <= 3; ++m) {
        std::vector<RVector> punct;
        std::uniform_int_distribution<int> q(-15, 15);
        for (int j = 0; j < 3; ++j) {
            RVector p(m);
            for (auto& v : p) v = q(rng) / 16.0;
            punct.push_back(p);
        }
        WhitneyCover cover = build_cover(m, punct, 1.0 / 64, 2.0);
        for (std::size_t i = 0; i < cover.size(); ++i)
            for (const auto& p : punct)
                if (!ball_separated_exact(cover.cube(i), p, 2.0)) ++bad;
        for (int s = 0; s < samples / 10; ++s) {
            RVector x(m);
            for (auto& v : x) v = u(rng);
            double dmin = 1e300;
            for (const auto& p : punct) {
                double d2 = 0;
                for (int i = 0; i < m; ++i) d2 += (x[i] - p[i]) * (x[i] - p[i]);
                dmin = std::min(dmin, std::sqrt(d2));
            }
            if (dmin < 1.0 / 64) continue;
            ++tested;
            if (cover.containing(x).empty()) ++missed;
        }
    }
    rep.check("whitney_separation", bad == 0);
    rep.check("whitney_coverage", missed == 0 && tested > 0);

    AtlasConfig cfg;
    cfg.seed = seed;
    cfg.singular_points = {CVector::Zero(2)};
    cfg.coverage_samples = samples;
    const double e = 0.1;
    Atlas atlas = build_atlas(hyperbola_poly(), e * e, 1.0, std::sqrt(2.0) * e, cfg);
    AtlasChecks chk = check_atlas(atlas, 2, seed);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < atlas.size(); ++i)
        if (!verify_chart(atlas.chart(i).chart, 20, seed + i).passed) ++failed;
    rep.doc["hyperbola_kappa"] = atlas.size();
    rep.check("atlas_coverage", chk.coverage);
    rep.check("atlas_connected", chk.components == 1);
    rep.check("atlas_chart_on_Y", chk.max_chart_residual <= 1e-10);
    rep.check("ift_charts", failed == 0);

    Propagator prop(atlas, hyperbola_omega(e), DoublingParams{2, 1.0});
    auto gs = hyperbola_g_sampler(e);
    auto os = hyperbola_omega_sampler(e);
    double omax = 0.0;
    std::vector<CVector> omega_pts;
    for (int s = 0; s < samples; ++s) omega_pts.push_back(*os(rng));
    bool sound = true;
    for (int t = 0; t < 5; ++t) {
        PolyC S = constant_poly(2, Complex(u(rng), u(rng)));
        S = S + variable(2, 0).scaled(Complex(u(rng), u(rng))) + variable(2, 1).scaled(Complex(u(rng), u(rng)));
        omax = 0.0;
        for (const auto& z : omega_pts) omax = std::max(omax, std::abs(S(z)));
        for (int k = 0; k < 5; ++k) {
            CVector z = *gs(rng);
            PropagationResult r = prop.bound(z);
            sound = sound && std::log(std::abs(S(z)) / omax) <= r.log_bound;
        }
    }
    rep.check("propagation_soundness", sound);
    return rep;
}

}  // namespace doubling::cli
