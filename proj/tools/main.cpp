#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "experiments.hpp"

using namespace doubling;
using namespace doubling::cli;

namespace {

struct Common {
    std::uint64_t seed = 0;
    int samples = 10000;
    std::string mode = "practical";
    double gamma = 0.0;  // 0: command default
    std::string out;
    std::string format = "report";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "seed for every sampler");
    sub->add_option("--samples", c.samples, "sample count for coverage and oracles")->check(CLI::PositiveNumber);
    sub->add_option("--mode", c.mode, "atlas mode")->check(CLI::IsMember({"faithful", "practical"}));
    sub->add_option("--gamma", c.gamma, "doubling factor (> 1)");
    sub->add_option("--out", c.out, "write the report here instead of stdout");
    sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"report", "table"}));
}

AtlasConfig atlas_config(const Common& c, double default_gamma) {
    AtlasConfig cfg;
    cfg.seed = c.seed;
    cfg.mode = c.mode == "faithful" ? AtlasMode::faithful : AtlasMode::practical;
    cfg.gamma = c.gamma > 0.0 ? c.gamma : default_gamma;
    cfg.coverage_samples = c.samples;
    return cfg;
}

std::vector<double> dyadic(int lo, int hi) {
    std::vector<double> v;
    for (int k = lo; k <= hi; ++k) v.push_back(std::ldexp(1.0, -k));
    return v;
}

int emit(const Report& rep, const Common& c) {
    std::string text = rep.render(c.format == "table" ? Format::table : Format::report);
    if (c.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) throw Error("cannot open " + c.out);
        f << text;
    }
    return rep.passed ? 0 : 1;
}

void check_gamma(double g) {
    if (g != 0.0 && !(g > 1.0)) throw CLI::ValidationError("--gamma", "gamma must exceed 1");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"doubling coverings of complex hypersurfaces"};
    app.require_subcommand(1);

    Common common;

    auto* cube = app.add_subcommand("cover-cube", "Whitney ball covering of the cube minus the punctures");
    add_common(cube, common);
    CoverCubeArgs cube_args;
    std::string punctures;
    cube->add_option("--dim", cube_args.dim, "real dimension m")->check(CLI::Range(1, 16));
    cube->add_option("--punctures", punctures, "points 'x1,x2;y1,y2'");
    cube->add_option("--delta", cube_args.delta)->check(CLI::Range(0.0, 1.0));
    cube->add_flag("--cubes", cube_args.cubes, "include the cube list");

    HypersurfaceArgs surf;
    std::string level = "0,0", singular;
    auto add_surface = [&](CLI::App* sub) {
        sub->add_option("--poly", surf.poly, "polynomial, e.g. 'z1*z2'")->required();
        sub->add_option("--n", surf.n, "number of variables")->check(CLI::Range(2, 8));
        sub->add_option("--level", level, "level c as 're,im'");
        sub->add_option("--K", surf.K, "gradient constant (estimated when omitted)");
        sub->add_option("--delta", surf.delta)->required()->check(CLI::Range(0.0, 1.0));
        sub->add_option("--singular", singular, "singular points, realified 'x1,y1,x2,y2;...'");
    };
    auto* hyp = app.add_subcommand("cover-hypersurface", "doubling atlas of {P = c}");
    add_common(hyp, common);
    add_surface(hyp);
    hyp->add_option("--atlas-out", surf.atlas_out, "write the atlas document here");

    auto* ch = app.add_subcommand("chain", "chart chain and Kobayashi bound between two points");
    add_common(ch, common);
    add_surface(ch);
    std::string u1, u2;
    ch->add_option("--u1", u1, "realified point")->required();
    ch->add_option("--u2", u2, "realified point")->required();

    auto* db = app.add_subcommand("doubling-bound", "doubling constants for p-valent functions");
    add_common(db, common);
    BoundArgs bargs;
    double dc = 0.0, K = 0.0, bdelta = 0.0;
    std::size_t ell = 0;
    db->add_option("--p", bargs.p)->check(CLI::PositiveNumber);
    db->add_option("--A-p", bargs.A_p);
    db->add_option("--alpha", bargs.alpha);
    db->add_option("--beta", bargs.beta);
    db->add_option("--rho", bargs.rho);
    db->add_option("--dc", dc, "measured doubling constant for kappa_lower");
    db->add_option("--ell", ell, "chain length for the uniform bound");
    db->add_option("--dim", bargs.n);
    db->add_option("--degree", bargs.d);
    db->add_option("--d1", bargs.d1);
    db->add_option("--K", K);
    db->add_option("--delta", bdelta);

    auto* ex = app.add_subcommand("experiment", "worked examples");
    ex->require_subcommand(1);
    std::string eps_text;
    auto* eh = ex->add_subcommand("hyperbola", "xy = eps^2");
    add_common(eh, common);
    eh->add_option("--eps", eps_text, "comma-separated eps values (default 2^-3..2^-9)");
    bool no_bounds = false;
    eh->add_flag("--no-bounds", no_bounds, "skip chain and uniform bounds");
    auto* eq = ex->add_subcommand("quadric", "sum z_j^2 = eps^2");
    add_common(eq, common);
    QuadricArgs qargs;
    eq->add_option("--eps", eps_text, "comma-separated eps values (default 2^-3..2^-6)");
    eq->add_option("--n", qargs.n);
    auto* ep = ex->add_subcommand("product", "prod (z - j) prod (y - j)");
    add_common(ep, common);
    ProductArgs pargs;
    ep->add_option("--d", pargs.d)->check(CLI::PositiveNumber);
    ep->add_option("--eps", eps_text, "comma-separated eps values (default 2^-6,2^-8,2^-10)");

    auto* ve = app.add_subcommand("verify", "quick invariant suite over all modules");
    add_common(ve, common);

    try {
        app.parse(argc, argv);
        check_gamma(common.gamma);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cube->parsed()) {
            cube_args.punctures = parse_points(punctures, cube_args.dim);
            cube_args.gamma = common.gamma > 0.0 ? common.gamma : 2.0;
            cube_args.samples = common.samples;
            cube_args.seed = common.seed;
            return emit(cover_cube(cube_args), common);
        }
        if (hyp->parsed() || ch->parsed()) {
            auto lv = parse_list(level);
            if (lv.size() != 2) throw ParseError("--level needs 're,im'");
            surf.level = Complex(lv[0], lv[1]);
            for (const auto& x : parse_points(singular, 2 * surf.n)) surf.singular.push_back(complexify(x));
            surf.config = atlas_config(common, 6.0);
            if (hyp->parsed()) return emit(cover_hypersurface(surf), common);
            ChainArgs cargs{surf, parse_complex_point(u1, surf.n), parse_complex_point(u2, surf.n)};
            return emit(chain(cargs), common);
        }
        if (db->parsed()) {
            if (db->count("--dc")) bargs.dc = dc;
            if (db->count("--ell")) bargs.ell = ell;
            if (db->count("--K")) bargs.K = K;
            if (db->count("--delta")) bargs.delta = bdelta;
            return emit(doubling_bound(bargs), common);
        }
        if (eh->parsed()) {
            HyperbolaArgs a;
            a.eps = eps_text.empty() ? dyadic(3, 9) : parse_list(eps_text);
            a.config = atlas_config(common, 6.0);
            a.samples = common.samples;
            a.bounds = !no_bounds;
            return emit(hyperbola(a), common);
        }
        if (eq->parsed()) {
            qargs.eps = eps_text.empty() ? dyadic(3, 6) : parse_list(eps_text);
            qargs.config = atlas_config(common, qargs.n == 2 ? 6.0 : 2.0);
            qargs.samples = common.samples;
            return emit(quadric(qargs), common);
        }
        if (ep->parsed()) {
            pargs.eps = eps_text.empty() ? std::vector<double>{std::ldexp(1.0, -6), std::ldexp(1.0, -8),
                                                               std::ldexp(1.0, -10)}
                                         : parse_list(eps_text);
            pargs.gamma = common.gamma > 0.0 ? common.gamma : 2.0;
            pargs.samples = common.samples;
            pargs.seed = common.seed;
            return emit(product(pargs), common);
        }
        if (ve->parsed()) return emit(verify(common.seed, common.samples), common);
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad number (" << e.what() << ")\n";
        return 2;
    }
    return 2;
}
