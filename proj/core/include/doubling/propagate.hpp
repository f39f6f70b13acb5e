#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "doubling/atlas.hpp"
#include "doubling/valency.hpp"

namespace doubling {

// |S(z)| >= bound or |S(z)| <= bound; a null S means the Euclidean norm |z|.
struct Constraint {
    enum class Kind { at_least, at_most };
    std::optional<PolyC> S;
    Kind kind = Kind::at_least;
    double bound = 0.0;

    double value(const CVector& z) const;
    // positive inside, in units of |S|
    double slack(const CVector& z) const;
    // sup of ||grad|| over the closed polydisk of radius r around z
    double lipschitz(const CVector& z, double r) const;
};

using PointSampler = std::function<std::optional<CVector>(std::mt19937_64&)>;

struct DomainSpec {
    std::vector<Constraint> constraints;
    PointSampler sampler;
    double tol = 1e-9;

    bool contains(const CVector& z) const;
    // samples that pass the constraints (the sampler may propose outside points)
    std::vector<CVector> sample(std::mt19937_64& rng, int count, const PolyC* p = nullptr,
                                Complex level = 0.0) const;
};

// G: the unit polydisk part of Y.
DomainSpec polydisk_domain(int n, PointSampler sampler);
// Rejection sampler: uniform points of the realified unit cube projected to {P = c}.
PointSampler projected_sampler(const PolyC& p, Complex c);

struct OmegaAnchor {
    std::size_t chart = 0;
    double rho = 0.0;
    CVector witness;
};

// Lower bound of rho(U_j, Omega): a subball of the unit ball whose image stays in Omega.
OmegaAnchor certify_omega(const AtlasChart& chart, const DomainSpec& omega, int witnesses = 16,
                          std::uint64_t seed = 0);
std::vector<OmegaAnchor> omega_anchors(const Atlas& atlas, const DomainSpec& omega, int witnesses = 16,
                                       std::uint64_t seed = 0);

struct EdgeTerm {
    std::size_t from = 0, to = 0;
    double rho = 0.0;
    double log_term = 0.0;  // log c_p - p log rho
};

struct PropagationResult {
    double log_bound = 0.0;
    double bound = 0.0;  // exp(log_bound); inf when it overflows
    ChartChain chain;    // from the Omega anchor to a chart containing z
    std::vector<EdgeTerm> terms;  // first term is the Omega anchor
    int p = 1;
    double log_cp = 0.0;
};

double chain_log_bound(double log_cp, int p, double rho_omega, const std::vector<double>& rho);

class Propagator {
public:
    Propagator(const Atlas& atlas, const DomainSpec& omega, DoublingParams params, int witnesses = 16,
               std::uint64_t seed = 0);
    PropagationResult bound(const CVector& z) const;
    const std::vector<OmegaAnchor>& anchors() const { return anchors_; }
    double log_cp() const { return log_cp_; }

private:
    const Atlas* atlas_;
    DoublingParams params_;
    std::vector<OmegaAnchor> anchors_;
    std::vector<double> rho_omega_;  // per chart, 0 when no anchor
    double log_cp_ = 0.0;
};

PropagationResult chain_bound(const Atlas& atlas, const DomainSpec& omega, const CVector& z,
                              const DoublingParams& params);

// Exhaustive minimum over simple chains; exponential, small atlases only.
PropagationResult chain_bound_exhaustive(const Atlas& atlas, const std::vector<OmegaAnchor>& anchors,
                                         const CVector& z, const DoublingParams& params);

// Longest shortest path in charts (hops + 1); throws Disconnected.
std::size_t graph_diameter(const Atlas& atlas);

struct UniformBound {
    std::size_t ell = 0;
    std::size_t kappa = 0;
    double log_value = 0.0;        // ell * log(c_p / rho^p)
    double log_kappa_value = 0.0;  // kappa * log(c_p / rho^p)
};

UniformBound uniform_bound(const Atlas& atlas, double rho, int p, const DoublingParams& params);
UniformBound uniform_bound(std::size_t ell, std::size_t kappa, double rho, int p, const DoublingParams& params);

double kappa_lower(double dc, double rho, int p, const DoublingParams& params);

struct PolyDCBound {
    int p = 0;
    double log_C3 = 0.0;     // log of log(10^p c_p) C_1
    double exponent = 0.0;   // C_3 / K^{2n}
    double log_bound = 0.0;  // exponent * log(C_2 / (K delta))
};

PolyDCBound poly_dc_bound(int n, int d, int d1, double K, double delta, const DoublingParams& params);

using SampleFunction = std::function<Complex(const CVector&)>;

// max_G |f| over count samples / max_Omega |f| over omega_count samples (fixed, so the
// ratio is non-decreasing in count).
double empirical_dc(const SampleFunction& f, const PointSampler& g_sampler, const PointSampler& omega_sampler,
                    int count, std::uint64_t seed = 0, int omega_count = 10000);

std::string to_json(const PropagationResult& r);

}  // namespace doubling
