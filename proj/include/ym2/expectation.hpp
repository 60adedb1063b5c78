#pragma once

// Yang-Mills expectation values of Wilson loops and loop networks, the
// Wilson-action plaquette integrals whose refinement limit reproduces them,
// and expectation generators for theories with a universal coupling.

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ym2/error.hpp"
#include "ym2/heatkernel.hpp"
#include "ym2/lattice.hpp"
#include "ym2/liegroup.hpp"
#include "ym2/parallel.hpp"
#include "ym2/quadrature.hpp"

namespace ym2 {

/// d_rho e^{-kappa^2 c_rho area / 2}; d_rho at area 0.
inline double wilson_expectation(double area, const Irrep& irrep, double coupling) {
    if (!(area >= 0.0)) throw ParameterError("wilson_expectation: area must be >= 0");
    const double d = static_cast<double>(irrep.dimension);
    if (area == 0.0 || irrep.casimir == 0.0) return d;
    return d * std::exp(-0.5 * coupling * coupling * irrep.casimir * area);
}

/// sqrt(d_rho) * prod_I sqrt(d_I) e^{-kappa^2 c_I |G_I| / 2}.
inline double loop_network_expectation(const GroupSpec& group, const FlagWorldSpec& world,
                                       const LoopNetworkSpec& network, double coupling) {
    const auto irreps = network_irreps(group, world, network);
    const Irrep target = group.irrep(network.target);
    if (tensor_multiplicity(group, irreps, target) < 1)
        throw ValidationError(ErrorCode::E_MULT, "/target", "target not contained in the tensor product");
    double value = std::sqrt(static_cast<double>(target.dimension));
    for (std::size_t i = 0; i < irreps.size(); ++i) {
        if (irreps[i].is_trivial()) continue;
        value *= std::sqrt(static_cast<double>(irreps[i].dimension)) *
                 std::exp(-0.5 * coupling * coupling * irreps[i].casimir * world.domains[i].area);
    }
    return value;
}

/// The same expectation evaluated on a refined lattice whose sub-flags carry
/// the parent's irrep: one heat-kernel factor per sub-domain.
inline double loop_network_expectation(const GroupSpec& group, const FlagWorldSpec& world,
                                       const RefinementPlan& plan, const LoopNetworkSpec& network, double coupling) {
    const auto irreps = network_irreps(group, world, network);
    const Irrep target = group.irrep(network.target);
    if (tensor_multiplicity(group, irreps, target) < 1)
        throw ValidationError(ErrorCode::E_MULT, "/target", "target not contained in the tensor product");
    double value = std::sqrt(static_cast<double>(target.dimension));
    for (std::size_t i = 0; i < irreps.size(); ++i) {
        if (irreps[i].is_trivial()) continue;
        value *= std::sqrt(static_cast<double>(irreps[i].dimension));
        for (double a : plan.parts_of(world.domains[i]))
            value *= std::exp(-0.5 * coupling * coupling * irreps[i].casimir * a);
    }
    return value;
}

/// Value with a quadrature error estimate from order halving.
struct QuadValue {
    double value = 0.0;
    double quad_estimate = 0.0;
};

/// Inverse temperature of the Wilson weight exp(beta (Re tr_b / N_b - 1)) on
/// factor i. Chosen so that the small-area limit reproduces the heat kernel
/// with the factor's Casimir normalization.
inline double wilson_beta(const GroupSpec& group, std::size_t factor, double coupling, double area) {
    return 1.0 / (group.casimir_scale(factor) * coupling * coupling * area);
}

namespace detail {

inline double factor_plaquette_ratio(FactorKind kind, int label, double beta, int order) {
    std::vector<double> edges{0.0};
    if (beta > 0.0 && std::isfinite(beta)) {
        const double width = 1.0 / std::sqrt(beta);
        for (double m : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0})
            if (m * width < std::numbers::pi) edges.push_back(m * width);
    }
    edges.push_back(std::numbers::pi);
    const QuadratureRule rule = composite_gauss_legendre(edges, order);
    std::vector<double> num(rule.size());
    std::vector<double> den(rule.size());
    for (std::size_t j = 0; j < rule.size(); ++j) {
        const double th = rule.nodes[j];
        const double w = rule.weights[j] * std::exp(beta * (std::cos(th) - 1.0));
        if (kind == FactorKind::SU2) {
            const double s = std::sin(th);
            den[j] = w * s * s;
            num[j] = w * s * std::sin((label + 1) * th) / (label + 1);
        } else {
            den[j] = w;
            num[j] = w * std::cos(label * th);
        }
    }
    return pairwise_sum(num) / pairwise_sum(den);
}

}  // namespace detail

/// Ratio of Haar integrals of chi_rho / d_rho against the Wilson weight of
/// one plaquette of the given area. The weight and the character factorize
/// over group factors, so the ratio is a product of one-dimensional
/// integrals (Gauss-Legendre panels refined near the identity).
inline QuadValue plaquette_ratio(const GroupSpec& group, double area, const Irrep& irrep, double coupling,
                                 int quad_order) {
    group.check_label(irrep.label);
    if (!(area > 0.0)) throw ParameterError("plaquette_ratio: area must be positive");
    if (!(coupling > 0.0)) throw ParameterError("plaquette_ratio: coupling must be positive");
    if (quad_order < 2) throw ParameterError("plaquette_ratio: quad_order must be >= 2");
    if (irrep.is_trivial()) return {1.0, 0.0};
    double value = 1.0;
    double coarse = 1.0;
    for (std::size_t i = 0; i < group.rank(); ++i) {
        const int l = irrep.label[i];
        if (l == 0) continue;
        const double beta = wilson_beta(group, i, coupling, area);
        value *= detail::factor_plaquette_ratio(group.factor(i), l, beta, quad_order);
        coarse *= detail::factor_plaquette_ratio(group.factor(i), l, beta, std::max(2, quad_order / 2));
    }
    return {value, std::abs(value - coarse)};
}

/// Product of plaquette ratios over the given sub-areas. Equal areas are
/// integrated once; the product is accumulated as a pairwise sum of logs.
inline QuadValue plaquette_product(const GroupSpec& group, const std::vector<double>& parts, const Irrep& irrep,
                                   double coupling, int quad_order, unsigned threads = 1) {
    std::vector<double> unique(parts);
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    std::vector<QuadValue> ratios(unique.size());
    parallel_for(unique.size(), threads,
                 [&](std::size_t i) { ratios[i] = plaquette_ratio(group, unique[i], irrep, coupling, quad_order); });
    auto lookup = [&](double a) {
        return ratios[static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), a) - unique.begin())];
    };
    std::vector<double> logs;
    std::vector<double> rel;
    logs.reserve(parts.size());
    bool positive = true;
    for (double a : parts) {
        const QuadValue r = lookup(a);
        if (!(r.value > 0.0)) positive = false;
        logs.push_back(positive ? std::log(r.value) : 0.0);
        rel.push_back(r.value != 0.0 ? r.quad_estimate / std::abs(r.value) : r.quad_estimate);
    }
    double product;
    if (positive) {
        product = std::exp(pairwise_sum(logs));
    } else {
        product = 1.0;
        for (double a : parts) product *= lookup(a).value;
    }
    return {product, std::abs(product) * pairwise_sum(rel)};
}

struct LimitRow {
    int k = 1;
    double mesh = 0.0;
    double product = 0.0;
    double target = 0.0;
    double abs_error = 0.0;
    double quad_estimate = 0.0;
};

/// Uniform refinements of a single-domain world into k parts for each k in
/// `meshes`, compared against e^{-kappa^2 c_rho area / 2}.
inline std::vector<LimitRow> refinement_limit_experiment(const GroupSpec& group, const FlagWorldSpec& world,
                                                         const Irrep& irrep, double coupling,
                                                         const std::vector<int>& meshes, int quad_order = 128,
                                                         unsigned threads = 1) {
    if (world.domains.size() != 1) throw ParameterError("refinement_limit_experiment: single-domain world required");
    const double area = world.domains[0].area;
    const double target = std::exp(-0.5 * coupling * coupling * irrep.casimir * area);
    std::vector<LimitRow> rows(meshes.size());
    parallel_for(meshes.size(), threads, [&](std::size_t i) {
        const int k = meshes[i];
        const auto plan = uniform_refinement(world, k);
        const auto& parts = plan.parts.at(world.domains[0].id);
        const QuadValue p = plaquette_product(group, parts, irrep, coupling, quad_order);
        rows[i] = {k, plan.mesh(world), p.value, target, std::abs(p.value - target), p.quad_estimate};
    });
    return rows;
}

inline void write_limit_csv(std::ostream& os, const std::vector<LimitRow>& rows) {
    os << "k,mesh,product,target,abs_error,quad_estimate\n";
    for (const auto& r : rows)
        os << r.k << ',' << format_double(r.mesh) << ',' << format_double(r.product) << ','
           << format_double(r.target) << ',' << format_double(r.abs_error) << ',' << format_double(r.quad_estimate)
           << '\n';
}

/// sum_v <chi_v, f> d_v e^{-t c_v}: the heat-kernel integral of f from its
/// character coefficients.
inline std::complex<double> fourier_integrate_ym(const HeatKernelParams& params,
                                                 const std::vector<std::pair<Irrep, std::complex<double>>>& coefficients) {
    std::vector<double> re;
    std::vector<double> im;
    for (const auto& [irrep, c] : coefficients) {
        const double w = static_cast<double>(irrep.dimension) * std::exp(-params.time * irrep.casimir);
        re.push_back(c.real() * w);
        im.push_back(c.imag() * w);
    }
    return {pairwise_sum(re), pairwise_sum(im)};
}

/// Base-character law: w(domain) = <chi_1>_beta for that domain.
using BaseLaw = std::function<double(const Domain&)>;

/// w = d_1 e^{-lambda |G|}.
inline BaseLaw area_law(double d1, double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("area_law: lambda must be >= 0");
    return [d1, lambda](const Domain& d) { return d1 * std::exp(-lambda * d.area); };
}

/// w = d_1 e^{-lambda sigma(domain)} with a user-supplied sigma per id.
inline BaseLaw sigma_law(double d1, double lambda, std::map<std::string, double> sigma) {
    if (!(lambda >= 0.0)) throw ParameterError("sigma_law: lambda must be >= 0");
    return [d1, lambda, sigma = std::move(sigma)](const Domain& d) {
        auto it = sigma.find(d.id);
        if (it == sigma.end()) throw ParameterError("sigma_law: no sigma for domain '" + d.id + "'");
        if (!(it->second >= 0.0)) throw ParameterError("sigma_law: sigma must be >= 0");
        return d1 * std::exp(-lambda * it->second);
    };
}

/// w read from a table keyed by domain id.
inline BaseLaw table_law(std::map<std::string, double> table) {
    return [table = std::move(table)](const Domain& d) {
        auto it = table.find(d.id);
        if (it == table.end()) throw ParameterError("table_law: no value for domain '" + d.id + "'");
        return it->second;
    };
}

/// A theory whose single-flag expectations are fixed by the base character
/// through <chi_rho>/d_rho = (<chi_1>/d_1)^{c_rho/c_1}.
struct GeneralizedTheory {
    GroupSpec group;
    Irrep base_irrep;
    BaseLaw law;

    GeneralizedTheory(GroupSpec g, Irrep base, BaseLaw l)
        : group(std::move(g)), base_irrep(std::move(base)), law(std::move(l)) {
        group.check_label(base_irrep.label);
        if (base_irrep.is_trivial()) throw ParameterError("GeneralizedTheory: base irrep must be nontrivial");
    }

    double d1() const { return static_cast<double>(base_irrep.dimension); }

    double base_value(const Domain& domain) const {
        const double w = law(domain);
        if (!(w >= 0.0 && w <= d1())) throw ParameterError("GeneralizedTheory: base value outside [0, d_1]");
        return w;
    }
};

/// The Yang-Mills theory as a generalized theory: w = d_1 e^{-kappa^2 c_1 |G| / 2}.
inline GeneralizedTheory yang_mills_theory(const GroupSpec& group, const Irrep& base, double coupling) {
    const double d1 = static_cast<double>(base.dimension);
    return GeneralizedTheory(group, base, area_law(d1, 0.5 * coupling * coupling * base.casimir));
}

inline double generalized_expectation(const GeneralizedTheory& theory, const Irrep& irrep, const Domain& domain) {
    theory.group.check_label(irrep.label);
    const double d = static_cast<double>(irrep.dimension);
    if (irrep.is_trivial()) return 1.0;
    const double w = theory.base_value(domain);
    return d * std::pow(w / theory.d1(), irrep.casimir / theory.base_irrep.casimir);
}

enum class MeasureClass { HAAR, ABS_CONTINUOUS, DELTA };

inline const char* to_string(MeasureClass c) {
    switch (c) {
    case MeasureClass::HAAR: return "HAAR";
    case MeasureClass::ABS_CONTINUOUS: return "ABS_CONTINUOUS";
    case MeasureClass::DELTA: return "DELTA";
    }
    return "?";
}

struct Trichotomy {
    MeasureClass kind;
    double effective_time = 0.0;  // b = -ln(w/d_1)/c_1, middle case only
    std::optional<TruncatedDensity> density;
};

inline Trichotomy generalized_density_trichotomy(const GeneralizedTheory& theory, const Domain& domain, double tol) {
    const double w = theory.base_value(domain);
    if (w == 0.0) return {MeasureClass::HAAR, std::numeric_limits<double>::infinity(), std::nullopt};
    if (w == theory.d1()) return {MeasureClass::DELTA, 0.0, std::nullopt};
    const double b = -std::log(w / theory.d1()) / theory.base_irrep.casimir;
    return {MeasureClass::ABS_CONTINUOUS, b, build_density({theory.group, b}, tol)};
}

/// (d_1 - <chi_1>) / sigma per domain; bounded over shrinking domains for a
/// geometrically regular theory.
inline std::vector<double> regularity_witness(const GeneralizedTheory& theory, const std::vector<Domain>& domains,
                                              const std::function<double(const Domain&)>& sigma) {
    std::vector<double> out;
    for (const auto& d : domains) out.push_back((theory.d1() - theory.base_value(d)) / sigma(d));
    return out;
}

}  // namespace ym2
