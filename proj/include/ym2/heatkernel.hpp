#pragma once

// Heat-kernel density f_t = sum_v d_v e^{-t c_v} chi_v of the lattice
// Yang-Mills measure of a single flag relative to Haar measure, truncated
// with a certified a-priori bound on the omitted tail.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ym2/csv.hpp"
#include "ym2/error.hpp"
#include "ym2/liegroup.hpp"
#include "ym2/random.hpp"

namespace ym2 {

/// Default hard cap on the enumeration norm.
inline constexpr double kDefaultCutoffCap = 1e4;

struct HeatKernelParams {
    GroupSpec group;
    double time = 1.0;  // t = kappa^2 |beta| / 2

    static HeatKernelParams from_coupling(GroupSpec group, double coupling, double area) {
        return {std::move(group), 0.5 * coupling * coupling * area};
    }
};

/// A value together with an absolute error bound.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

/// int_rho^inf r^p exp(-a r^2) dr = a^{-(p+1)/2} Gamma((p+1)/2, a rho^2) / 2.
inline double gaussian_moment_tail(int p, double a, double rho) {
    const double s = 0.5 * (p + 1);
    const double x = a * rho * rho;
    if (x == 0.0) return 0.5 * std::tgamma(s) * std::pow(a, -s);
    if (x > 700.0 + 10.0 * s) return 0.0;
    return 0.5 * boost::math::tgamma(s, x) * std::pow(a, -s);
}

/// Coefficients C_p of the radial majorant sum_p C_p r^p exp(-c_- t r^2) for
/// sum_{v != 0} d_v^2 e^{-t c_v}: the lattice-sum criterion over N^l x Z^k
/// applied to g(r) = 4^m (r + sqrt(k+l))^{2m} e^{-c_- t r^2}, using
/// d_v <= 2^m |v|^m (m SU(2) factors) and c_v >= c_- |v|^2.
inline std::vector<double> dimension_squared_majorant(const GroupSpec& group) {
    const int rank = static_cast<int>(group.rank());
    const int m = group.su2_count();
    const int k = group.torus_count();
    const double shift = std::sqrt(static_cast<double>(rank));
    std::vector<double> coeff(static_cast<std::size_t>(2 * m + rank), 0.0);
    const double lead = std::ldexp(1.0, k) * std::pow(4.0, m);
    for (int iota = 1; iota <= rank; ++iota) {
        const double sphere = boost::math::binomial_coefficient<double>(rank, iota) *
                              std::pow(std::numbers::pi, 0.5 * iota) /
                              (std::ldexp(1.0, iota - 1) * std::tgamma(0.5 * iota));
        for (int j = 0; j <= 2 * m; ++j) {
            const double binom = boost::math::binomial_coefficient<double>(2 * m, j);
            coeff[j + iota - 1] += lead * sphere * binom * std::pow(shift, 2 * m - j);
        }
    }
    return coeff;
}

inline double majorant_integral(const GroupSpec& group, double t, double rho) {
    const auto coeff = dimension_squared_majorant(group);
    const double a = group.c_minus() * t;
    double sum = 0.0;
    for (std::size_t p = 0; p < coeff.size(); ++p) sum += coeff[p] * gaussian_moment_tail(static_cast<int>(p), a, rho);
    return sum;
}

}  // namespace detail

/// Certified upper bound for sum_{|v| > cutoff} d_v^2 e^{-t c_v}.
/// For cutoff < sqrt(rank) the lower integration limit is clamped to 0.
inline double tail_bound_series(const GroupSpec& group, double t, double cutoff) {
    if (!(t > 0.0)) throw ParameterError("tail_bound_series: t must be positive");
    if (!(cutoff >= 1.0)) throw ParameterError("tail_bound_series: cutoff must be >= 1");
    if (std::isinf(cutoff)) return 0.0;
    const double rho = std::max(0.0, cutoff - std::sqrt(static_cast<double>(group.rank())));
    return detail::majorant_integral(group, t, rho);
}

/// Coefficients of sup_bound(t) = 1 + sum_p const_p t^{-(p+1)/2}.
inline std::vector<double> sup_bound_constants(const GroupSpec& group) {
    auto coeff = detail::dimension_squared_majorant(group);
    const double cm = group.c_minus();
    for (std::size_t p = 0; p < coeff.size(); ++p) {
        const double s = 0.5 * (static_cast<double>(p) + 1.0);
        coeff[p] *= 0.5 * std::tgamma(s) * std::pow(cm, -s);
    }
    return coeff;
}

/// Upper bound on sup_g |f_t(g)| = f_t(e).
inline double sup_bound(const HeatKernelParams& params) {
    if (!(params.time > 0.0)) throw ParameterError("sup_bound: time must be positive");
    const auto c = sup_bound_constants(params.group);
    double sum = 1.0;
    for (std::size_t p = 0; p < c.size(); ++p) sum += c[p] * std::pow(params.time, -0.5 * (static_cast<double>(p) + 1.0));
    return sum;
}

struct DensityTerm {
    Irrep irrep;
    double coefficient;  // d_v e^{-t c_v}
};

/// Truncated heat-kernel density with a certified sup-norm tail bound.
class TruncatedDensity {
public:
    TruncatedDensity(HeatKernelParams params, std::vector<DensityTerm> terms, double tail_bound, double cutoff)
        : params_(std::move(params)), terms_(std::move(terms)), tail_bound_(tail_bound), cutoff_(cutoff) {
        const std::size_t r = params_.group.rank();
        max_label_.assign(r, 0);
        for (const auto& term : terms_)
            for (std::size_t i = 0; i < r; ++i) max_label_[i] = std::max(max_label_[i], std::abs(term.irrep.label[i]));
    }

    const HeatKernelParams& params() const noexcept { return params_; }
    const GroupSpec& group() const noexcept { return params_.group; }
    const std::vector<DensityTerm>& terms() const noexcept { return terms_; }
    double tail_bound() const noexcept { return tail_bound_; }
    double cutoff() const noexcept { return cutoff_; }

    /// Largest |label| entry kept for factor i.
    int max_label(std::size_t i) const { return max_label_.at(i); }

    /// Highest trigonometric frequency of the truncated density in factor i.
    int max_frequency(std::size_t i) const { return max_label_.at(i) + (group().factor(i) == FactorKind::SU2 ? 1 : 0); }

    /// Truncated sum at `point`. Torus terms enter as real parts, which equals
    /// pairing z with -z since the kept set and coefficients are symmetric.
    double evaluate(const ClassPoint& point) const {
        const GroupSpec& g = group();
        const std::size_t r = g.rank();
        if (point.coords.size() != r) throw StructuralError("class point arity does not match group");
        std::vector<std::vector<double>> su2_tables(r);
        bool has_torus = false;
        for (std::size_t i = 0; i < r; ++i) {
            if (g.factor(i) == FactorKind::SU2) {
                su2_tables[i] = su2_character_table(max_label_[i], point.coords[i]);
            } else {
                has_torus = true;
            }
        }
        double sum = 0.0;
        for (const auto& term : terms_) {
            double v = term.coefficient;
            double phase = 0.0;
            for (std::size_t i = 0; i < r; ++i) {
                const int l = term.irrep.label[i];
                if (g.factor(i) == FactorKind::SU2) {
                    v *= su2_tables[i][l];
                } else {
                    phase += l * point.coords[i];
                }
            }
            if (has_torus) v *= std::cos(phase);
            sum += v;
        }
        return sum;
    }

    Estimate operator()(const ClassPoint& point) const { return {evaluate(point), tail_bound_}; }

    /// The density as a class function; breakpoints are left empty.
    ClassFunction as_class_function() const {
        return {[this](const ClassPoint& p) { return std::complex<double>(evaluate(p), 0.0); }, Smoothness::Analytic, {}};
    }

private:
    HeatKernelParams params_;
    std::vector<DensityTerm> terms_;
    double tail_bound_;
    double cutoff_;
    std::vector<int> max_label_;
};

/// Smallest integer cutoff R >= 1 with tail_bound_series(R) <= tol.
inline double required_cutoff(const GroupSpec& group, double t, double tol, double cap = kDefaultCutoffCap) {
    auto ok = [&](double R) { return tail_bound_series(group, t, R) <= tol; };
    double hi = 1.0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 64.0 * cap) throw ResourceError("required cutoff exceeds " + format_double(64.0 * cap), hi);
    }
    double lo = hi / 2.0;
    if (hi == 1.0) return 1.0;
    while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        if (ok(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

/// Builds the truncated density whose certified tail bound is <= tol.
inline TruncatedDensity build_density(const HeatKernelParams& params, double tol, double cutoff_cap = kDefaultCutoffCap) {
    if (!(params.time > 0.0)) throw ParameterError("build_density: time must be positive (t = 0 is a delta measure)");
    if (!(tol > 0.0)) throw ParameterError("build_density: tol must be positive");
    const double cutoff = required_cutoff(params.group, params.time, tol, cutoff_cap);
    if (cutoff > cutoff_cap)
        throw ResourceError("build_density: t = " + format_double(params.time) + " needs enumeration cutoff " +
                                format_double(cutoff) + " above the cap " + format_double(cutoff_cap),
                            cutoff);
    std::vector<DensityTerm> terms;
    for (auto& irrep : irreps_up_to(params.group, cutoff)) {
        const double c = static_cast<double>(irrep.dimension) * std::exp(-params.time * irrep.casimir);
        terms.push_back({std::move(irrep), c});
    }
    return TruncatedDensity(params, std::move(terms), tail_bound_series(params.group, params.time, cutoff), cutoff);
}

inline Estimate density_eval(const TruncatedDensity& d, const ClassPoint& point) { return d(point); }

/// Product of densities of non-overlapping flags.
class ProductDensity {
public:
    explicit ProductDensity(std::vector<TruncatedDensity> components) : components_(std::move(components)) {}

    const std::vector<TruncatedDensity>& components() const noexcept { return components_; }

    double evaluate(const std::vector<ClassPoint>& points) const {
        if (points.size() != components_.size()) throw StructuralError("ProductDensity: one point per flag required");
        double v = 1.0;
        for (std::size_t i = 0; i < points.size(); ++i) v *= components_[i].evaluate(points[i]);
        return v;
    }

private:
    std::vector<TruncatedDensity> components_;
};

/// Quadrature order that resolves the truncated density times the class
/// weight: 2 * (max frequency + 2) + 8.
inline int resolving_order(const TruncatedDensity& d, int quad_order) {
    int order = quad_order;
    for (std::size_t i = 0; i < d.group().rank(); ++i) order = std::max(order, 2 * (d.max_frequency(i) + 2) + 8);
    return order;
}

/// mu_t(indicator) = integral of indicator * f_t against Haar measure.
inline Estimate measure_of_class_set(const TruncatedDensity& d, const ClassFunction& indicator, int quad_order) {
    ClassFunction integrand{
        [&](const ClassPoint& p) { return indicator(p) * d.evaluate(p); }, Smoothness::Measurable, indicator.breakpoints};
    const double value = haar_integrate(d.group(), integrand, resolving_order(d, quad_order)).real();
    return {value, d.tail_bound()};
}

inline Estimate measure_of_class_set(const HeatKernelParams& params, const ClassFunction& indicator, double tol,
                                     int quad_order) {
    return measure_of_class_set(build_density(params, tol), indicator, quad_order);
}

/// Measure of a product set U_1 x ... x U_n under the product density.
inline Estimate measure_of_product_set(const ProductDensity& density, const std::vector<ClassFunction>& indicators,
                                       int quad_order) {
    if (indicators.size() != density.components().size())
        throw StructuralError("measure_of_product_set: one indicator per flag required");
    double value = 1.0;
    double upper = 1.0;
    for (std::size_t i = 0; i < indicators.size(); ++i) {
        const Estimate e = measure_of_class_set(density.components()[i], indicators[i], quad_order);
        value *= e.value;
        upper *= std::abs(e.value) + e.error;
    }
    return {value, upper - std::abs(value)};
}

inline void write_density_csv(std::ostream& os, const TruncatedDensity& d) {
    os << "group,t,label,coefficient\n";
    const std::string g = d.group().to_string();
    const std::string t = format_double(d.params().time);
    for (const auto& term : d.terms())
        os << g << ',' << t << ',' << format_label(term.irrep.label) << ',' << format_double(term.coefficient) << '\n';
    os << "tail_bound," << format_double(d.tail_bound()) << '\n';
}

/// Inverse-CDF sampler for the heat-kernel class distribution. The density
/// factorizes over group factors, so each factor has its own table.
class ClassSampler {
public:
    static constexpr int kDefaultGrid = 1 << 14;

    explicit ClassSampler(const TruncatedDensity& density, int grid = kDefaultGrid) : group_(density.group()) {
        if (grid < 16) throw ParameterError("ClassSampler: grid too small");
        const double tol = std::max(density.tail_bound(), 1e-14);
        for (std::size_t i = 0; i < group_.rank(); ++i) {
            GroupSpec factor_group({group_.factor(i)}, {group_.casimir_scale(i)});
            TruncatedDensity factor = build_density({factor_group, density.params().time}, tol);
            tables_.push_back(tabulate(factor, grid));
        }
    }

    const GroupSpec& group() const noexcept { return group_; }

    ClassPoint operator()(RandomStream& rng) const {
        ClassPoint p{std::vector<double>(group_.rank())};
        for (std::size_t i = 0; i < tables_.size(); ++i) p.coords[i] = invert(tables_[i], rng.uniform());
        return p;
    }

    const std::vector<double>& grid(std::size_t factor) const { return tables_.at(factor).x; }
    const std::vector<double>& cdf(std::size_t factor) const { return tables_.at(factor).cdf; }

    void write_cdf_csv(std::ostream& os, std::size_t factor) const {
        const auto& t = tables_.at(factor);
        os << (group_.factor(factor) == FactorKind::SU2 ? "theta,cdf\n" : "phi,cdf\n");
        for (std::size_t j = 0; j < t.x.size(); ++j) os << format_double(t.x[j]) << ',' << format_double(t.cdf[j]) << '\n';
    }

private:
    struct Table {
        std::vector<double> x;
        std::vector<double> cdf;
    };

    // Exact CDF of the truncated series on a uniform grid:
    //   SU(2): int_0^x chi_n (2/pi) sin^2 = (S_n(x) - S_{n+2}(x)) / pi, S_0 = x, S_m = sin(mx)/m
    //   U(1):  int_{-pi}^x 2 cos(z y) / (2 pi) dy = sin(z x) / (pi z)
    static Table tabulate(const TruncatedDensity& d, int grid) {
        const bool su2 = d.group().factor(0) == FactorKind::SU2;
        const double lo = su2 ? 0.0 : -std::numbers::pi;
        const double hi = std::numbers::pi;
        Table t;
        t.x.resize(static_cast<std::size_t>(grid) + 1);
        t.cdf.resize(t.x.size());
        // Coefficients by |label|; torus pairs z, -z share one coefficient.
        const int nmax = d.max_label(0);
        std::vector<double> a(static_cast<std::size_t>(nmax) + 1, 0.0);
        for (const auto& term : d.terms()) {
            const int l = term.irrep.label[0];
            if (l >= 0) a[l] = term.coefficient;
        }
        const double floor_value = -d.tail_bound() - 1e-12 * d.evaluate(identity_point(d.group()));
        for (int j = 0; j <= grid; ++j) {
            const double x = lo + (hi - lo) * j / grid;
            t.x[j] = x;
            const double density = d.evaluate(ClassPoint{{x}});
            if (density < floor_value)
                throw ToleranceError("ClassSampler: truncated density " + format_double(density) + " is negative at " +
                                     format_double(x) + "; tighten tol");
            const int freq = nmax + 2;
            // sin(m x) for m = 0..freq by the rotation recurrence.
            const double c1 = std::cos(x);
            const double s1 = std::sin(x);
            std::vector<double> sn(static_cast<std::size_t>(freq) + 1);
            double s = 0.0;
            double c = 1.0;
            for (int m = 0; m <= freq; ++m) {
                sn[m] = s;
                const double s_next = s * c1 + c * s1;
                const double c_next = c * c1 - s * s1;
                s = s_next;
                c = c_next;
            }
            double F = 0.0;
            if (su2) {
                auto S = [&](int m) { return m == 0 ? x : sn[m] / m; };
                for (int n = 0; n <= nmax; ++n) F += a[n] * (S(n) - S(n + 2));
                F /= std::numbers::pi;
            } else {
                F = (x + std::numbers::pi) / (2.0 * std::numbers::pi);
                for (int z = 1; z <= nmax; ++z) F += a[z] * sn[z] / (std::numbers::pi * z);
            }
            t.cdf[j] = F;
        }
        // Enforce monotonicity against roundoff and normalize the endpoints.
        const double total = t.cdf.back();
        const double start = t.cdf.front();
        double running = 0.0;
        for (auto& F : t.cdf) {
            F = std::clamp((F - start) / (total - start), 0.0, 1.0);
            running = std::max(running, F);
            F = running;
        }
        t.cdf.back() = 1.0;
        return t;
    }

    static double invert(const Table& t, double u) {
        const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), u);
        if (it == t.cdf.begin()) return t.x.front();
        if (it == t.cdf.end()) return t.x.back();
        const std::size_t j = static_cast<std::size_t>(it - t.cdf.begin());
        const double F0 = t.cdf[j - 1];
        const double F1 = t.cdf[j];
        const double w = F1 > F0 ? (u - F0) / (F1 - F0) : 0.0;
        return t.x[j - 1] + w * (t.x[j] - t.x[j - 1]);
    }

    GroupSpec group_;
    std::vector<Table> tables_;
};

/// One draw from the heat-kernel class distribution (builds a sampler; use
/// ClassSampler directly to amortize the table).
inline ClassPoint sample_class(const TruncatedDensity& d, RandomStream& rng) { return ClassSampler(d)(rng); }

}  // namespace ym2
