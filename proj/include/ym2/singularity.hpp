#pragma once

// The support-splitting construction showing that the Yang-Mills measure
// and the kinematical (Haar) measure are mutually singular: a small
// Ad-invariant neighbourhood U of the identity, a concentration constant c
// with mu_YM,beta(U) >= 1 - c|beta|, and flags with areas F/(2^i c) whose
// product sets V_Lambda have Haar mass eps^Lambda but Yang-Mills mass >= 1 - F.

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ym2/csv.hpp"
#include "ym2/error.hpp"
#include "ym2/heatkernel.hpp"
#include "ym2/liegroup.hpp"
#include "ym2/parallel.hpp"
#include "ym2/quadrature.hpp"

namespace ym2 {

/// Class mass of {theta < x} on SU(2): (x - sin(2x)/2) / pi.
inline double su2_class_mass(double theta) {
    const double x = std::clamp(theta, 0.0, std::numbers::pi);
    return (x - 0.5 * std::sin(2.0 * x)) / std::numbers::pi;
}

/// Class mass of {|phi| < x} on U(1).
inline double u1_class_mass(double phi) { return std::clamp(phi, 0.0, std::numbers::pi) / std::numbers::pi; }

inline double factor_class_mass(FactorKind kind, double radius) {
    return kind == FactorKind::SU2 ? su2_class_mass(radius) : u1_class_mass(radius);
}

/// U = {all class coordinates below their per-factor threshold}.
struct AdNeighborhood {
    GroupSpec group;
    std::vector<double> radius;
    double haar_mass = 1.0;

    bool contains(const ClassPoint& p) const {
        for (std::size_t i = 0; i < radius.size(); ++i)
            if (!(std::abs(p.coords[i]) < radius[i])) return false;
        return true;
    }

    ClassFunction indicator() const {
        std::vector<std::vector<double>> bps(radius.size());
        for (std::size_t i = 0; i < radius.size(); ++i) {
            bps[i] = {radius[i]};
            if (group.factor(i) == FactorKind::Torus) bps[i].push_back(-radius[i]);
        }
        return {[r = radius](const ClassPoint& p) {
                    for (std::size_t i = 0; i < r.size(); ++i)
                        if (!(std::abs(p.coords[i]) < r[i])) return std::complex<double>(0.0);
                    return std::complex<double>(1.0);
                },
                Smoothness::Measurable, std::move(bps)};
    }
};

/// Thresholds giving Haar mass in [0.9 target, target], split equally over
/// the factors.
inline AdNeighborhood make_neighborhood(const GroupSpec& group, double target_mass) {
    if (!(target_mass > 0.0 && target_mass < 1.0)) throw ParameterError("make_neighborhood: target mass must lie in (0, 1)");
    const double per = std::pow(target_mass, 1.0 / static_cast<double>(group.rank()));
    AdNeighborhood u{group, {}, 1.0};
    for (std::size_t i = 0; i < group.rank(); ++i) {
        const FactorKind kind = group.factor(i);
        double lo = 0.0;
        double hi = std::numbers::pi;
        while (true) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (factor_class_mass(kind, mid) <= per) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        u.radius.push_back(lo);
        u.haar_mass *= factor_class_mass(kind, lo);
    }
    return u;
}

/// C^inf step 0 -> 1 on [0, 1] built from exp(-1/x).
inline double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

/// Product of per-factor cosine-taper profiles: 1 on [0, r/2], a C^inf
/// monotone taper on [r/2, r], 0 beyond.
struct BumpFunction {
    AdNeighborhood support;
    int s = 0;  // Sobolev order used for the coefficient asymptotics

    double plateau(std::size_t i) const { return 0.5 * support.radius[i]; }

    double profile(std::size_t i, double x) const {
        x = std::abs(x);
        const double a = plateau(i);
        const double r = support.radius[i];
        if (x <= a) return 1.0;
        if (x >= r) return 0.0;
        return 0.5 * (1.0 + std::cos(std::numbers::pi * smooth_step((x - a) / (r - a))));
    }

    double operator()(const ClassPoint& p) const {
        double v = 1.0;
        for (std::size_t i = 0; i < support.radius.size() && v != 0.0; ++i) v *= profile(i, p.coords[i]);
        return v;
    }

    ClassFunction as_class_function() const {
        std::vector<std::vector<double>> bps(support.radius.size());
        for (std::size_t i = 0; i < bps.size(); ++i) {
            bps[i] = {plateau(i), support.radius[i]};
            if (support.group.factor(i) == FactorKind::Torus) {
                bps[i].push_back(-plateau(i));
                bps[i].push_back(-support.radius[i]);
            }
        }
        return {[*this](const ClassPoint& p) { return std::complex<double>((*this)(p)); }, Smoothness::Smooth,
                std::move(bps)};
    }
};

/// Default Sobolev order 2s = dim G + k + l + 4.
inline int default_sobolev_order(const GroupSpec& group) {
    return (group.dimension() + group.torus_count() + group.su2_count() + 4 + 1) / 2;
}

inline BumpFunction make_bump(const AdNeighborhood& support, int s = 0) {
    return {support, s > 0 ? s : default_sobolev_order(support.group)};
}

/// Per-factor character coefficients <chi_n, profile_i> for n = 0..L (for a
/// torus factor the coefficient of z and -z). Computed from the cosine
/// moments (1/pi) int_0^pi cos(k x) p(x) dx via an FFT of the even
/// extension; the trapezoid rule is spectrally accurate since the extension
/// is smooth and periodic.
inline std::vector<double> bump_factor_coefficients(const BumpFunction& bump, std::size_t i, int L) {
    if (L < 0) throw ParameterError("bump_factor_coefficients: L must be >= 0");
    int n = 1 << 12;
    while (n < 4 * (L + 3)) n <<= 1;
    std::vector<double> ext(static_cast<std::size_t>(2 * n));
    for (int j = 0; j <= n; ++j) {
        const double v = bump.profile(i, std::numbers::pi * j / n);
        ext[static_cast<std::size_t>(j)] = v;
        if (j > 0 && j < n) ext[static_cast<std::size_t>(2 * n - j)] = v;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, ext);
    auto moment = [&](int k) { return spec[static_cast<std::size_t>(k)].real() / (2.0 * n); };
    std::vector<double> out(static_cast<std::size_t>(L) + 1);
    const bool su2 = bump.support.group.factor(i) == FactorKind::SU2;
    for (int k = 0; k <= L; ++k) out[static_cast<std::size_t>(k)] = su2 ? moment(k) - moment(k + 2) : moment(k);
    return out;
}

/// <chi_v, f> for the product bump.
inline double bump_coefficient(const BumpFunction& bump, const Irrep& irrep) {
    const GroupSpec& g = bump.support.group;
    g.check_label(irrep.label);
    double v = 1.0;
    for (std::size_t i = 0; i < g.rank(); ++i) {
        const int l = std::abs(irrep.label[i]);
        v *= bump_factor_coefficients(bump, i, l)[static_cast<std::size_t>(l)];
    }
    return v;
}

struct ConcentrationConstant {
    double c = 0.0;        // certified: 1 - mu_YM,beta(U) <= c |beta|
    double partial = 0.0;  // contribution of labels up to the cutoff
    double tail = 0.0;     // certified bound for the rest
    int s = 0;
    int cutoff = 0;
    std::vector<double> sobolev_const;  // per factor, ||Delta^s p_i||_2
    bool converged = false;             // tail <= tol * c reached below the cap
};

namespace detail {

/// sum_{n > L} n^{-q} <= L^{1-q} / (q - 1).
inline double power_tail(double L, double q) { return std::pow(L, 1.0 - q) / (q - 1.0); }

struct FactorSums {
    double a_partial, a_tail;  // sum |coef| d c
    double b_partial, b_tail;  // sum |coef| d
    double sobolev;
};

inline FactorSums factor_sums(const BumpFunction& bump, std::size_t i, int L, int s) {
    const GroupSpec& g = bump.support.group;
    const bool su2 = g.factor(i) == FactorKind::SU2;
    const double scale = g.casimir_scale(i);
    const auto coef = bump_factor_coefficients(bump, i, 2 * L);
    double peak = 0.0;
    for (double v : coef) peak = std::max(peak, std::abs(v));
    // Terms below the rounding floor of the transform are dropped: there the
    // computed values are noise and the true coefficients decay faster than
    // any power, while summing n^3-weighted noise would drift with L.
    const double floor = 1e-16 * peak;
    std::vector<double> sob;
    std::vector<double> a;
    std::vector<double> b;
    for (int n = 0; n <= 2 * L; ++n) {
        const double cf = std::abs(coef[static_cast<std::size_t>(n)]);
        const double cas = su2 ? scale * n * (n + 2.0) : scale * n * static_cast<double>(n);
        const double d = su2 ? n + 1.0 : 1.0;
        const double mult = (!su2 && n > 0) ? 2.0 : 1.0;  // z and -z
        if (cf > floor && n > 0) sob.push_back(mult * std::pow(cas, 2.0 * s) * cf * cf);
        if (n <= L && cf > floor) {
            a.push_back(mult * cf * d * cas);
            b.push_back(mult * cf * d);
        }
    }
    const double K = std::sqrt(pairwise_sum(sob));
    // |coef_n| <= K c_n^{-s}, c_n >= scale n^2, d_n <= 2n (SU(2), n >= 1)
    double a_tail;
    double b_tail;
    if (su2) {
        a_tail = 2.0 * K * std::pow(scale, 1.0 - s) * power_tail(L, 2.0 * s - 3.0);
        b_tail = 2.0 * K * std::pow(scale, -static_cast<double>(s)) * power_tail(L, 2.0 * s - 1.0);
    } else {
        a_tail = 2.0 * K * std::pow(scale, 1.0 - s) * power_tail(L, 2.0 * s - 2.0);
        b_tail = 2.0 * K * std::pow(scale, -static_cast<double>(s)) * power_tail(L, 2.0 * s);
    }
    return {pairwise_sum(a), a_tail, pairwise_sum(b), b_tail, K};
}

}  // namespace detail

/// c = (kappa^2/2) sum_{v != 0} |<chi_v, f>| d_v c_v, with the labels beyond
/// the cutoff bounded through |<chi_v, f>| <= const_{s,f} c_v^{-s}. The
/// bump, characters, dimensions and Casimirs all factorize, so the sum is
/// sum_j A_j prod_{i != j} B_i with per-factor sums A (weighted by c) and B.
/// The cutoff doubles until the tail is at most tol * c (relative).
inline ConcentrationConstant concentration_constant(const GroupSpec& group, double coupling, const BumpFunction& bump,
                                                    int s, double tol, int cutoff_cap = 1 << 20) {
    if (!(coupling > 0.0)) throw ParameterError("concentration_constant: coupling must be positive");
    if (!(tol > 0.0)) throw ParameterError("concentration_constant: tol must be positive");
    if (!(bump.support.group == group)) throw StructuralError("concentration_constant: bump lives on another group");
    const int m = group.su2_count();
    const int k = group.torus_count();
    // sum d_v c_v^{1-s} converges iff (dim G_ss - l)/2 + 2(1 - s) <= -(k + l + 1)
    if (m + 2 * (1 - s) > -(k + m + 1))
        throw ParameterError("concentration_constant: s = " + std::to_string(s) +
                             " too small; need (dim G_ss - l)/2 + 2(1 - s) <= -(k + l + 1), i.e. 2s >= " +
                             std::to_string(2 * m + k + 3));
    const double half_k2 = 0.5 * coupling * coupling;
    ConcentrationConstant out;
    out.s = s;
    for (int L = 32;; L *= 2) {
        std::vector<detail::FactorSums> sums;
        for (std::size_t i = 0; i < group.rank(); ++i) sums.push_back(detail::factor_sums(bump, i, L, s));
        double partial = 0.0;
        double full = 0.0;
        for (std::size_t j = 0; j < sums.size(); ++j) {
            double p = sums[j].a_partial;
            double f = sums[j].a_partial + sums[j].a_tail;
            for (std::size_t i = 0; i < sums.size(); ++i) {
                if (i == j) continue;
                p *= sums[i].b_partial;
                f *= sums[i].b_partial + sums[i].b_tail;
            }
            partial += p;
            full += f;
        }
        out.partial = half_k2 * partial;
        out.c = half_k2 * full;
        out.tail = out.c - out.partial;
        out.cutoff = L;
        out.sobolev_const.clear();
        for (const auto& fs : sums) out.sobolev_const.push_back(fs.sobolev);
        out.converged = out.tail <= tol * out.c;
        if (out.converged || 2 * L > cutoff_cap) break;
    }
    return out;
}

struct SingularityConfig {
    double epsilon = 0.1;
    double F = 0.5;
    int lambda_max = 1;
    double coupling = 1.0;
    AdNeighborhood neighborhood;
    BumpFunction bump;
    ConcentrationConstant concentration;
    std::vector<double> areas;  // |beta_i| = F / (2^i c), i = 1..lambda_max
};

inline SingularityConfig build_config(const GroupSpec& group, double coupling, double epsilon, double F, int lambda_max,
                                      double tol = 1e-10) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("build_config: epsilon must lie in (0, 1)");
    if (!(F > 0.0 && F < 1.0)) throw ParameterError("build_config: F must lie in (0, 1)");
    if (lambda_max < 0) throw ParameterError("build_config: Lambda_max must be >= 0");
    SingularityConfig cfg;
    cfg.epsilon = epsilon;
    cfg.F = F;
    cfg.lambda_max = lambda_max;
    cfg.coupling = coupling;
    cfg.neighborhood = make_neighborhood(group, epsilon);
    cfg.bump = make_bump(cfg.neighborhood);
    cfg.concentration = concentration_constant(group, coupling, cfg.bump, cfg.bump.s, tol);
    for (int i = 1; i <= lambda_max; ++i) cfg.areas.push_back(F / (std::ldexp(1.0, i) * cfg.concentration.c));
    return cfg;
}

struct SupportSplitRow {
    int lambda = 0;
    double mu0 = 1.0;
    double muYM_lower = 1.0;
    double muYM_computed = 1.0;
};

/// Rows Lambda = 0..Lambda_max. mu0 = eps^Lambda, lower = prod (1 - F/2^i),
/// computed = prod_i mu_{t_i}(U) with t_i = kappa^2 |beta_i| / 2.
inline std::vector<SupportSplitRow> support_split_table(const SingularityConfig& cfg, double tol, int quad_order = 128,
                                                        unsigned threads = 1) {
    const auto& u = cfg.neighborhood;
    const auto indicator = u.indicator();
    std::vector<double> factors(cfg.areas.size());
    parallel_for(cfg.areas.size(), threads, [&](std::size_t i) {
        const auto params = HeatKernelParams::from_coupling(u.group, cfg.coupling, cfg.areas[i]);
        // a probability, so values above 1 are rounding
        factors[i] = std::min(1.0, measure_of_class_set(params, indicator, tol, quad_order).value);
    });
    std::vector<SupportSplitRow> rows{{0, 1.0, 1.0, 1.0}};
    for (int L = 1; L <= cfg.lambda_max; ++L) {
        SupportSplitRow r;
        r.lambda = L;
        r.mu0 = std::pow(u.haar_mass, L);
        r.muYM_lower = rows.back().muYM_lower * (1.0 - cfg.F / std::ldexp(1.0, L));
        r.muYM_computed = rows.back().muYM_computed * factors[static_cast<std::size_t>(L - 1)];
        if (r.muYM_computed < r.muYM_lower - L * tol)
            throw PrecisionError("support_split_table: Yang-Mills mass " + format_double(r.muYM_computed) +
                                 " below the lower bound " + format_double(r.muYM_lower) + " at Lambda = " +
                                 std::to_string(L));
        rows.push_back(r);
    }
    return rows;
}

inline void write_support_split_csv(std::ostream& os, const std::vector<SupportSplitRow>& rows) {
    os << "Lambda,mu0,muYM_lower,muYM_computed\n";
    for (const auto& r : rows)
        os << r.lambda << ',' << format_double(r.mu0) << ',' << format_double(r.muYM_lower) << ','
           << format_double(r.muYM_computed) << '\n';
}

namespace detail {

/// ||g - 1||_F^2 on one factor block at class coordinate x.
inline double block_distance_sq(FactorKind kind, double x) {
    const double s = std::sin(0.5 * x);
    return (kind == FactorKind::SU2 ? 8.0 : 4.0) * s * s;
}

/// Largest class coordinate with block distance^2 below r2.
inline double block_radius(FactorKind kind, double r2) {
    const double scale = kind == FactorKind::SU2 ? 8.0 : 4.0;
    if (r2 >= scale) return std::numbers::pi;
    return 2.0 * std::asin(std::sqrt(r2 / scale));
}

inline double nested_ball_mass(const GroupSpec& group, std::size_t i, double r2, int order) {
    if (r2 <= 0.0) return 0.0;
    const FactorKind kind = group.factor(i);
    const double x = block_radius(kind, r2);
    if (i + 1 == group.rank()) return factor_class_mass(kind, x);
    const std::vector<double> edges{0.0, x};
    const QuadratureRule rule = composite_gauss_legendre(edges, order);
    std::vector<double> terms;
    for (std::size_t j = 0; j < rule.size(); ++j) {
        const double th = rule.nodes[j];
        const double density =
            kind == FactorKind::SU2 ? (2.0 / std::numbers::pi) * std::sin(th) * std::sin(th) : 1.0 / std::numbers::pi;
        terms.push_back(rule.weights[j] * density *
                        nested_ball_mass(group, i + 1, r2 - block_distance_sq(kind, th), order));
    }
    return pairwise_sum(terms);
}

}  // namespace detail

/// Haar mass of {g : ||g - 1||_F < eps} for the Frobenius norm of the
/// block-diagonal defining representation. Single factors are exact; products
/// integrate the joint condition over the class coordinates.
inline double haar_ball_mass(const GroupSpec& group, double eps, int quad_order = 128) {
    if (!(eps > 0.0)) throw ParameterError("haar_ball_mass: eps must be positive");
    return std::min(1.0, detail::nested_ball_mass(group, 0, eps * eps, quad_order));
}

struct ExclusionRow {
    double area = 0.0;
    double sup_density = 0.0;
    double ball_mass = 0.0;
    double product_bound = 0.0;
};

inline std::vector<ExclusionRow> smooth_exclusion_bound(const GroupSpec& group, double coupling, double r,
                                                        const std::vector<double>& areas) {
    if (!(r > 0.0)) throw ParameterError("smooth_exclusion_bound: r must be positive");
    std::vector<ExclusionRow> rows;
    for (double a : areas) {
        ExclusionRow row;
        row.area = a;
        row.sup_density = sup_bound(HeatKernelParams::from_coupling(group, coupling, a));
        row.ball_mass = haar_ball_mass(group, r * a);
        row.product_bound = row.sup_density * row.ball_mass;
        rows.push_back(row);
    }
    return rows;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("loglog_slope: need at least two points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

/// Slope of product_bound against area over the smaller-area half of rows.
inline double exclusion_slope(const std::vector<ExclusionRow>& rows) {
    std::vector<ExclusionRow> sorted(rows);
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.area < b.area; });
    const std::size_t half = std::max<std::size_t>(2, (sorted.size() + 1) / 2);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < std::min(half, sorted.size()); ++i) {
        x.push_back(sorted[i].area);
        y.push_back(sorted[i].product_bound);
    }
    return loglog_slope(x, y);
}

}  // namespace ym2
