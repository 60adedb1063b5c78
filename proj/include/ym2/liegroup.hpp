#pragma once

// Representation theory of compact groups built as finite products of U(1)
// and SU(2) factors: irreducible representations, dimensions, Casimir
// eigenvalues, characters, Haar integration of class functions, and tensor
// product multiplicities.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ym2/error.hpp"
#include "ym2/quadrature.hpp"

namespace ym2 {

enum class FactorKind { Torus, SU2 };

using Label = std::vector<int>;

inline double label_norm_sq(const Label& label) {
    double s = 0.0;
    for (int v : label) s += static_cast<double>(v) * v;
    return s;
}

inline double label_norm(const Label& label) { return std::sqrt(label_norm_sq(label)); }

inline std::string format_label(const Label& label, char sep = ';') {
    std::string out;
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(label[i]);
    }
    return out;
}

/// An irreducible representation with its derived invariants.
struct Irrep {
    Label label;
    std::int64_t dimension = 1;
    double casimir = 0.0;

    bool is_trivial() const {
        return std::all_of(label.begin(), label.end(), [](int v) { return v == 0; });
    }

    friend bool operator==(const Irrep& a, const Irrep& b) { return a.label == b.label; }
};

/// A compact group G = F_1 x ... x F_r with each F_i either U(1) or SU(2).
class GroupSpec {
public:
    GroupSpec() : GroupSpec(std::vector<FactorKind>{FactorKind::SU2}) {}

    explicit GroupSpec(std::vector<FactorKind> factors, std::vector<double> casimir_scale = {})
        : factors_(std::move(factors)), scale_(std::move(casimir_scale)) {
        if (factors_.empty()) throw StructuralError("GroupSpec: at least one factor required");
        if (scale_.empty()) scale_.assign(factors_.size(), 1.0);
        if (scale_.size() != factors_.size())
            throw StructuralError("GroupSpec: one casimir_scale per factor required");
        for (double s : scale_) {
            if (!(s > 0.0) || !std::isfinite(s))
                throw ParameterError("GroupSpec: casimir_scale must be positive");
        }
    }

    static GroupSpec su2() { return GroupSpec({FactorKind::SU2}); }
    static GroupSpec u1() { return GroupSpec({FactorKind::Torus}); }

    /// Parses "su2", "u1", "su2*u1*u1" (case-insensitive, '*'-separated).
    static GroupSpec parse(std::string_view text) {
        std::vector<FactorKind> factors;
        std::size_t pos = 0;
        while (true) {
            const std::size_t star = text.find('*', pos);
            std::string tag(text.substr(pos, star == std::string_view::npos ? std::string_view::npos : star - pos));
            tag.erase(std::remove_if(tag.begin(), tag.end(), [](unsigned char c) { return std::isspace(c); }),
                      tag.end());
            std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::tolower(c); });
            if (tag == "su2") {
                factors.push_back(FactorKind::SU2);
            } else if (tag == "u1") {
                factors.push_back(FactorKind::Torus);
            } else {
                throw StructuralError("unknown group factor '" + tag + "' in \"" + std::string(text) +
                                      "\" (expected su2 or u1)");
            }
            if (star == std::string_view::npos) break;
            pos = star + 1;
        }
        return GroupSpec(std::move(factors));
    }

    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (i) out += '*';
            out += factors_[i] == FactorKind::SU2 ? "su2" : "u1";
        }
        return out;
    }

    const std::vector<FactorKind>& factors() const noexcept { return factors_; }
    FactorKind factor(std::size_t i) const { return factors_.at(i); }
    double casimir_scale(std::size_t i) const { return scale_.at(i); }
    const std::vector<double>& casimir_scales() const noexcept { return scale_; }

    std::size_t rank() const noexcept { return factors_.size(); }
    int su2_count() const { return static_cast<int>(std::count(factors_.begin(), factors_.end(), FactorKind::SU2)); }
    int torus_count() const { return static_cast<int>(rank()) - su2_count(); }
    int dimension() const { return 3 * su2_count() + torus_count(); }

    /// c_- and c_+ with c_- |v|^2 <= c_v <= c_+ |v|^2.
    double c_minus() const { return *std::min_element(scale_.begin(), scale_.end()); }
    double c_plus() const { return 3.0 * *std::max_element(scale_.begin(), scale_.end()); }

    void check_label(const Label& label) const {
        if (label.size() != rank())
            throw StructuralError("label arity " + std::to_string(label.size()) + " does not match group " +
                                  to_string() + " of rank " + std::to_string(rank()));
        for (std::size_t i = 0; i < rank(); ++i) {
            if (factors_[i] == FactorKind::SU2 && label[i] < 0)
                throw StructuralError("SU(2) highest-weight label must be nonnegative");
        }
    }

    Irrep irrep(const Label& label) const {
        check_label(label);
        Irrep r;
        r.label = label;
        r.dimension = 1;
        r.casimir = 0.0;
        for (std::size_t i = 0; i < rank(); ++i) {
            const double v = label[i];
            if (factors_[i] == FactorKind::SU2) {
                r.dimension *= label[i] + 1;
                r.casimir += scale_[i] * v * (v + 2.0);
            } else {
                r.casimir += scale_[i] * v * v;
            }
        }
        return r;
    }

    Irrep trivial() const { return irrep(Label(rank(), 0)); }

    friend bool operator==(const GroupSpec& a, const GroupSpec& b) {
        return a.factors_ == b.factors_ && a.scale_ == b.scale_;
    }

private:
    std::vector<FactorKind> factors_;
    std::vector<double> scale_;
};

inline std::int64_t dimension(const GroupSpec& group, const Label& label) { return group.irrep(label).dimension; }

namespace detail {

inline void enumerate_labels(const GroupSpec& group, std::size_t i, long long budget, Label& current,
                             std::vector<Irrep>& out) {
    if (i == group.rank()) {
        out.push_back(group.irrep(current));
        return;
    }
    const int limit = static_cast<int>(std::floor(std::sqrt(static_cast<double>(budget)) + 1e-9));
    const int lo = group.factor(i) == FactorKind::SU2 ? 0 : -limit;
    for (int v = lo; v <= limit; ++v) {
        const long long sq = static_cast<long long>(v) * v;
        if (sq > budget) continue;
        current[i] = v;
        enumerate_labels(group, i + 1, budget - sq, current, out);
    }
    current[i] = 0;
}

}  // namespace detail

/// All irreps with |label| <= norm_cutoff, sorted by Casimir eigenvalue and
/// then lexicographically by label.
inline std::vector<Irrep> irreps_up_to(const GroupSpec& group, double norm_cutoff) {
    std::vector<Irrep> out;
    if (norm_cutoff < 0.0) return out;
    const long long budget = static_cast<long long>(std::floor(norm_cutoff * norm_cutoff + 1e-9));
    Label current(group.rank(), 0);
    detail::enumerate_labels(group, 0, budget, current, out);
    std::sort(out.begin(), out.end(), [](const Irrep& a, const Irrep& b) {
        if (a.casimir != b.casimir) return a.casimir < b.casimir;
        return a.label < b.label;
    });
    return out;
}

/// Conjugacy-class coordinates: theta in [0, pi] per SU(2) factor (the
/// eigenvalues are e^{+-i theta}), phi in [-pi, pi) per U(1) factor.
struct ClassPoint {
    std::vector<double> coords;
};

inline ClassPoint identity_point(const GroupSpec& group) { return ClassPoint{std::vector<double>(group.rank(), 0.0)}; }

inline void check_point(const GroupSpec& group, const ClassPoint& p) {
    if (p.coords.size() != group.rank()) throw StructuralError("class point arity does not match group");
    for (std::size_t i = 0; i < group.rank(); ++i) {
        const double x = p.coords[i];
        if (group.factor(i) == FactorKind::SU2) {
            if (!(x >= 0.0 && x <= std::numbers::pi)) throw ParameterError("SU(2) class angle outside [0, pi]");
        } else if (!(x >= -std::numbers::pi && x <= std::numbers::pi)) {
            throw ParameterError("U(1) angle outside [-pi, pi)");
        }
    }
}

/// sin((n+1) theta) / sin(theta), with the limit values at theta in {0, pi}.
inline double su2_character(int n, double theta) {
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-8) {
        const double sign = (theta > 0.5 * std::numbers::pi && n % 2 == 1) ? -1.0 : 1.0;
        return sign * (n + 1);
    }
    return std::sin((n + 1) * theta) / s;
}

/// chi_0 .. chi_{n_max} at theta, by the Chebyshev-U recurrence.
inline std::vector<double> su2_character_table(int n_max, double theta) {
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    const double x = std::cos(theta);
    double prev = 1.0;
    double cur = 2.0 * x;
    out[0] = 1.0;
    if (n_max >= 1) out[1] = cur;
    for (int n = 2; n <= n_max; ++n) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
        out[n] = cur;
    }
    return out;
}

/// Character value chi_v(p); complex for U(1) factors (e^{i z phi}).
inline std::complex<double> character(const GroupSpec& group, const Irrep& irrep, const ClassPoint& point) {
    group.check_label(irrep.label);
    if (point.coords.size() != group.rank()) throw StructuralError("class point arity does not match group");
    double real_part = 1.0;
    double phase = 0.0;
    for (std::size_t i = 0; i < group.rank(); ++i) {
        if (group.factor(i) == FactorKind::SU2) {
            real_part *= su2_character(irrep.label[i], point.coords[i]);
        } else {
            phase += irrep.label[i] * point.coords[i];
        }
    }
    if (phase == 0.0) return {real_part, 0.0};
    return std::polar(1.0, phase) * real_part;
}

enum class Smoothness { Analytic, Smooth, Measurable };

/// A conjugation-invariant function given by its values on class points.
/// `breakpoints[i]` lists coordinates of factor i where the function may fail
/// to be smooth; quadrature splits panels there.
struct ClassFunction {
    std::function<std::complex<double>(const ClassPoint&)> evaluator;
    Smoothness smoothness = Smoothness::Analytic;
    std::vector<std::vector<double>> breakpoints;

    std::complex<double> operator()(const ClassPoint& p) const { return evaluator(p); }
};

inline ClassFunction character_function(const GroupSpec& group, const Irrep& irrep) {
    return {[group, irrep](const ClassPoint& p) { return character(group, irrep, p); }, Smoothness::Analytic, {}};
}

/// One-dimensional rule for factor `kind` with the normalized class-measure
/// density folded into the weights.
inline QuadratureRule class_measure_rule(FactorKind kind, int order, const std::vector<double>& breakpoints = {}) {
    if (kind == FactorKind::SU2) {
        std::vector<double> edges{0.0};
        for (double b : breakpoints)
            if (b > 0.0 && b < std::numbers::pi) edges.push_back(b);
        edges.push_back(std::numbers::pi);
        std::sort(edges.begin(), edges.end());
        QuadratureRule rule = composite_gauss_legendre(edges, order);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double s = std::sin(rule.nodes[i]);
            rule.weights[i] *= (2.0 / std::numbers::pi) * s * s;
        }
        return rule;
    }
    std::vector<double> edges{-std::numbers::pi};
    for (double b : breakpoints)
        if (b > -std::numbers::pi && b < std::numbers::pi) edges.push_back(b);
    if (edges.size() == 1) {
        // Trapezoid on the circle: spectrally accurate for periodic integrands.
        QuadratureRule rule;
        rule.nodes.resize(order);
        rule.weights.assign(order, 1.0 / order);
        for (int j = 0; j < order; ++j) rule.nodes[j] = -std::numbers::pi + 2.0 * std::numbers::pi * j / order;
        return rule;
    }
    edges.push_back(std::numbers::pi);
    std::sort(edges.begin(), edges.end());
    QuadratureRule rule = composite_gauss_legendre(edges, order);
    for (double& w : rule.weights) w /= 2.0 * std::numbers::pi;
    return rule;
}

/// Tensor-product quadrature of f against normalized Haar measure (via the
/// Weyl integration formula on each factor). Deterministic for fixed order.
inline std::complex<double> haar_integrate(const GroupSpec& group, const ClassFunction& f, int quad_order) {
    if (quad_order < 2) throw ParameterError("haar_integrate: quad_order must be >= 2");
    const std::size_t r = group.rank();
    std::vector<QuadratureRule> rules;
    rules.reserve(r);
    for (std::size_t i = 0; i < r; ++i) {
        const std::vector<double> empty;
        const auto& bps = i < f.breakpoints.size() ? f.breakpoints[i] : empty;
        rules.push_back(class_measure_rule(group.factor(i), quad_order, bps));
    }
    std::vector<std::size_t> idx(r, 0);
    ClassPoint p{std::vector<double>(r)};
    std::complex<double> total = 0.0;
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < r; ++i) {
            p.coords[i] = rules[i].nodes[idx[i]];
            w *= rules[i].weights[idx[i]];
        }
        if (w != 0.0) total += w * f(p);
        std::size_t i = 0;
        while (i < r && ++idx[i] == rules[i].size()) idx[i++] = 0;
        if (i == r) break;
    }
    return total;
}

/// Multiplicity of `target` in the tensor product of `factors`.
inline std::int64_t tensor_multiplicity(const GroupSpec& group, const std::vector<Irrep>& factors,
                                        const Irrep& target) {
    group.check_label(target.label);
    for (const auto& f : factors) group.check_label(f.label);
    std::int64_t total = 1;
    for (std::size_t i = 0; i < group.rank(); ++i) {
        if (group.factor(i) == FactorKind::Torus) {
            long long charge = 0;
            for (const auto& f : factors) charge += f.label[i];
            if (charge != target.label[i]) return 0;
            continue;
        }
        // counts[n] = multiplicity of spin label n in the partial product.
        std::vector<std::int64_t> counts{1};
        for (const auto& f : factors) {
            const int m = f.label[i];
            std::vector<std::int64_t> next(counts.size() + static_cast<std::size_t>(m), 0);
            for (std::size_t n = 0; n < counts.size(); ++n) {
                if (counts[n] == 0) continue;
                const int lo = std::abs(static_cast<int>(n) - m);
                for (int j = lo; j <= static_cast<int>(n) + m; j += 2) next[j] += counts[n];
            }
            counts = std::move(next);
        }
        const int t = target.label[i];
        if (t >= static_cast<int>(counts.size()) || counts[t] == 0) return 0;
        total *= counts[t];
    }
    return total;
}

}  // namespace ym2
