#pragma once

// Smooth gauge fields on R^2 with polynomial components, path-ordered
// holonomies of round loops, and the small-loop estimate
// ||h(alpha) - (1 - F(m0)|alpha|)|| <= const (|alpha|)^{3/2}.
//
// Convention: parallel transport solves U'(s) = -A(x(s)) x'(s) U(s), so the
// holonomy is P exp(-oint A) with later parts of the loop multiplied from
// the left, and h = 1 - F |alpha| + ... for a counterclockwise loop with
// F = d_x A_y - d_y A_x + [A_x, A_y].

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "ym2/error.hpp"
#include "ym2/liegroup.hpp"

namespace ym2 {

using CMatrix = Eigen::MatrixXcd;

struct Monomial {
    int px = 0;
    int py = 0;
    CMatrix coefficient;
};

/// Gauge field A = A_x dx + A_y dy with polynomial matrix components valued
/// in the block-diagonal Lie algebra of `group`'s defining representation.
class GaugeField2D {
public:
    GaugeField2D(std::string name, GroupSpec group, std::vector<Monomial> ax, std::vector<Monomial> ay)
        : name_(std::move(name)), group_(std::move(group)), ax_(std::move(ax)), ay_(std::move(ay)) {
        dim_ = 0;
        for (std::size_t i = 0; i < group_.rank(); ++i) dim_ += group_.factor(i) == FactorKind::SU2 ? 2 : 1;
        for (const auto* comp : {&ax_, &ay_})
            for (const auto& m : *comp) {
                if (m.coefficient.rows() != dim_ || m.coefficient.cols() != dim_)
                    throw StructuralError("GaugeField2D: coefficient matrix must be " + std::to_string(dim_) + "x" +
                                          std::to_string(dim_));
                if (m.px < 0 || m.py < 0) throw StructuralError("GaugeField2D: negative monomial exponent");
                if (!m.coefficient.allFinite()) throw ParameterError("GaugeField2D: non-finite coefficient");
            }
    }

    const std::string& name() const noexcept { return name_; }
    const GroupSpec& group() const noexcept { return group_; }
    int dim() const noexcept { return dim_; }

    CMatrix ax(double x, double y) const { return eval(ax_, x, y, 0, 0); }
    CMatrix ay(double x, double y) const { return eval(ay_, x, y, 0, 0); }

    /// Exact F = d_x A_y - d_y A_x + [A_x, A_y] from the polynomial form.
    CMatrix curvature_exact(double x, double y) const {
        const CMatrix a = ax(x, y);
        const CMatrix b = ay(x, y);
        return eval(ay_, x, y, 1, 0) - eval(ax_, x, y, 0, 1) + a * b - b * a;
    }

    /// Largest violation of the algebra conditions (anti-Hermitian, zero
    /// off-block entries, traceless SU(2) blocks) over a grid on [-box, box]^2.
    double algebra_violation(double box = 1.0, int grid = 7) const {
        double worst = 0.0;
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                const double x = -box + 2.0 * box * i / (grid - 1);
                const double y = -box + 2.0 * box * j / (grid - 1);
                for (const CMatrix& m : {ax(x, y), ay(x, y)}) {
                    const double scale = std::max(1.0, m.norm());
                    worst = std::max(worst, (m + m.adjoint()).norm() / scale);
                    int off = 0;
                    for (std::size_t f = 0; f < group_.rank(); ++f) {
                        const int n = group_.factor(f) == FactorKind::SU2 ? 2 : 1;
                        if (n == 2) worst = std::max(worst, std::abs(m.block(off, off, 2, 2).trace()) / scale);
                        CMatrix masked = m;
                        masked.block(off, off, n, n).setZero();
                        worst = std::max(worst, masked.block(off, 0, n, dim_).norm() / scale);
                        off += n;
                    }
                }
            }
        return worst;
    }

    void check_algebra(double box = 1.0) const {
        if (algebra_violation(box) > 1e-12) throw ParameterError("GaugeField2D '" + name_ + "' leaves the Lie algebra");
    }

private:
    CMatrix eval(const std::vector<Monomial>& terms, double x, double y, int dx, int dy) const {
        CMatrix out = CMatrix::Zero(dim_, dim_);
        for (const auto& m : terms) {
            if (m.px < dx || m.py < dy) continue;
            double c = 1.0;
            for (int k = 0; k < dx; ++k) c *= m.px - k;
            for (int k = 0; k < dy; ++k) c *= m.py - k;
            out += (c * std::pow(x, m.px - dx) * std::pow(y, m.py - dy)) * m.coefficient;
        }
        return out;
    }

    std::string name_;
    GroupSpec group_;
    std::vector<Monomial> ax_;
    std::vector<Monomial> ay_;
    int dim_ = 2;
};

/// i sigma_k, k = 1..3: a basis of su(2).
inline CMatrix su2_generator(int k) {
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    CMatrix m(2, 2);
    switch (k) {
    case 1: m << 0.0, i, i, 0.0; break;
    case 2: m << 0.0, C(1.0), C(-1.0), 0.0; break;
    case 3: m << i, 0.0, 0.0, -i; break;
    default: throw StructuralError("su2_generator: index must be 1, 2 or 3");
    }
    return m;
}

inline const std::vector<std::string>& field_catalog_names() {
    static const std::vector<std::string> names{"zero", "abelian-constant-B", "nonabelian-poly-1"};
    return names;
}

/// Built-in SU(2) fields. abelian-constant-B is A = B/2 (-y dx + x dy) i sigma_3
/// with F = B i sigma_3.
inline GaugeField2D catalog_field(const std::string& name, double B = 1.0) {
    const GroupSpec g = GroupSpec::su2();
    if (name == "zero") return GaugeField2D(name, g, {}, {});
    const CMatrix t1 = su2_generator(1);
    const CMatrix t2 = su2_generator(2);
    const CMatrix t3 = su2_generator(3);
    if (name == "abelian-constant-B") return GaugeField2D(name, g, {{0, 1, -0.5 * B * t3}}, {{1, 0, 0.5 * B * t3}});
    if (name == "nonabelian-poly-1")
        return GaugeField2D(name, g, {{0, 0, 0.3 * t1}, {0, 1, 0.5 * t2}, {1, 1, 0.2 * t3}, {2, 0, 0.1 * t1}},
                            {{0, 0, -0.4 * t2}, {1, 0, 0.6 * t3}, {2, 0, 0.25 * t1}, {0, 2, -0.15 * t2}});
    throw StructuralError("unknown field '" + name + "'");
}

/// Polynomial field from a coefficient table
/// {"group": "su2", "x": [[[px, py], [[[re, im], ...], ...]], ...], "y": [...]}.
inline GaugeField2D parse_field_json(const std::string& text, const std::string& name = "custom") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(ErrorCode::E_SYNTAX, "", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError(ErrorCode::E_SYNTAX, "", "field document must be an object");
    GroupSpec group = GroupSpec::su2();
    if (doc.contains("group")) {
        try {
            group = GroupSpec::parse(doc["group"].get<std::string>());
        } catch (const std::exception& e) {
            throw ValidationError(ErrorCode::E_GROUP, "/group", e.what());
        }
    }
    auto component = [&](const char* key) {
        std::vector<Monomial> out;
        if (!doc.contains(key)) return out;
        const auto& arr = doc[key];
        const std::string path = std::string("/") + key;
        if (!arr.is_array()) throw ValidationError(ErrorCode::E_SYNTAX, path, "must be an array of terms");
        for (std::size_t t = 0; t < arr.size(); ++t) {
            const std::string tp = path + "/" + std::to_string(t);
            try {
                const auto& term = arr[t];
                if (!term.is_array() || term.size() != 2) throw std::runtime_error("term must be [exponents, matrix]");
                const auto ex = term[0].get<std::vector<int>>();
                if (ex.size() != 2) throw std::runtime_error("exponents must be [px, py]");
                const auto& rows = term[1];
                const auto n = static_cast<Eigen::Index>(rows.size());
                CMatrix m(n, n);
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (static_cast<Eigen::Index>(rows[r].size()) != n) throw std::runtime_error("matrix must be square");
                    for (Eigen::Index c = 0; c < n; ++c) {
                        const auto z = rows[r][c].get<std::vector<double>>();
                        if (z.size() != 2) throw std::runtime_error("entries must be [re, im]");
                        m(r, c) = {z[0], z[1]};
                    }
                }
                out.push_back({ex[0], ex[1], m});
            } catch (const std::exception& e) {
                throw ValidationError(ErrorCode::E_SYNTAX, tp, e.what());
            }
        }
        return out;
    };
    auto ax = component("x");
    auto ay = component("y");
    try {
        GaugeField2D field(name, group, std::move(ax), std::move(ay));
        field.check_algebra();
        return field;
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(ErrorCode::E_GROUP, "", e.what());
    }
}

inline GaugeField2D load_field(const std::string& name_or_path) {
    for (const auto& n : field_catalog_names())
        if (n == name_or_path) return catalog_field(n);
    std::ifstream in(name_or_path, std::ios::binary);
    if (!in) throw ValidationError(ErrorCode::E_SYNTAX, "", "unknown field or unreadable file '" + name_or_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_field_json(ss.str(), name_or_path);
}

/// Central differences for the derivative terms plus the exact commutator.
inline CMatrix curvature(const GaugeField2D& field, double x, double y, double h) {
    if (!(h > 0.0)) throw ParameterError("curvature: h must be positive");
    const CMatrix dxay = (field.ay(x + h, y) - field.ay(x - h, y)) / (2.0 * h);
    const CMatrix dyax = (field.ax(x, y + h) - field.ax(x, y - h)) / (2.0 * h);
    const CMatrix a = field.ax(x, y);
    const CMatrix b = field.ay(x, y);
    return dxay - dyax + a * b - b * a;
}

/// Circle traversed once from the basepoint at angle `start`.
struct RoundLoop {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 1.0;
    double start = 0.0;
    bool clockwise = false;

    double area() const { return std::numbers::pi * radius * radius; }
};

struct Holonomy {
    CMatrix value;
    double error_estimate = 0.0;  // ||h_n - h_{n/2}|| / 15
};

/// Nearest unitary matrix (polar factor).
inline CMatrix unitary_projection(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

namespace detail {

inline CMatrix transport(const GaugeField2D& field, const RoundLoop& loop, int steps) {
    const double dir = loop.clockwise ? -1.0 : 1.0;
    const double h = 2.0 * std::numbers::pi / steps;
    auto generator = [&](double s) {
        const double phi = loop.start + dir * s;
        const double x = loop.cx + loop.radius * std::cos(phi);
        const double y = loop.cy + loop.radius * std::sin(phi);
        const double vx = -dir * loop.radius * std::sin(phi);
        const double vy = dir * loop.radius * std::cos(phi);
        CMatrix m = -(field.ax(x, y) * vx + field.ay(x, y) * vy);
        if (!m.allFinite()) throw ParameterError("holonomy: non-finite field value on the loop");
        return m;
    };
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    CMatrix u = CMatrix::Identity(field.dim(), field.dim());
    for (int k = 0; k < steps; ++k) {
        const double s = k * h;
        const CMatrix a1 = generator(s + c1 * h);
        const CMatrix a2 = generator(s + c2 * h);
        const CMatrix omega = 0.5 * h * (a1 + a2) - (std::sqrt(3.0) / 12.0) * h * h * (a1 * a2 - a2 * a1);
        u = omega.exp() * u;
        if ((k + 1) % 64 == 0) u = unitary_projection(u);
    }
    return unitary_projection(u);
}

}  // namespace detail

/// Path-ordered exponential by fourth-order Magnus steps, re-unitarized
/// every 64 steps, with a step-halving Richardson error estimate.
inline Holonomy holonomy(const GaugeField2D& field, const RoundLoop& loop, int steps) {
    if (steps < 8) throw ParameterError("holonomy: steps must be >= 8");
    if (!(loop.radius > 0.0)) throw ParameterError("holonomy: radius must be positive");
    Holonomy out;
    out.value = detail::transport(field, loop, steps);
    out.error_estimate = (out.value - detail::transport(field, loop, steps / 2)).norm() / 15.0;
    return out;
}

struct RoundLoopRow {
    double radius = 0.0;
    double area = 0.0;
    double defect = 0.0;       // ||h - (1 - F(m0) area)||_F
    double first_order = 0.0;  // ||h - 1||_F / area
    double integration_error = 0.0;
};

struct RoundLoopTable {
    std::vector<RoundLoopRow> rows;
    double fitted_exponent = 0.0;  // slope of log defect vs log area, smaller half
    double c_first_order = 0.0;    // max ||h - 1|| / area
};

/// Circles through m0 with centers m0 + r (0, 1), so they shrink
/// tangentially at m0. The chart is the box [-box, box]^2.
inline RoundLoopTable round_loop_estimate(const GaugeField2D& field, double m0x, double m0y,
                                          const std::vector<double>& radii, int steps, double box = 10.0) {
    if (radii.size() < 2) throw ParameterError("round_loop_estimate: need at least two radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw ParameterError("round_loop_estimate: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw ParameterError("round_loop_estimate: radii must be descending");
    }
    if (std::abs(m0x) + radii[0] > box || std::abs(m0y) + 2.0 * radii[0] > box)
        throw ParameterError("round_loop_estimate: loops leave the chart");
    const CMatrix F = field.curvature_exact(m0x, m0y);
    const CMatrix id = CMatrix::Identity(field.dim(), field.dim());
    RoundLoopTable table;
    double smallest_defect = std::numeric_limits<double>::infinity();
    double largest_error = 0.0;
    for (double r : radii) {
        const RoundLoop loop{m0x, m0y + r, r, -0.5 * std::numbers::pi, false};
        const Holonomy h = holonomy(field, loop, steps);
        RoundLoopRow row;
        row.radius = r;
        row.area = loop.area();
        row.defect = (h.value - (id - F * row.area)).norm();
        row.first_order = (h.value - id).norm() / row.area;
        row.integration_error = h.error_estimate;
        smallest_defect = std::min(smallest_defect, row.defect);
        largest_error = std::max(largest_error, h.error_estimate);
        table.c_first_order = std::max(table.c_first_order, row.first_order);
        table.rows.push_back(row);
    }
    if (largest_error > 0.1 * smallest_defect && largest_error > 0.0)
        throw PrecisionError("round_loop_estimate: integration error " + std::to_string(largest_error) +
                             " exceeds 10% of the smallest defect; raise steps");
    const std::size_t half = std::max<std::size_t>(2, (radii.size() + 1) / 2);
    std::vector<double> la;
    std::vector<double> ld;
    for (std::size_t i = radii.size() - half; i < radii.size(); ++i) {
        la.push_back(std::log(table.rows[i].area));
        ld.push_back(std::log(table.rows[i].defect));
    }
    if (std::all_of(ld.begin(), ld.end(), [](double v) { return std::isfinite(v); })) {
        double ma = 0.0;
        double md = 0.0;
        for (std::size_t i = 0; i < la.size(); ++i) {
            ma += la[i];
            md += ld[i];
        }
        ma /= static_cast<double>(la.size());
        md /= static_cast<double>(la.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = 0; i < la.size(); ++i) {
            sxy += (la[i] - ma) * (ld[i] - md);
            sxx += (la[i] - ma) * (la[i] - ma);
        }
        table.fitted_exponent = sxy / sxx;
    } else {
        // zero defect: the estimate holds with any exponent
        table.fitted_exponent = std::numeric_limits<double>::infinity();
    }
    return table;
}

}  // namespace ym2
