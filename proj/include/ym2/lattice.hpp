#pragma once

// Lattices reduced to what the expectation formulas depend on: interior
// domains with areas (one flag each), refinement plans splitting each
// domain into sub-domains, and loop-network assignments. Lattice files are
// JSON documents.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ym2/error.hpp"
#include "ym2/liegroup.hpp"
#include "ym2/random.hpp"

namespace ym2 {

struct Domain {
    std::string id;
    double area = 0.0;

    friend bool operator==(const Domain&, const Domain&) = default;
};

/// One flag per interior domain, identified by the domain areas.
struct FlagWorldSpec {
    std::vector<Domain> domains;

    const Domain* find(std::string_view id) const {
        for (const auto& d : domains)
            if (d.id == id) return &d;
        return nullptr;
    }

    double max_area() const {
        double m = 0.0;
        for (const auto& d : domains) m = std::max(m, d.area);
        return m;
    }

    friend bool operator==(const FlagWorldSpec&, const FlagWorldSpec&) = default;
};

/// Sub-areas for each refined domain; unrefined domains are kept whole.
struct RefinementPlan {
    std::map<std::string, std::vector<double>> parts;

    /// Largest sub-area over the world (unrefined domains count whole).
    double mesh(const FlagWorldSpec& world) const {
        double m = 0.0;
        for (const auto& d : world.domains) {
            auto it = parts.find(d.id);
            if (it == parts.end()) {
                m = std::max(m, d.area);
            } else {
                for (double a : it->second) m = std::max(m, a);
            }
        }
        return m;
    }

    /// Sub-areas of `domain` under this plan.
    std::vector<double> parts_of(const Domain& domain) const {
        auto it = parts.find(domain.id);
        return it == parts.end() ? std::vector<double>{domain.area} : it->second;
    }

    friend bool operator==(const RefinementPlan&, const RefinementPlan&) = default;
};

/// Irrep label per flag and the contracted irrep of the network.
struct LoopNetworkSpec {
    std::map<std::string, Label> assignments;
    Label target;

    friend bool operator==(const LoopNetworkSpec&, const LoopNetworkSpec&) = default;
};

struct LatticeFile {
    GroupSpec group;
    double coupling = 1.0;
    FlagWorldSpec world;
    std::optional<RefinementPlan> refinement;
    std::vector<LoopNetworkSpec> networks;

    friend bool operator==(const LatticeFile&, const LatticeFile&) = default;
};

struct ParseOptions {
    bool lenient = false;  // accept unknown fields
};

/// Irreps of all flags of the world for `network` (trivial where unassigned).
inline std::vector<Irrep> network_irreps(const GroupSpec& group, const FlagWorldSpec& world,
                                         const LoopNetworkSpec& network) {
    std::vector<Irrep> out;
    for (const auto& d : world.domains) {
        auto it = network.assignments.find(d.id);
        out.push_back(it == network.assignments.end() ? group.trivial() : group.irrep(it->second));
    }
    return out;
}

inline std::int64_t network_multiplicity(const GroupSpec& group, const FlagWorldSpec& world,
                                         const LoopNetworkSpec& network) {
    return tensor_multiplicity(group, network_irreps(group, world, network), group.irrep(network.target));
}

/// Relative tolerance for user-supplied refinement sums.
inline constexpr double kAreaSumTolerance = 1e-12;

namespace detail {

inline std::string pointer_escape(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

class LatticeParser {
public:
    explicit LatticeParser(ParseOptions options) : options_(options) {}

    LatticeFile parse(std::string_view text) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(ErrorCode::E_SYNTAX, "", std::string("invalid JSON: ") + e.what());
        }
        LatticeFile out;
        if (!doc.is_object()) fail(ErrorCode::E_SYNTAX, "", "document must be a JSON object");
        check_keys(doc, "", {"group", "coupling", "domains", "refinement", "networks"});

        bool group_ok = false;
        if (require(doc, "group", "")) {
            if (!doc["group"].is_string()) {
                add(ErrorCode::E_SYNTAX, "/group", "must be a string");
            } else {
                try {
                    out.group = GroupSpec::parse(doc["group"].get<std::string>());
                    group_ok = true;
                } catch (const Error& e) {
                    add(ErrorCode::E_GROUP, "/group", e.what());
                }
            }
        }
        if (require(doc, "coupling", "")) {
            const auto& c = doc["coupling"];
            if (!c.is_number() || !(c.get<double>() > 0.0) || !std::isfinite(c.get<double>())) {
                add(ErrorCode::E_SYNTAX, "/coupling", "must be a number > 0");
            } else {
                out.coupling = c.get<double>();
            }
        }
        if (require(doc, "domains", "")) parse_domains(doc["domains"], out.world);
        if (doc.contains("refinement")) out.refinement = parse_refinement(doc["refinement"], out.world);
        if (doc.contains("networks")) {
            const auto& nets = doc["networks"];
            if (!nets.is_array()) {
                add(ErrorCode::E_SYNTAX, "/networks", "must be an array");
            } else {
                for (std::size_t i = 0; i < nets.size(); ++i) {
                    auto net = parse_network(nets[i], "/networks/" + std::to_string(i), out, group_ok);
                    if (net) out.networks.push_back(std::move(*net));
                }
            }
        }
        if (!diagnostics_.empty()) throw ValidationError(std::move(diagnostics_));
        return out;
    }

private:
    void add(ErrorCode code, std::string path, std::string message) {
        diagnostics_.push_back({code, std::move(path), std::move(message)});
    }

    [[noreturn]] void fail(ErrorCode code, std::string path, std::string message) {
        add(code, std::move(path), std::move(message));
        throw ValidationError(std::move(diagnostics_));
    }

    bool require(const nlohmann::json& obj, const char* key, const std::string& path) {
        if (obj.contains(key)) return true;
        add(ErrorCode::E_SYNTAX, path + "/" + key, "required field missing");
        return false;
    }

    void check_keys(const nlohmann::json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        if (options_.lenient) return;
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                add(ErrorCode::E_SYNTAX, path + "/" + pointer_escape(key), "unknown field (use --lenient to ignore)");
        }
    }

    void parse_domains(const nlohmann::json& arr, FlagWorldSpec& world) {
        if (!arr.is_array() || arr.empty()) {
            add(ErrorCode::E_SYNTAX, "/domains", "must be a non-empty array");
            return;
        }
        std::set<std::string> seen;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = "/domains/" + std::to_string(i);
            const auto& d = arr[i];
            if (!d.is_object()) {
                add(ErrorCode::E_SYNTAX, path, "must be an object");
                continue;
            }
            check_keys(d, path, {"id", "area"});
            if (!require(d, "id", path) || !require(d, "area", path)) continue;
            if (!d["id"].is_string()) {
                add(ErrorCode::E_SYNTAX, path + "/id", "must be a string");
                continue;
            }
            const std::string id = d["id"].get<std::string>();
            if (!seen.insert(id).second) add(ErrorCode::E_SYNTAX, path + "/id", "duplicate domain id '" + id + "'");
            if (!d["area"].is_number()) {
                add(ErrorCode::E_SYNTAX, path + "/area", "must be a number");
                continue;
            }
            const double area = d["area"].get<double>();
            if (!(area > 0.0) || !std::isfinite(area)) add(ErrorCode::E_AREA, path + "/area", "area must be > 0");
            world.domains.push_back({id, area});
        }
    }

    RefinementPlan parse_refinement(const nlohmann::json& obj, const FlagWorldSpec& world) {
        RefinementPlan plan;
        if (!obj.is_object()) {
            add(ErrorCode::E_SYNTAX, "/refinement", "must be an object");
            return plan;
        }
        for (const auto& [id, parts] : obj.items()) {
            const std::string path = "/refinement/" + pointer_escape(id);
            const Domain* parent = world.find(id);
            if (!parent) {
                add(ErrorCode::E_SYNTAX, path, "refines unknown domain '" + id + "'");
                continue;
            }
            if (!parts.is_array() || parts.empty()) {
                add(ErrorCode::E_SYNTAX, path, "must be a non-empty array of sub-areas");
                continue;
            }
            std::vector<double> areas;
            bool ok = true;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                if (!parts[i].is_number()) {
                    add(ErrorCode::E_SYNTAX, path + "/" + std::to_string(i), "must be a number");
                    ok = false;
                    continue;
                }
                const double a = parts[i].get<double>();
                if (!(a > 0.0) || !std::isfinite(a)) {
                    add(ErrorCode::E_AREA, path + "/" + std::to_string(i), "sub-area must be > 0");
                    ok = false;
                }
                areas.push_back(a);
            }
            if (ok) {
                double sum = 0.0;
                for (double a : areas) sum += a;
                if (std::abs(sum - parent->area) > kAreaSumTolerance * parent->area)
                    add(ErrorCode::E_SUM, path,
                        "sub-areas sum to " + std::to_string(sum) + " but domain area is " + std::to_string(parent->area));
            }
            plan.parts[id] = std::move(areas);
        }
        return plan;
    }

    std::optional<Label> parse_label(const nlohmann::json& v, const std::string& path, const GroupSpec& group,
                                     bool group_ok) {
        if (!v.is_array()) {
            add(ErrorCode::E_SYNTAX, path, "label must be an integer array");
            return std::nullopt;
        }
        Label label;
        for (const auto& x : v) {
            if (!x.is_number_integer()) {
                add(ErrorCode::E_SYNTAX, path, "label entries must be integers");
                return std::nullopt;
            }
            label.push_back(x.get<int>());
        }
        if (!group_ok) return std::nullopt;
        try {
            group.check_label(label);
        } catch (const Error& e) {
            add(ErrorCode::E_GROUP, path, e.what());
            return std::nullopt;
        }
        return label;
    }

    std::optional<LoopNetworkSpec> parse_network(const nlohmann::json& net, const std::string& path,
                                                 const LatticeFile& file, bool group_ok) {
        if (!net.is_object()) {
            add(ErrorCode::E_SYNTAX, path, "must be an object");
            return std::nullopt;
        }
        check_keys(net, path, {"assignments", "target"});
        if (!require(net, "assignments", path) || !require(net, "target", path)) return std::nullopt;
        LoopNetworkSpec spec;
        bool ok = true;
        if (!net["assignments"].is_object()) {
            add(ErrorCode::E_SYNTAX, path + "/assignments", "must be an object");
            return std::nullopt;
        }
        for (const auto& [id, value] : net["assignments"].items()) {
            const std::string p = path + "/assignments/" + pointer_escape(id);
            if (!file.world.find(id)) {
                add(ErrorCode::E_SYNTAX, p, "unknown domain '" + id + "'");
                ok = false;
                continue;
            }
            auto label = parse_label(value, p, file.group, group_ok);
            if (!label) {
                ok = false;
                continue;
            }
            spec.assignments[id] = *label;
        }
        auto target = parse_label(net["target"], path + "/target", file.group, group_ok);
        if (!target) return std::nullopt;
        spec.target = *target;
        if (!ok) return std::nullopt;
        if (network_multiplicity(file.group, file.world, spec) < 1) {
            add(ErrorCode::E_MULT, path + "/target",
                "target " + format_label(spec.target) + " is not contained in the tensor product of the assignments");
            return std::nullopt;
        }
        return spec;
    }

    ParseOptions options_;
    std::vector<Diagnostic> diagnostics_;
};

}  // namespace detail

/// Parses and validates a lattice document. Throws ValidationError carrying
/// every violation found, each with a JSON-pointer path and an E_* code.
inline LatticeFile parse_lattice_file(std::string_view text, ParseOptions options = {}) {
    return detail::LatticeParser(options).parse(text);
}

inline LatticeFile load_lattice_file(const std::string& path, ParseOptions options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(ErrorCode::E_SYNTAX, "", "cannot read lattice file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_lattice_file(ss.str(), options);
}

inline std::string serialize_lattice(const LatticeFile& file) {
    nlohmann::ordered_json doc;
    doc["group"] = file.group.to_string();
    doc["coupling"] = file.coupling;
    doc["domains"] = nlohmann::ordered_json::array();
    for (const auto& d : file.world.domains) doc["domains"].push_back({{"id", d.id}, {"area", d.area}});
    if (file.refinement) {
        doc["refinement"] = nlohmann::ordered_json::object();
        for (const auto& [id, parts] : file.refinement->parts) doc["refinement"][id] = parts;
    }
    doc["networks"] = nlohmann::ordered_json::array();
    for (const auto& n : file.networks) {
        nlohmann::ordered_json a = nlohmann::ordered_json::object();
        for (const auto& [id, label] : n.assignments) a[id] = label;
        doc["networks"].push_back({{"assignments", a}, {"target", n.target}});
    }
    return doc.dump(2) + "\n";
}

/// Splits `total` into the given leading parts plus a remainder so that the
/// left-to-right sum of the result equals `total` exactly.
inline std::vector<double> close_partition(std::vector<double> leading, double total) {
    double s = 0.0;
    for (double a : leading) s += a;
    double last = total - s;
    // Nudge the remainder by ulps until the stored sum reproduces the parent.
    for (int i = 0; i < 8 && s + last != total; ++i)
        last = std::nextafter(last, s + last < total ? std::numeric_limits<double>::infinity() : 0.0);
    leading.push_back(last);
    return leading;
}

/// Each domain split into k equal parts.
inline RefinementPlan uniform_refinement(const FlagWorldSpec& world, int k) {
    if (k < 1) throw ParameterError("uniform_refinement: k must be >= 1");
    RefinementPlan plan;
    for (const auto& d : world.domains) {
        if (k == 1) {
            plan.parts[d.id] = {d.area};
            continue;
        }
        plan.parts[d.id] = close_partition(std::vector<double>(static_cast<std::size_t>(k) - 1, d.area / k), d.area);
    }
    return plan;
}

/// Refines every part of `plan` further into k equal parts.
inline RefinementPlan refine_uniformly(const FlagWorldSpec& world, const RefinementPlan& plan, int k) {
    if (k < 1) throw ParameterError("refine_uniformly: k must be >= 1");
    RefinementPlan out;
    for (const auto& d : world.domains) {
        std::vector<double> parts;
        for (double a : plan.parts_of(d)) {
            for (double sub : close_partition(std::vector<double>(static_cast<std::size_t>(k) - 1, a / k), a))
                parts.push_back(sub);
        }
        out.parts[d.id] = std::move(parts);
    }
    return out;
}

namespace detail {

inline void split_random(double area, double mesh, RandomStream& rng, std::vector<double>& out) {
    if (area <= mesh) {
        out.push_back(area);
        return;
    }
    const double p = rng.uniform(0.3, 0.7);
    const double left = p * area;
    split_random(left, mesh, rng, out);
    split_random(area - left, mesh, rng, out);
}

}  // namespace detail

/// Recursive random bisection with proportions in [0.3, 0.7] until every
/// part is <= mesh. The last part of each domain takes the exact remainder.
inline RefinementPlan random_refinement(const FlagWorldSpec& world, double mesh, RandomStream& rng) {
    if (!(mesh > 0.0)) throw ParameterError("random_refinement: mesh must be positive");
    RefinementPlan plan;
    for (const auto& d : world.domains) {
        std::vector<double> parts;
        detail::split_random(d.area, mesh, rng, parts);
        parts.pop_back();
        plan.parts[d.id] = close_partition(std::move(parts), d.area);
    }
    return plan;
}

/// Checks that the stored sub-areas of every refined domain sum to its area.
inline void validate_plan(const FlagWorldSpec& world, const RefinementPlan& plan) {
    std::vector<Diagnostic> issues;
    for (const auto& [id, parts] : plan.parts) {
        const Domain* d = world.find(id);
        if (!d) {
            issues.push_back({ErrorCode::E_SYNTAX, "/refinement/" + detail::pointer_escape(id), "unknown domain"});
            continue;
        }
        double sum = 0.0;
        for (double a : parts) {
            if (!(a > 0.0)) issues.push_back({ErrorCode::E_AREA, "/refinement/" + id, "sub-area must be > 0"});
            sum += a;
        }
        if (std::abs(sum - d->area) > kAreaSumTolerance * d->area)
            issues.push_back({ErrorCode::E_SUM, "/refinement/" + id, "sub-areas do not sum to the domain area"});
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

}  // namespace ym2
