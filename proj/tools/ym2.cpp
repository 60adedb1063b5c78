// ym2: batch front-end for the lattice Yang-Mills library.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ym2/expectation.hpp"
#include "ym2/heatkernel.hpp"
#include "ym2/lattice.hpp"
#include "ym2/parallel.hpp"
#include "ym2/singularity.hpp"
#include "ym2/smoothconn.hpp"

using namespace ym2;
using nlohmann::ordered_json;

namespace {

struct Common {
    double tol = 1e-10;
    int quad_order = 128;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;
    std::string format = "csv";
    bool lenient = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--tol", c.tol, "Absolute tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--quad-order", c.quad_order, "Gauss-Legendre nodes per panel")
        ->check(CLI::Range(2, 1 << 20))
        ->capture_default_str();
    sub->add_option("--seed", c.seed, "RNG seed (0 = built-in default)")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (0 = hardware)")->capture_default_str();
    sub->add_option("--out", c.out, "Output path (default stdout)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_flag("--lenient", c.lenient, "Accept unknown fields in input files");
}

GroupSpec parse_group(const std::string& text) {
    try {
        return GroupSpec::parse(text);
    } catch (const Error& e) {
        throw ValidationError(ErrorCode::E_GROUP, "/group", e.what());
    }
}

Label parse_label(const GroupSpec& g, const std::vector<int>& values) {
    if (values.size() != g.rank())
        throw ValidationError(ErrorCode::E_GROUP, "/label",
                              "label needs " + std::to_string(g.rank()) + " entries for group " + g.to_string());
    try {
        g.irrep(values);
    } catch (const Error& e) {
        throw ValidationError(ErrorCode::E_GROUP, "/label", e.what());
    }
    return values;
}

std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

// Primary output goes to --out or stdout. A sidecar carries the timestamp so
// the primary file stays byte-identical across runs.
void emit(const Common& c, const std::string& text, const std::vector<std::string>& argv) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ResourceError("cannot open output '" + c.out + "'", 0.0);
    f << text;
    ordered_json meta;
    meta["argv"] = argv;
    meta["written_at"] = std::chrono::system_clock::now().time_since_epoch() / std::chrono::seconds(1);
    std::ofstream m(c.out + ".meta.json", std::ios::binary);
    m << dump_json(meta);
}

std::string run_expect(const Common& c, const std::string& path) {
    const LatticeFile file = load_lattice_file(path, ParseOptions{c.lenient});
    std::vector<double> values(file.networks.size());
    parallel_for(values.size(), c.threads, [&](std::size_t i) {
        values[i] = file.refinement
                        ? loop_network_expectation(file.group, file.world, *file.refinement, file.networks[i], file.coupling)
                        : loop_network_expectation(file.group, file.world, file.networks[i], file.coupling);
    });
    std::ostringstream os;
    if (c.format == "json") {
        ordered_json j;
        j["group"] = file.group.to_string();
        j["coupling"] = file.coupling;
        j["networks"] = ordered_json::array();
        for (std::size_t i = 0; i < values.size(); ++i) j["networks"].push_back({{"network_id", i}, {"value", values[i]}});
        os << dump_json(j);
    } else {
        os << "network_id,value\n";
        for (std::size_t i = 0; i < values.size(); ++i) os << i << ',' << format_double(values[i]) << '\n';
    }
    return os.str();
}

std::string run_limit(const Common& c, const std::string& group_text, double coupling, double area,
                      const std::vector<int>& label, const std::vector<int>& meshes) {
    const GroupSpec g = parse_group(group_text);
    if (!(coupling > 0.0)) throw ValidationError(ErrorCode::E_SYNTAX, "/coupling", "coupling must be > 0");
    if (!(area > 0.0)) throw ValidationError(ErrorCode::E_AREA, "/area", "area must be > 0");
    for (int k : meshes)
        if (k < 1) throw ValidationError(ErrorCode::E_SYNTAX, "/meshes", "refinement counts must be >= 1");
    const FlagWorldSpec world{{Domain{"D", area}}};
    const auto rows =
        refinement_limit_experiment(g, world, g.irrep(parse_label(g, label)), coupling, meshes, c.quad_order, c.threads);
    std::ostringstream os;
    if (c.format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows)
            j.push_back({{"k", r.k}, {"mesh", r.mesh}, {"product", r.product}, {"target", r.target},
                         {"abs_error", r.abs_error}, {"quad_estimate", r.quad_estimate}});
        os << dump_json(j);
    } else {
        write_limit_csv(os, rows);
    }
    return os.str();
}

std::string run_density(const Common& c, const std::string& group_text, double time) {
    const GroupSpec g = parse_group(group_text);
    if (!(time > 0.0)) throw ValidationError(ErrorCode::E_SYNTAX, "/time", "time must be > 0");
    const auto d = build_density({g, time}, c.tol);
    std::ostringstream os;
    if (c.format == "json") {
        ordered_json j;
        j["group"] = g.to_string();
        j["t"] = time;
        j["tail_bound"] = d.tail_bound();
        j["terms"] = ordered_json::array();
        for (const auto& term : d.terms()) j["terms"].push_back({{"label", term.irrep.label}, {"coefficient", term.coefficient}});
        os << dump_json(j);
    } else {
        write_density_csv(os, d);
    }
    return os.str();
}

std::string run_sample(const Common& c, const std::string& group_text, double time, std::size_t count) {
    const GroupSpec g = parse_group(group_text);
    if (!(time > 0.0)) throw ValidationError(ErrorCode::E_SYNTAX, "/time", "time must be > 0");
    const auto d = build_density({g, time}, c.tol);
    const ClassSampler sampler(d);
    // fixed-size chunks with one derived stream each: independent of thread count
    constexpr std::size_t kChunk = 1024;
    const RandomStream root(c.seed);
    std::vector<ClassPoint> points(count);
    parallel_for((count + kChunk - 1) / kChunk, c.threads, [&](std::size_t chunk) {
        RandomStream rng = root.split(chunk);
        for (std::size_t i = chunk * kChunk; i < std::min(count, (chunk + 1) * kChunk); ++i) points[i] = sampler(rng);
    });
    std::ostringstream os;
    if (c.format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& p : points) j.push_back(p.coords);
        os << dump_json(j);
    } else {
        os << "index";
        for (std::size_t i = 0; i < g.rank(); ++i) os << ",x" << i;
        os << '\n';
        for (std::size_t n = 0; n < points.size(); ++n) {
            os << n;
            for (double v : points[n].coords) os << ',' << format_double(v);
            os << '\n';
        }
    }
    return os.str();
}

ordered_json singularity_summary(const SingularityConfig& cfg) {
    ordered_json s;
    s["epsilon"] = cfg.epsilon;
    s["F"] = cfg.F;
    s["c"] = cfg.concentration.c;
    s["areas"] = cfg.areas;
    return s;
}

std::string run_singularity(const Common& c, const std::string& group_text, double coupling, double epsilon, double F,
                            int lambda, const std::string& summary_path) {
    const GroupSpec g = parse_group(group_text);
    if (!(coupling > 0.0)) throw ValidationError(ErrorCode::E_SYNTAX, "/coupling", "coupling must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError(ErrorCode::E_SYNTAX, "/epsilon", "epsilon must lie in (0, 1)");
    if (!(F > 0.0 && F < 1.0)) throw ValidationError(ErrorCode::E_SYNTAX, "/F", "F must lie in (0, 1)");
    if (lambda < 1) throw ValidationError(ErrorCode::E_SYNTAX, "/lambda", "lambda must be >= 1");
    const auto cfg = build_config(g, coupling, epsilon, F, lambda, c.tol);
    const auto rows = support_split_table(cfg, c.tol, c.quad_order, c.threads);
    std::ostringstream os;
    if (c.format == "json") {
        ordered_json j;
        j["summary"] = singularity_summary(cfg);
        j["rows"] = ordered_json::array();
        for (const auto& r : rows)
            j["rows"].push_back({{"Lambda", r.lambda}, {"mu0", r.mu0}, {"muYM_lower", r.muYM_lower},
                                 {"muYM_computed", r.muYM_computed}});
        os << dump_json(j);
    } else {
        write_support_split_csv(os, rows);
        std::string path = summary_path;
        if (path.empty() && !c.out.empty()) path = c.out + ".summary.json";
        if (!path.empty()) {
            std::ofstream f(path, std::ios::binary);
            if (!f) throw ResourceError("cannot open summary '" + path + "'", 0.0);
            f << dump_json(singularity_summary(cfg));
        }
    }
    return os.str();
}

std::string run_holonomy(const Common& c, const std::string& field_name, double x0, double y0, std::vector<double> radii,
                         int steps) {
    const GaugeField2D field = load_field(field_name);
    if (radii.empty())
        for (int i = 0; i <= 8; ++i) radii.push_back(0.1 * std::pow(10.0, -i / 4.0));
    const auto table = round_loop_estimate(field, x0, y0, radii, steps);
    std::ostringstream os;
    if (c.format == "json") {
        ordered_json j;
        j["field"] = field.name();
        j["fitted_exponent"] = table.fitted_exponent;
        j["c_first_order"] = table.c_first_order;
        j["rows"] = ordered_json::array();
        for (const auto& r : table.rows)
            j["rows"].push_back({{"radius", r.radius}, {"area", r.area}, {"defect", r.defect},
                                 {"first_order", r.first_order}, {"integration_error", r.integration_error}});
        os << dump_json(j);
    } else {
        os << "radius,area,defect,first_order,integration_error\n";
        for (const auto& r : table.rows)
            os << format_double(r.radius) << ',' << format_double(r.area) << ',' << format_double(r.defect) << ','
               << format_double(r.first_order) << ',' << format_double(r.integration_error) << '\n';
        os << "fitted_exponent," << format_double(table.fitted_exponent) << '\n';
        os << "c_first_order," << format_double(table.c_first_order) << '\n';
    }
    return os.str();
}

std::string run_reps(const Common& c, const std::string& group_text, double cutoff) {
    const GroupSpec g = parse_group(group_text);
    if (!(cutoff >= 0.0)) throw ValidationError(ErrorCode::E_SYNTAX, "/cutoff", "cutoff must be >= 0");
    const auto irreps = irreps_up_to(g, cutoff);
    std::ostringstream os;
    if (c.format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& r : irreps) j.push_back({{"label", r.label}, {"dimension", r.dimension}, {"casimir", r.casimir}});
        os << dump_json(j);
    } else {
        os << "label,dimension,casimir\n";
        for (const auto& r : irreps) os << format_label(r.label) << ',' << r.dimension << ',' << format_double(r.casimir) << '\n';
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Two-dimensional lattice Yang-Mills measures"};
    app.require_subcommand(1);
    Common common;

    std::string lattice_path;
    auto* expect = app.add_subcommand("expect", "Loop-network expectations for a lattice file");
    expect->add_option("lattice", lattice_path, "Lattice JSON file")->required();
    add_common(expect, common);

    std::string group = "su2";
    double coupling = 1.0;
    double area = 1.0;
    std::vector<int> label{1};
    std::vector<int> meshes{1, 2, 4, 8, 16, 32, 64, 128, 256};
    auto* limit = app.add_subcommand("limit", "Wilson plaquette products under uniform refinement");
    limit->add_option("--group", group)->capture_default_str();
    limit->add_option("--coupling", coupling)->capture_default_str();
    limit->add_option("--area", area)->capture_default_str();
    limit->add_option("--label", label, "Irrep label, one entry per factor")->delimiter(',');
    limit->add_option("--meshes", meshes, "Refinement counts k")->delimiter(',');
    add_common(limit, common);

    double time = 0.5;
    auto* density = app.add_subcommand("density", "Truncated heat-kernel density coefficients");
    density->add_option("--group", group)->capture_default_str();
    density->add_option("--time", time)->capture_default_str();
    add_common(density, common);

    std::size_t count = 1000;
    auto* sample = app.add_subcommand("sample", "Conjugacy-class samples from the heat kernel");
    sample->add_option("--group", group)->capture_default_str();
    sample->add_option("--time", time)->capture_default_str();
    sample->add_option("--count", count)->capture_default_str();
    add_common(sample, common);

    double epsilon = 0.1;
    double F = 0.5;
    int lambda = 8;
    std::string summary_path;
    auto* sing = app.add_subcommand("singularity", "Support-splitting table");
    sing->add_option("--group", group)->capture_default_str();
    sing->add_option("--coupling", coupling)->capture_default_str();
    sing->add_option("--epsilon", epsilon)->capture_default_str();
    sing->add_option("--F", F)->capture_default_str();
    sing->add_option("--lambda", lambda)->capture_default_str();
    sing->add_option("--summary", summary_path, "JSON summary path (default <out>.summary.json)");
    add_common(sing, common);

    std::string field = "nonabelian-poly-1";
    double x0 = 0.0;
    double y0 = 0.0;
    std::vector<double> radii;
    int steps = 256;
    auto* hol = app.add_subcommand("holonomy", "Round-loop holonomy defects for a smooth field");
    hol->add_option("--field", field, "Catalog name or JSON coefficient file")->capture_default_str();
    hol->add_option("--x0", x0)->capture_default_str();
    hol->add_option("--y0", y0)->capture_default_str();
    hol->add_option("--radii", radii, "Descending radii")->delimiter(',');
    hol->add_option("--steps", steps)->capture_default_str();
    add_common(hol, common);

    double cutoff = 10.0;
    auto* reps = app.add_subcommand("reps", "Irrep table up to a label-norm cutoff");
    reps->add_option("--group", group)->capture_default_str();
    reps->add_option("--cutoff", cutoff)->capture_default_str();
    add_common(reps, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "E_SYNTAX /: " << e.what() << '\n';
        return 2;
    }

    try {
        std::string text;
        if (expect->parsed()) text = run_expect(common, lattice_path);
        else if (limit->parsed()) text = run_limit(common, group, coupling, area, label, meshes);
        else if (density->parsed()) text = run_density(common, group, time);
        else if (sample->parsed()) text = run_sample(common, group, time, count);
        else if (sing->parsed()) text = run_singularity(common, group, coupling, epsilon, F, lambda, summary_path);
        else if (hol->parsed()) text = run_holonomy(common, field, x0, y0, radii, steps);
        else if (reps->parsed()) text = run_reps(common, group, cutoff);
        emit(common, text, args);
        return 0;
    } catch (const ValidationError& e) {
        for (const auto& d : e.diagnostics()) std::cerr << d.format() << '\n';
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource: " << e.what() << '\n';
        return 3;
    } catch (const PrecisionError& e) {
        std::cerr << "precision: " << e.what() << '\n';
        return 3;
    } catch (const ToleranceError& e) {
        std::cerr << "precision: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        // remaining library errors stem from bad parameters
        std::cerr << "E_SYNTAX /: " << e.what() << '\n';
        return 2;
    }
}
