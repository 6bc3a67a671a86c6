#include "mlsm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mlsm {

double ProblemSpec::scattering_out(std::size_t g) const
{
    double sum = 0.0;
    for (std::size_t dst = 0; dst < groups; ++dst) {
        sum += sigma_s[dst][g];
    }
    return sum;
}

std::vector<double> ProblemSpec::scattering_ratios() const
{
    std::vector<double> c(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        c[g] = scattering_ratio(g);
    }
    return c;
}

void validate(const ProblemSpec& spec)
{
    const std::size_t G = spec.groups;
    if (G < 1) {
        throw ProblemError("groups must be >= 1");
    }
    if (spec.sigma_t.size() != G || spec.source.size() != G || spec.sigma_s.size() != G) {
        throw ProblemError("dimension mismatch: sigma_t, source and sigma_s must have " +
                           std::to_string(G) + " entries");
    }
    for (std::size_t g = 0; g < G; ++g) {
        if (spec.sigma_s[g].size() != G) {
            throw ProblemError("dimension mismatch: sigma_s row " + std::to_string(g + 1) +
                               " has " + std::to_string(spec.sigma_s[g].size()) + " entries");
        }
        if (!(spec.sigma_t[g] > 0.0) || !std::isfinite(spec.sigma_t[g])) {
            throw ProblemError("sigma_t must be positive in group " + std::to_string(g + 1));
        }
        if (spec.source[g] < 0.0 || !std::isfinite(spec.source[g])) {
            throw ProblemError("negative source in group " + std::to_string(g + 1));
        }
        for (double v : spec.sigma_s[g]) {
            if (v < 0.0 || !std::isfinite(v)) {
                throw ProblemError("negative cross section in sigma_s row " + std::to_string(g + 1));
            }
        }
    }
    for (std::size_t g = 0; g < G; ++g) {
        const double c = spec.scattering_ratio(g);
        if (c > 1.0 + 1e-12) {
            std::ostringstream os;
            os << "supercritical group " << g + 1 << ": c = " << c;
            throw ProblemError(os.str());
        }
    }
    if (!(spec.width > 0.0)) {
        throw ProblemError("width must be positive");
    }
    if (spec.cells < 1) {
        throw ProblemError("cells must be >= 1");
    }
    if (spec.quad_half_order < 1) {
        throw ProblemError("quad_half_order must be >= 1");
    }
}

namespace {

BoundaryKind parse_bc(const nlohmann::json& doc, const char* key)
{
    if (!doc.contains(key)) {
        return BoundaryKind::vacuum;
    }
    const auto bc = doc.at(key).get<std::string>();
    if (bc != "vacuum") {
        throw ProblemError(std::string("unsupported boundary condition '") + bc + "' for " + key);
    }
    return BoundaryKind::vacuum;
}

template <class T>
T required(const nlohmann::json& doc, const char* key)
{
    if (!doc.contains(key)) {
        throw ProblemError(std::string("missing required key '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ProblemError(std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

ProblemSpec load_problem(std::string_view document)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ProblemError(std::string("parse failure: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ProblemError("parse failure: problem document must be an object");
    }

    ProblemSpec spec;
    spec.name = doc.value("name", std::string("config"));
    spec.groups = required<std::size_t>(doc, "groups");
    spec.sigma_t = required<std::vector<double>>(doc, "sigma_t");
    spec.sigma_s = required<std::vector<std::vector<double>>>(doc, "sigma_s");
    spec.source = required<std::vector<double>>(doc, "source");
    spec.width = required<double>(doc, "width");
    spec.cells = required<std::size_t>(doc, "cells");
    spec.quad_half_order = required<std::size_t>(doc, "quad_half_order");
    spec.bc_left = parse_bc(doc, "bc_left");
    spec.bc_right = parse_bc(doc, "bc_right");
    validate(spec);
    return spec;
}

ProblemSpec load_problem_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ProblemError("cannot open problem file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    auto spec = load_problem(buf.str());
    if (spec.name == "config") {
        spec.name = path.stem().string();
    }
    return spec;
}

namespace {

// Rows are destination groups, columns source groups.
ProblemSpec make_test1()
{
    ProblemSpec p;
    p.name = "test1";
    p.groups = 10;
    p.sigma_t = {2.49756, 2.01650, 1.51992, 1.67388, 2.36661,
                 1.50008, 2.37543, 2.36241, 2.04640, 1.59740};
    p.sigma_s = {
        {0.835282, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {0.401686, 0.566521, 0, 0, 0, 0, 0, 0, 0, 0},
        {0.404298, 0.569454, 0.420634, 0, 0, 0, 0, 0, 0, 0},
        {0.498922, 0.264139, 0.179242, 0.0828011, 0, 0, 0, 0, 0, 0},
        {0.306376, 0.0657747, 0.148397, 0.307318, 1.30088, 0, 0, 0, 0, 0},
        // Row stored shifted one column right of the tabulated layout.
        {0, 0.439338, 0.362807, 0.564376, 0.456018, 0.0715262, 0, 0, 0, 0},
        {0, 0, 0.336331, 0.122044, 0.259295, 0.623241, 0.812409, 1.28728, 0.278371, 0.301517},
        {0, 0, 0, 0.473528, 0.0566290, 0.128925, 0.0676741, 0.123057, 0.518149, 0.457140},
        {0, 0, 0, 0, 0.242843, 0.180473, 0.622078, 0.485474, 0.483321, 0.386770},
        {0, 0, 0, 0, 0, 0.345904, 0.842890, 0.466367, 0.570623, 0.397965},
    };
    p.source.assign(10, 1.0);
    p.width = 32.0;
    p.cells = 128;
    p.quad_half_order = 8;
    return p;
}

ProblemSpec make_test2()
{
    ProblemSpec p;
    p.name = "test2";
    p.groups = 7;
    p.sigma_t = {0.159206, 0.412970, 0.590310, 0.584350, 0.718000, 1.25445, 2.65038};
    p.sigma_s = {
        {4.44777e-2, 0, 0, 0, 0, 0, 0},
        {1.134e-1, 2.82334e-1, 0, 0, 0, 0, 0},
        {7.2347e-4, 1.2994e-1, 3.45256e-1, 0, 0, 0, 0},
        {3.7499e-6, 6.234e-4, 2.2457e-1, 9.10284e-2, 7.1437e-5, 0, 0},
        {5.3184e-8, 4.8002e-5, 1.6999e-2, 4.1551e-1, 1.39138e-1, 2.2157e-3, 0},
        {0, 7.4486e-6, 2.6443e-3, 6.3732e-2, 5.1182e-1, 6.99913e-1, 1.3244e-1},
        {0, 1.0455e-6, 5.0344e-4, 1.2139e-2, 6.1229e-2, 5.3732e-1, 2.4807},
    };
    p.source.assign(7, 1.0);
    p.width = 32.0;
    p.cells = 128;
    p.quad_half_order = 8;
    return p;
}

}  // namespace

ProblemSpec builtin_problem(std::string_view name)
{
    ProblemSpec p;
    if (name == "test1") {
        p = make_test1();
    } else if (name == "test2") {
        p = make_test2();
    } else {
        throw ProblemError("unknown built-in problem '" + std::string(name) + "'");
    }
    validate(p);
    return p;
}

std::vector<std::string> builtin_names() { return {"test1", "test2"}; }

std::vector<double> builtin_reference_ratios(std::string_view name)
{
    if (name == "test1") {
        return {0.979581, 0.944816, 0.952295, 0.926035, 0.978471,
                0.9,      0.987210, 0.9999,   0.904252, 0.966192};
    }
    if (name == "test2") {
        return {0.996225, 0.999961, 0.999429, 0.996679, 0.992003, 0.988042, 0.985949};
    }
    throw ProblemError("no reference scattering ratios for '" + std::string(name) + "'");
}

ValidationReport validate_scattering(const ProblemSpec& spec, const std::vector<double>& reference_c,
                                     double tolerance)
{
    if (reference_c.size() != spec.groups) {
        throw ProblemError("reference_c must have one entry per group");
    }
    ValidationReport rep;
    rep.tolerance = tolerance;
    rep.reference = reference_c;
    rep.computed = spec.scattering_ratios();
    for (std::size_t g = 0; g < spec.groups; ++g) {
        const double err = std::abs(rep.computed[g] - reference_c[g]);
        if (err > rep.max_abs_error) {
            rep.max_abs_error = err;
            rep.worst_group = g;
        }
    }
    rep.passed = rep.max_abs_error <= tolerance;
    return rep;
}

ConnectionStrengthMatrix connection_strength(const ProblemSpec& spec)
{
    const std::size_t G = spec.groups;
    ConnectionStrengthMatrix out;
    out.S.assign(G, std::vector<double>(G, 0.0));
    for (std::size_t g = 0; g < G; ++g) {
        double row_max = 0.0;
        for (std::size_t gp = 0; gp < G; ++gp) {
            if (gp != g) {
                row_max = std::max(row_max, spec.sigma_s[g][gp]);
            }
        }
        if (row_max <= 0.0) {
            continue;
        }
        for (std::size_t gp = 0; gp < G; ++gp) {
            if (gp != g) {
                out.S[g][gp] = spec.sigma_s[g][gp] / row_max;
            }
        }
    }
    return out;
}

}  // namespace mlsm
