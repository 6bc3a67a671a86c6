// Command-line front end for the multigroup slab solver.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mlsm/driver.hpp"
#include "mlsm/problem.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string problem;
    std::string config;
    std::string method = "mlsm";
    std::string kmax = "1";
    std::string smax = "1";
    double epsilon = 1e-9;
    std::size_t max_outer = 1000;
    std::string out;
    std::string format = "csv";
    std::optional<unsigned> threads;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string residual_str(double v) { return fmt("%.5e", v); }

std::string rho_str(const mlsm::SpectralEstimate& r)
{
    if (!r.available || r.irregular) {
        return "n/a";
    }
    return fmt("%.2f", r.value);
}

std::vector<std::size_t> parse_list(const std::string& text, const char* name)
{
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || v < 1) {
            throw UsageError(std::string("--") + name + ": expected positive integers, got '" + item + "'");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) {
        throw UsageError(std::string("--") + name + ": empty list");
    }
    return out;
}

std::size_t parse_single(const std::string& text, const char* name)
{
    const auto v = parse_list(text, name);
    if (v.size() != 1) {
        throw UsageError(std::string("--") + name + " takes a single value for this subcommand");
    }
    return v.front();
}

mlsm::ProblemSpec load(const Options& o)
{
    if (!o.problem.empty() && !o.config.empty()) {
        throw UsageError("give either --problem or --config, not both");
    }
    if (!o.config.empty()) {
        return mlsm::load_problem_file(o.config);
    }
    if (o.problem.empty()) {
        throw UsageError("a problem is required (--problem NAME|FILE or --config FILE)");
    }
    for (const auto& name : mlsm::builtin_names()) {
        if (o.problem == name) {
            return mlsm::builtin_problem(name);
        }
    }
    if (std::filesystem::exists(o.problem)) {
        return mlsm::load_problem_file(o.problem);
    }
    throw UsageError("unknown problem '" + o.problem + "'");
}

unsigned thread_count(const Options& o)
{
    if (o.threads) {
        return *o.threads;
    }
    if (const char* env = std::getenv("SOLVER_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 0) {
            throw UsageError("SOLVER_THREADS must be a nonnegative integer");
        }
        return static_cast<unsigned>(v);
    }
    return 1;
}

mlsm::IterationConfig base_config(const Options& o)
{
    mlsm::IterationConfig cfg;
    try {
        cfg.method = mlsm::parse_method(o.method);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    cfg.epsilon = o.epsilon;
    cfg.max_outer = o.max_outer;
    cfg.threads = thread_count(o);
    if (!(cfg.epsilon > 0.0) || cfg.max_outer < 1) {
        throw UsageError("--epsilon must be positive and --max-outer at least 1");
    }
    return cfg;
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw std::runtime_error("cannot open output file '" + path + "'");
            }
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

int status_exit(mlsm::RunStatus s)
{
    return s == mlsm::RunStatus::converged ? kExitOk : kExitNotConverged;
}

int cmd_run(const Options& o)
{
    const mlsm::ProblemSpec spec = load(o);
    mlsm::IterationConfig cfg = base_config(o);
    if (cfg.method != mlsm::Method::SI) {
        cfg.k_max = parse_single(o.kmax, "kmax");
        cfg.s_max = parse_single(o.smax, "smax");
    }
    const mlsm::RunReport r = mlsm::run(spec, cfg);
    Output out(o.out);
    std::ostream& os = out.os();
    const auto& h = r.residual_history;
    if (o.format == "csv") {
        os << "outer_iter,residual,ratio\n";
        for (std::size_t l = 0; l < h.size(); ++l) {
            os << (l + 1) << ',' << residual_str(h[l]) << ',';
            if (l > 0 && h[l - 1] > 0.0) {
                os << fmt("%.6g", h[l] / h[l - 1]);
            }
            os << '\n';
        }
        os << "\nN_t,rho_num,M_lo,status\n";
        os << r.N_t << ',' << rho_str(r.rho) << ',' << r.M_lo << ',' << mlsm::to_string(r.status) << '\n';
    } else {
        os << spec.name << "  method " << mlsm::to_string(r.method);
        if (r.method != mlsm::Method::SI) {
            os << "  k_max " << r.k_max << "  s_max " << r.s_max;
        }
        os << '\n';
        for (std::size_t l = 0; l < h.size(); ++l) {
            os << "  iter " << (l + 1) << "  residual " << residual_str(h[l]);
            if (l > 0 && h[l - 1] > 0.0) {
                os << "  ratio " << fmt("%.4f", h[l] / h[l - 1]);
            }
            os << '\n';
        }
        os << "N_t " << r.N_t << "  rho_num " << rho_str(r.rho) << "  M_lo " << r.M_lo << "  status "
           << mlsm::to_string(r.status) << '\n';
    }
    return status_exit(r.status);
}

int cmd_sweep_table(const Options& o)
{
    const mlsm::ProblemSpec spec = load(o);
    mlsm::IterationConfig cfg = base_config(o);
    if (cfg.method == mlsm::Method::SI) {
        throw UsageError("sweep-table needs --method mlsm or mlsm-aa1");
    }
    const auto ks = parse_list(o.kmax, "kmax");
    const auto ss = parse_list(o.smax, "smax");
    Output out(o.out);
    std::ostream& os = out.os();
    const bool csv = o.format == "csv";
    if (csv) {
        os << "k_max,s_max,N_t,rho_num,M_lo,status\n";
    } else {
        os << "k_max  s_max  N_t  rho_num  M_lo  status\n";
    }
    bool all_converged = true;
    for (std::size_t k : ks) {
        for (std::size_t s : ss) {
            cfg.k_max = k;
            cfg.s_max = s;
            const mlsm::RunReport r = mlsm::run(spec, cfg);
            all_converged = all_converged && r.status == mlsm::RunStatus::converged;
            if (csv) {
                os << k << ',' << s << ',' << r.N_t << ',' << rho_str(r.rho) << ',' << r.M_lo << ','
                   << mlsm::to_string(r.status) << '\n';
            } else {
                char line[128];
                std::snprintf(line, sizeof line, "%5zu  %5zu  %3zu  %7s  %4zu  %s\n", k, s, r.N_t,
                              rho_str(r.rho).c_str(), r.M_lo, mlsm::to_string(r.status).c_str());
                os << line;
            }
        }
    }
    return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_validate(const Options& o)
{
    const mlsm::ProblemSpec spec = load(o);
    if (o.problem.empty()) {
        throw UsageError("validate compares against built-in reference ratios; use --problem");
    }
    const mlsm::ValidationReport v = mlsm::validate_scattering(spec, mlsm::builtin_reference_ratios(spec.name));
    Output out(o.out);
    std::ostream& os = out.os();
    if (o.format == "csv") {
        os << "group,c_computed,c_reference,abs_error\n";
        for (std::size_t g = 0; g < v.computed.size(); ++g) {
            os << (g + 1) << ',' << fmt("%.6f", v.computed[g]) << ',' << fmt("%.6f", v.reference[g]) << ','
               << fmt("%.2e", std::abs(v.computed[g] - v.reference[g])) << '\n';
        }
        os << "\nmax_abs_error,tolerance,result\n"
           << fmt("%.2e", v.max_abs_error) << ',' << fmt("%.0e", v.tolerance) << ','
           << (v.passed ? "pass" : "fail") << '\n';
    } else {
        for (std::size_t g = 0; g < v.computed.size(); ++g) {
            os << "g" << (g + 1) << "  c " << fmt("%.6f", v.computed[g]) << "  ref " << fmt("%.6f", v.reference[g])
               << '\n';
        }
        os << "max error " << fmt("%.2e", v.max_abs_error) << " (group " << (v.worst_group + 1) << ")  "
           << (v.passed ? "PASS" : "FAIL") << '\n';
    }
    return v.passed ? kExitOk : kExitNotConverged;
}

int cmd_strength(const Options& o)
{
    const mlsm::ProblemSpec spec = load(o);
    const auto S = mlsm::connection_strength(spec).S;
    Output out(o.out);
    std::ostream& os = out.os();
    const bool csv = o.format == "csv";
    os << (csv ? "g" : "   g");
    for (std::size_t gp = 0; gp < S.size(); ++gp) {
        os << (csv ? "," + std::to_string(gp + 1) : fmt("%6.0f", static_cast<double>(gp + 1)));
    }
    os << '\n';
    for (std::size_t g = 0; g < S.size(); ++g) {
        os << (csv ? std::to_string(g + 1) : fmt("%4.0f", static_cast<double>(g + 1)));
        for (double v : S[g]) {
            os << (csv ? "," + fmt("%.2f", v) : fmt("%6.2f", v));
        }
        os << '\n';
    }
    return kExitOk;
}

int cmd_analyze(const Options& o)
{
    const mlsm::ProblemSpec spec = load(o);
    const mlsm::InfiniteMediumRho r = mlsm::si_infinite_medium_rho(spec);
    Output out(o.out);
    std::ostream& os = out.os();
    if (o.format == "csv") {
        os << "rho_th_si,power_iterations,power_converged\n"
           << fmt("%.2f", r.rho) << ',' << r.iterations << ',' << (r.power_converged ? "yes" : "no") << '\n';
    } else {
        os << "theoretical SI spectral radius " << fmt("%.2f", r.rho) << " (" << fmt("%.6f", r.rho) << ", "
           << r.iterations << " power iterations)\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multigroup slab transport solver with multilevel second-moment iterations"};
    app.require_subcommand(1);
    Options o;

    auto add_problem = [&](CLI::App* sub) {
        sub->add_option("--problem", o.problem, "built-in problem name (test1, test2) or JSON file");
        sub->add_option("--config", o.config, "JSON problem file");
        sub->add_option("--out", o.out, "output file (default stdout)");
        sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "human"}));
    };
    auto add_solver = [&](CLI::App* sub, const char* list_help) {
        sub->add_option("--method", o.method, "iteration method")->check(CLI::IsMember({"si", "mlsm", "mlsm-aa1"}));
        sub->add_option("--kmax", o.kmax, list_help);
        sub->add_option("--smax", o.smax, list_help);
        sub->add_option("--epsilon", o.epsilon, "convergence tolerance");
        sub->add_option("--max-outer", o.max_outer, "cap on transport iterations");
        sub->add_option("--threads", o.threads, "worker threads (0 = all cores; env SOLVER_THREADS)");
    };

    CLI::App* run = app.add_subcommand("run", "solve one configuration and print the residual history");
    add_problem(run);
    add_solver(run, "inner cycle count");
    CLI::App* table = app.add_subcommand("sweep-table", "tabulate N_t, rho_num and M_lo over k_max x s_max");
    add_problem(table);
    add_solver(table, "comma-separated list");
    CLI::App* validate = app.add_subcommand("validate", "check scattering ratios against reference values");
    add_problem(validate);
    CLI::App* strength = app.add_subcommand("strength", "group connection-strength matrix");
    add_problem(strength);
    CLI::App* analyze = app.add_subcommand("analyze", "infinite-medium SI spectral radius");
    add_problem(analyze);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(o);
        }
        if (table->parsed()) {
            return cmd_sweep_table(o);
        }
        if (validate->parsed()) {
            return cmd_validate(o);
        }
        if (strength->parsed()) {
            return cmd_strength(o);
        }
        return cmd_analyze(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const mlsm::ProblemError& e) {
        std::cerr << "problem error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
