// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
// followed by indented detail lines; exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mlsm/accel.hpp"
#include "mlsm/angular.hpp"
#include "mlsm/driver.hpp"
#include "mlsm/losm.hpp"
#include "mlsm/problem.hpp"
#include "mlsm/sweep.hpp"

using namespace mlsm;

namespace {

struct Criterion {
    std::string label;
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok     " : "FAILED ") + what);
    }
};

std::vector<Criterion> g_results;

std::string fmt(const char* f, ...)
{
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

IterationConfig config(Method m, std::size_t k, std::size_t s)
{
    IterationConfig c;
    c.method = m;
    c.k_max = k;
    c.s_max = s;
    return c;
}

std::string rho_text(const SpectralEstimate& r)
{
    if (!r.available) {
        return "none";
    }
    return fmt("%.3f%s (spread %.2f)", r.value, r.irregular ? " irregular" : "", r.spread);
}

struct TableEntry {
    Method method;
    std::size_t k, s;
    std::size_t N_t;
    double rho;
    std::size_t M_lo;
};

void check_entry(Criterion& c, const ProblemSpec& p, const TableEntry& e, std::size_t dn, double drho)
{
    const RunReport r = run(p, config(e.method, e.k, e.s));
    const bool n_ok = r.N_t + dn >= e.N_t && r.N_t <= e.N_t + dn;
    const bool rho_ok = r.rho.available && !r.rho.irregular && std::abs(r.rho.value - e.rho) <= drho + 1e-12;
    const bool m_ok = r.M_lo == e.M_lo;
    c.check(r.status == RunStatus::converged && n_ok && rho_ok && m_ok,
            fmt("%s %s k=%zu s=%zu: N_t %zu (want %zu+-%zu), rho %s (want %.2f+-%.2f), M_lo %zu (want %zu)",
                p.name.c_str(), to_string(e.method).c_str(), e.k, e.s, r.N_t, e.N_t, dn, rho_text(r.rho).c_str(),
                e.rho, drho, r.M_lo, e.M_lo));
}

void test1_table()
{
    Criterion c{"test1 iteration counts and convergence rates"};
    const ProblemSpec p = builtin_problem("test1");
    const TableEntry entries[] = {
        {Method::MLSM, 1, 1, 16, 0.20, 2},     {Method::MLSM, 1, 2, 15, 0.20, 3},
        {Method::MLSM, 2, 1, 15, 0.19, 4},     {Method::MLSM_AA1, 1, 1, 15, 0.20, 2},
        {Method::MLSM_AA1, 1, 2, 15, 0.20, 3},
    };
    for (const auto& e : entries) {
        check_entry(c, p, e, 2, 0.05);
    }
    g_results.push_back(c);
}

void test2_mlsm_table()
{
    Criterion c{"test2 mlsm iteration counts, rates and monotone trend"};
    const ProblemSpec p = builtin_problem("test2");
    const TableEntry entries[] = {
        {Method::MLSM, 1, 1, 31, 0.45, 2},
        {Method::MLSM, 1, 4, 20, 0.28, 5},
        {Method::MLSM, 2, 4, 15, 0.20, 10},
        {Method::MLSM, 5, 1, 15, 0.20, 10},
    };
    for (const auto& e : entries) {
        check_entry(c, p, e, 3, 0.06);
    }
    const std::size_t row_len[] = {6, 4, 3, 2, 1};
    for (std::size_t k = 1; k <= 5; ++k) {
        std::vector<std::size_t> counts;
        bool monotone = true;
        for (std::size_t s = 1; s <= row_len[k - 1]; ++s) {
            counts.push_back(run(p, config(Method::MLSM, k, s)).N_t);
            if (counts.size() > 1 && counts.back() > counts[counts.size() - 2]) {
                monotone = false;
            }
        }
        std::string list;
        for (std::size_t n : counts) {
            list += (list.empty() ? "" : " ") + std::to_string(n);
        }
        c.check(monotone, fmt("k=%zu N_t over s=1..%zu nonincreasing: %s", k, row_len[k - 1], list.c_str()));
    }
    g_results.push_back(c);
}

void test2_aa_table()
{
    Criterion c{"test2 mlsm-aa1 iteration counts and irregular case"};
    const ProblemSpec p = builtin_problem("test2");
    check_entry(c, p, {Method::MLSM_AA1, 1, 2, 18, 0.27, 3}, 3, 0.06);
    {
        const RunReport r = run(p, config(Method::MLSM_AA1, 2, 2));
        c.check(r.status == RunStatus::converged && r.N_t >= 13 && r.N_t <= 17 && r.M_lo == 6,
                fmt("test2 mlsm-aa1 k=2 s=2: N_t %zu (want 15+-2), M_lo %zu (want 6), rho %s", r.N_t, r.M_lo,
                    rho_text(r.rho).c_str()));
    }
    {
        const RunReport r = run(p, config(Method::MLSM_AA1, 1, 1));
        c.check(r.rho.available && r.rho.irregular,
                fmt("test2 mlsm-aa1 k=1 s=1 flagged irregular: N_t %zu, rho %s", r.N_t, rho_text(r.rho).c_str()));
    }
    g_results.push_back(c);
}

void si_theory()
{
    Criterion c{"infinite-medium source iteration spectral radius"};
    const double want[] = {0.96, 0.98};
    const char* names[] = {"test1", "test2"};
    for (int i = 0; i < 2; ++i) {
        const InfiniteMediumRho r = si_infinite_medium_rho(builtin_problem(names[i]));
        c.check(r.power_converged && std::abs(r.rho - want[i]) <= 0.01,
                fmt("%s rho_th %.5f (want %.2f+-0.01), %zu power iterations", names[i], r.rho, want[i],
                    r.iterations));
    }
    g_results.push_back(c);
}

// Reference connection strengths at printed precision.
const std::vector<std::vector<double>> kStrength1 = {
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1., 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0.71, 1., 0, 0, 0, 0, 0, 0, 0, 0},
    {1., 0.53, 0.36, 0, 0, 0, 0, 0, 0, 0},
    {1., 0.21, 0.48, 1., 0, 0, 0, 0, 0, 0},
    {0, 0.78, 0.64, 1., 0.81, 0, 0, 0, 0, 0},
    {0, 0, 0.26, 0.09, 0.20, 0.48, 0, 1., 0.22, 0.23},
    {0, 0, 0, 0.91, 0.11, 0.25, 0.13, 0, 1., 0.88},
    {0, 0, 0, 0, 0.39, 0.29, 1., 0.78, 0, 0.62},
    {0, 0, 0, 0, 0, 0.41, 1., 0.55, 0.68, 0},
};

const std::vector<std::vector<double>> kStrength2 = {
    {0, 0, 0, 0, 0, 0, 0},
    {1., 0, 0, 0, 0, 0, 0},
    {5.5e-3, 1., 0, 0, 0, 0, 0},
    {1.7e-5, 2.8e-3, 1., 0, 3.2e-4, 0, 0},
    {1.3e-7, 1.2e-4, 4.1e-2, 1., 0, 5.3e-3, 0},
    {0, 1.5e-5, 5.2e-3, 1.3e-1, 1., 0, 2.6e-1},
    {0, 2.0e-6, 9.4e-4, 2.3e-2, 1.1e-1, 1., 0},
};

void strengths()
{
    Criterion c{"connection strengths and scattering ratios"};
    struct Case {
        const char* name;
        const std::vector<std::vector<double>>* ref;
        const char* format;
    };
    for (const Case& cs : {Case{"test1", &kStrength1, "%.2f"}, Case{"test2", &kStrength2, "%.1e"}}) {
        const auto S = connection_strength(builtin_problem(cs.name)).S;
        std::size_t mismatches = 0;
        std::string first;
        for (std::size_t g = 0; g < S.size(); ++g) {
            for (std::size_t gp = 0; gp < S.size(); ++gp) {
                const double ref = (*cs.ref)[g][gp];
                const bool ok = ref == 0.0 ? S[g][gp] == 0.0 : fmt(cs.format, S[g][gp]) == fmt(cs.format, ref);
                if (!ok) {
                    ++mismatches;
                    if (first.empty()) {
                        first = fmt(" first at (%zu,%zu): %g vs %g", g + 1, gp + 1, S[g][gp], ref);
                    }
                }
            }
        }
        c.check(mismatches == 0,
                fmt("%s strength matrix at printed precision: %zu mismatches%s", cs.name, mismatches, first.c_str()));
        const ValidationReport v = validate_scattering(builtin_problem(cs.name), builtin_reference_ratios(cs.name));
        c.check(v.passed, fmt("%s scattering ratios: max error %.2e (tolerance 1e-4)", cs.name, v.max_abs_error));
    }
    g_results.push_back(c);
}

double rel_gap(const LDField& a, const LDField& b)
{
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max({d, std::abs(a.avg[i] - b.avg[i]), std::abs(a.slope[i] - b.slope[i])});
        s = std::max(s, std::abs(a.avg[i]));
    }
    return d / s;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void properties()
{
    Criterion c{"property suite"};
    const double eps = 1e-9;
    const ProblemSpec t1 = builtin_problem("test1");
    const ProblemSpec t2 = builtin_problem("test2");

    {
        double worst = 0.0, zeta_dev = 0.0;
        for (const ProblemSpec* p : {&t1, &t2}) {
            for (Method m : {Method::MLSM, Method::MLSM_AA1}) {
                const RunReport r = run(*p, config(m, 1, 2));
                for (std::size_t g = 0; g < p->groups; ++g) {
                    worst = std::max({worst, rel_gap(r.group_phi[g], r.transport_phi[g]),
                                      rel_gap(r.group_J[g], r.transport_J[g])});
                }
                const LDField z = compute_zeta(r.grey_phi, r.group_phi);
                for (std::size_t i = 0; i < z.size(); ++i) {
                    zeta_dev = std::max({zeta_dev, std::abs(z.avg[i] - 1.0), std::abs(z.slope[i])});
                }
            }
        }
        c.check(worst <= 10 * eps && zeta_dev <= 10 * eps,
                fmt("consistency: max LO-transport gap %.2e, max |zeta-1| %.2e (limit %.0e)", worst, zeta_dev,
                    10 * eps));
    }
    {
        const RunReport si = run(t1, config(Method::SI, 1, 1));
        IterationConfig tight = config(Method::SI, 1, 1);
        tight.epsilon = 1e-13;
        const RunReport ref = run(t1, tight);
        const RunReport ml = run(t1, config(Method::MLSM, 1, 1));
        const RunReport aa = run(t1, config(Method::MLSM_AA1, 1, 1));
        const double g1 = rel_gap(ml.grey_phi, ref.grey_phi);
        const double g2 = rel_gap(aa.grey_phi, ref.grey_phi);
        const double g3 = rel_gap(ml.grey_phi, aa.grey_phi);
        c.check(ref.status == RunStatus::converged && si.status == RunStatus::converged &&
                    std::max({g1, g2, g3}) <= 100 * eps,
                fmt("fixed point: mlsm-si %.2e, aa-si %.2e, mlsm-aa %.2e (limit %.0e)", g1, g2, g3, 100 * eps));
    }
    {
        bool ok = true;
        for (Method m : {Method::SI, Method::MLSM, Method::MLSM_AA1}) {
            IterationConfig a = config(m, 2, 2);
            a.max_outer = 60;
            IterationConfig b = a;
            b.threads = 4;
            const RunReport ra = run(t2, a), rb = run(t2, b);
            ok = ok && ra.N_t == rb.N_t && same_bits(ra.residual_history, rb.residual_history) &&
                 same_bits(ra.grey_phi.avg, rb.grey_phi.avg) && same_bits(ra.grey_phi.slope, rb.grey_phi.slope);
        }
        c.check(ok, "determinism: 1 vs 4 workers bit-identical (si, mlsm, mlsm-aa1)");
    }
    {
        std::mt19937 rng(2024);
        std::uniform_real_distribution<double> ua(-0.99, 0.99), ub(-5.0, 5.0);
        std::normal_distribution<double> n01;
        double secant_err = 0.0;
        for (int t = 0; t < 100; ++t) {
            const double a = ua(rng), b = ub(rng), x0 = ub(rng);
            AAState st(1, 1.0);
            const auto x1 = aa_step(st, std::vector<double>{x0}, std::vector<double>{a * x0 + b});
            const auto x2 = aa_step(st, x1, std::vector<double>{a * x1[0] + b});
            secant_err = std::max(secant_err, std::abs(x2[0] - b / (1.0 - a)) / (1.0 + std::abs(b / (1.0 - a))));
        }
        bool projection = true;
        for (int t = 0; t < 200; ++t) {
            const std::size_t n = 1 + t % 23;
            std::vector<double> rp(n), rc(n);
            for (std::size_t i = 0; i < n; ++i) {
                rp[i] = n01(rng);
                rc[i] = n01(rng);
            }
            const auto [a0, a1] = aa1_alpha(rp, rc);
            double m = 0.0, np = 0.0, nc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                m += std::pow(a0 * rp[i] + a1 * rc[i], 2);
                np += rp[i] * rp[i];
                nc += rc[i] * rc[i];
            }
            projection = projection && m <= std::min(np, nc) * (1.0 + 1e-12);
        }
        c.check(secant_err < 1e-10 && projection,
                fmt("anderson: secant max rel error %.1e, projection inequality %s", secant_err,
                    projection ? "holds" : "violated"));
    }
    {
        const AngularQuadrature q = build_double_gauss(8);
        double exact_err = 0.0;
        for (int k = 0; k <= 15; ++k) {
            double pos = 0.0;
            for (std::size_t d = 0; d < q.size(); ++d) {
                if (q.mu[d] > 0.0) {
                    pos += q.w[d] * std::pow(q.mu[d], k);
                }
            }
            exact_err = std::max(exact_err, std::abs(pos - 1.0 / (k + 1)));
        }
        const Mesh m{1.0, 4};
        std::vector<LDField> psi;
        for (double mu : q.mu) {
            LDField f(m, 1.3 - 0.7 * mu);
            for (auto& s : f.slope) {
                s = 0.2 + 0.4 * mu;
            }
            psi.push_back(f);
        }
        const MomentSet mom = angular_moments(psi, q);
        double pmax = 0.0;
        for (std::size_t i = 0; i < m.n_cells; ++i) {
            pmax = std::max({pmax, std::abs(mom.P.avg[i]), std::abs(mom.P.slope[i])});
        }
        c.check(exact_err < 1e-13 && pmax < 1e-14,
                fmt("quadrature: half-range moment error %.1e, P of linear-in-mu flux %.1e", exact_err, pmax));
    }
    {
        double worst = 0.0;
        for (const ProblemSpec* p : {&t1, &t2}) {
            for (Method m : {Method::MLSM, Method::MLSM_AA1}) {
                worst = std::max(worst, run(*p, config(m, 2, 1)).grey_balance);
            }
        }
        c.check(worst <= 1e-8, fmt("balance: worst grey relative defect %.1e (limit 1e-8)", worst));
    }
    {
        const double sigma = 1.3, L = 3.0, mu = 0.6;
        auto exact = [&](double x) { return 2.0 + std::sin(2.0 * x); };
        auto source = [&](double x) { return 2.0 * mu * std::cos(2.0 * x) + sigma * exact(x); };
        const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
        const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        std::vector<double> errors;
        for (std::size_t n : {20u, 40u, 80u, 160u}) {
            const Mesh m{L, n};
            LDField rhs(m);
            for (std::size_t i = 0; i < n; ++i) {
                for (int k = 0; k < 3; ++k) {
                    const double x = m.center(i) + 0.5 * m.dx() * gx[k];
                    rhs.avg[i] += 0.5 * gw[k] * source(x);
                    rhs.slope[i] += 1.5 * gw[k] * gx[k] * source(x);
                }
            }
            const LDField psi = sweep_direction(mu, sigma, rhs, exact(0.0));
            double e = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (int k = 0; k < 3; ++k) {
                    const double x = m.center(i) + 0.5 * m.dx() * gx[k];
                    e += 0.5 * m.dx() * gw[k] * std::pow(psi.eval(i, gx[k]) - exact(x), 2);
                }
            }
            errors.push_back(std::sqrt(e));
        }
        double order = 1e9;
        for (std::size_t k = 1; k < errors.size(); ++k) {
            order = std::min(order, std::log2(errors[k - 1] / errors[k]));
        }
        c.check(order >= 2.0 - 0.05, fmt("manufactured solution: minimum observed L2 order %.3f", order));
    }
    g_results.push_back(c);
}

void solve_counts()
{
    Criterion c{"low-order solve counters"};
    struct Case {
        const char* name;
        Method m;
        std::size_t k, s;
    };
    for (const Case& cs : {Case{"test1", Method::MLSM, 1, 1}, Case{"test1", Method::MLSM_AA1, 1, 2},
                           Case{"test2", Method::MLSM, 2, 4}, Case{"test2", Method::MLSM, 5, 1},
                           Case{"test2", Method::MLSM_AA1, 2, 2}}) {
        const IterationConfig cfg = config(cs.m, cs.k, cs.s);
        const RunReport r = run(builtin_problem(cs.name), cfg);
        const std::size_t want = cs.k * (cs.s + 1);
        bool ok = r.M_lo == want && lo_solve_count(cfg) == want && r.counters.lo_solves.size() == r.N_t;
        for (std::size_t n : r.counters.lo_solves) {
            ok = ok && n == want;
        }
        c.check(ok, fmt("%s %s k=%zu s=%zu: %zu per transport iteration over %zu iterations", cs.name,
                        to_string(cs.m).c_str(), cs.k, cs.s, want, r.N_t));
    }
    g_results.push_back(c);
}

}  // namespace

int main()
{
    test1_table();
    test2_mlsm_table();
    test2_aa_table();
    si_theory();
    strengths();
    properties();
    solve_counts();

    int failed = 0;
    for (const auto& c : g_results) {
        std::printf("%s  %s\n", c.pass ? "PASS" : "FAIL", c.label.c_str());
        for (const auto& d : c.details) {
            std::printf("        %s\n", d.c_str());
        }
        failed += c.pass ? 0 : 1;
    }
    std::printf("%zu criteria, %d failed\n", g_results.size(), failed);
    return failed == 0 ? 0 : 1;
}
