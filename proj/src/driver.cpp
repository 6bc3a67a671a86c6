#include "mlsm/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mlsm/accel.hpp"
#include "mlsm/angular.hpp"
#include "mlsm/losm.hpp"
#include "mlsm/parallel.hpp"
#include "mlsm/sweep.hpp"

namespace mlsm {

std::string to_string(Method m)
{
    switch (m) {
    case Method::SI:
        return "si";
    case Method::MLSM:
        return "mlsm";
    case Method::MLSM_AA1:
        return "mlsm-aa1";
    }
    return "unknown";
}

std::string to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::converged:
        return "converged";
    case RunStatus::max_outer:
        return "max_outer";
    case RunStatus::diverged:
        return "diverged";
    }
    return "unknown";
}

Method parse_method(const std::string& s)
{
    if (s == "si") {
        return Method::SI;
    }
    if (s == "mlsm") {
        return Method::MLSM;
    }
    if (s == "mlsm-aa1") {
        return Method::MLSM_AA1;
    }
    throw std::invalid_argument("unknown method '" + s + "'");
}

void IterationConfig::validate() const
{
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    if (max_outer < 1) {
        throw std::invalid_argument("max_outer must be >= 1");
    }
    if (method != Method::SI && (k_max < 1 || s_max < 1)) {
        throw std::invalid_argument("k_max and s_max must be >= 1");
    }
    if (!(irregular_spread > 0.0)) {
        throw std::invalid_argument("irregular_spread must be positive");
    }
}

std::size_t lo_solve_count(const IterationConfig& cfg)
{
    return cfg.k_max * (cfg.s_max + 1);
}

double convergence_measure(const LDField& phi_new, const LDField& phi_old, NormKind norm)
{
    require_same_mesh(phi_new, phi_old, "convergence_measure");
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < phi_new.size(); ++i) {
        diff = std::max(diff, std::abs(phi_new.avg[i] - phi_old.avg[i]));
        scale = std::max(scale, std::abs(phi_new.avg[i]));
    }
    if (norm == NormKind::relative && scale > 0.0) {
        return diff / scale;
    }
    return diff;
}

SpectralEstimate estimate_spectral_radius(std::span<const double> history, double irregular_spread)
{
    if (history.size() < 4) {
        throw std::invalid_argument("estimate_spectral_radius: need at least 4 entries");
    }
    const std::size_t n = std::min<std::size_t>(5, history.size() - 1);
    double log_sum = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t j = history.size() - n; j < history.size(); ++j) {
        if (!(history[j] > 0.0) || !(history[j - 1] > 0.0)) {
            throw std::invalid_argument("estimate_spectral_radius: entries must be positive");
        }
        const double r = history[j] / history[j - 1];
        log_sum += std::log(r);
        if (j == history.size() - n) {
            lo = hi = r;
        } else {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    SpectralEstimate est;
    est.value = std::exp(log_sum / static_cast<double>(n));
    est.spread = (hi - lo) / est.value;
    est.irregular = est.spread > irregular_spread;
    est.available = true;
    return est;
}

namespace {

using Clock = std::chrono::steady_clock;

Mesh problem_mesh(const ProblemSpec& spec)
{
    return Mesh{spec.width, spec.cells};
}

struct SweepResult {
    std::vector<MomentSet> moments;
    std::vector<LOClosure> closures;
};

SweepResult sweep_all(const ProblemSpec& spec, const AngularQuadrature& quad, const std::vector<LDField>& rhs,
                      unsigned workers)
{
    SweepResult out{std::vector<MomentSet>(spec.groups), std::vector<LOClosure>(spec.groups)};
    parallel_for(spec.groups, workers, [&](std::size_t g) {
        const std::vector<LDField> psi = sweep_group({spec.sigma_t[g], rhs[g], &quad, {}});
        out.moments[g] = angular_moments(psi, quad);
        out.closures[g] = compute_closure(psi, quad);
    });
    return out;
}

bool diverging(const std::vector<double>& h)
{
    if (!h.empty() && !std::isfinite(h.back())) {
        return true;
    }
    return h.size() > 10 && h.back() > 10.0 * h[h.size() - 11];
}

void finish(RunReport& r, const IterationConfig& cfg, Clock::time_point start)
{
    r.N_t = r.residual_history.size();
    if (r.residual_history.size() >= 4) {
        try {
            r.rho = estimate_spectral_radius(r.residual_history, cfg.irregular_spread);
        } catch (const std::invalid_argument&) {
            r.rho = SpectralEstimate{};
        }
    }
    r.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
}

// Returns true when the outer loop should stop.
bool record_outer(RunReport& r, const IterationConfig& cfg, double measure)
{
    r.residual_history.push_back(measure);
    if (measure <= cfg.epsilon) {
        r.status = RunStatus::converged;
        return true;
    }
    if (diverging(r.residual_history)) {
        r.status = RunStatus::diverged;
        return true;
    }
    if (r.residual_history.size() >= cfg.max_outer) {
        r.status = RunStatus::max_outer;
        return true;
    }
    return false;
}

RunReport run_multilevel(const ProblemSpec& spec, const IterationConfig& cfg, bool accelerate)
{
    validate(spec);
    cfg.validate();
    const auto start = Clock::now();
    const unsigned workers = resolve_workers(cfg.threads);
    const Mesh mesh = problem_mesh(spec);
    const AngularQuadrature quad = build_double_gauss(spec.quad_half_order);
    const std::size_t G = spec.groups;

    RunReport report;
    report.method = accelerate ? Method::MLSM_AA1 : Method::MLSM;
    report.k_max = cfg.k_max;
    report.s_max = cfg.s_max;
    report.M_lo = lo_solve_count(cfg);

    GroupState state{std::vector<LDField>(G, LDField(mesh, 1.0)), std::vector<LDField>(G, LDField(mesh))};
    LOFrozen frozen;
    frozen.spec = &spec;
    frozen.grey_phi = sum_fields(state.phi);
    frozen.P.assign(G, LDField(mesh));
    frozen.closures.assign(G, LOClosure::zero(mesh.n_cells));
    frozen.workers = workers;
    LDField grey_J(mesh);
    std::vector<LDField> transport_phi(G, LDField(mesh, 1.0));
    std::vector<LDField> transport_J(G, LDField(mesh));

    LOClosure grey_closure = LOClosure::zero(mesh.n_cells);
    GreyCoefficients grey;

    AAState aa(cfg.aa_m, cfg.aa_beta);
    if (cfg.aa_weight_J != 1.0) {
        aa.weights = state_weights(G, mesh.n_cells, cfg.aa_weight_J);
    }

    for (std::size_t ell = 0;; ++ell) {
        const LDField old = frozen.grey_phi;
        std::size_t lo_solves = 0;
        if (ell > 0) {
            const std::vector<LDField> sbar = avg_scattering_xs(state.phi, spec.sigma_s);
            std::vector<LDField> rhs(G);
            for (std::size_t g = 0; g < G; ++g) {
                rhs[g] = build_ho_rhs(frozen.grey_phi, sbar[g], spec.source[g]);
            }
            SweepResult sw = sweep_all(spec, quad, rhs, workers);
            report.counters.sweeps += G;
            grey_closure = LOClosure::zero(mesh.n_cells);
            for (std::size_t g = 0; g < G; ++g) {
                transport_phi[g] = sw.moments[g].phi;
                transport_J[g] = sw.moments[g].J;
                state.phi[g] = sw.moments[g].phi;
                state.J[g] = sw.moments[g].J;
                frozen.P[g] = std::move(sw.moments[g].P);
                grey_closure += sw.closures[g];
                frozen.closures[g] = std::move(sw.closures[g]);
            }
        }

        for (std::size_t k = 0; k < cfg.k_max; ++k) {
            if (!accelerate) {
                for (std::size_t s = 0; s < cfg.s_max; ++s) {
                    state = losm_pass(state, frozen);
                    ++lo_solves;
                }
            } else {
                std::vector<double> x_prev = flatten_state(state);
                std::vector<double> r_prev = losm_block_residual(state, frozen);
                aa.reset();
                std::vector<double> Ax_prev = x_prev;
                for (std::size_t i = 0; i < Ax_prev.size(); ++i) {
                    Ax_prev[i] += r_prev[i];
                }
                aa.push(std::move(x_prev), std::move(Ax_prev));
                for (std::size_t s = 0; s < cfg.s_max; ++s) {
                    const GroupState hat = losm_pass(state, frozen);
                    ++lo_solves;
                    const std::vector<double> x_hat = flatten_state(hat);
                    const std::vector<double> r_hat = losm_block_residual(hat, frozen);
                    std::vector<double> Ax_hat = x_hat;
                    for (std::size_t i = 0; i < Ax_hat.size(); ++i) {
                        Ax_hat[i] += r_hat[i];
                    }
                    state = unflatten_state(aa_step(aa, x_hat, Ax_hat), G, mesh);
                }
            }
            report.counters.group_passes += cfg.s_max;
            grey = grey_xs(state.phi, state.J, frozen.P, spec);
            const LOSolution sol = solve_grey_losm(grey, grey_closure);
            ++lo_solves;
            ++report.counters.grey_solves;
            frozen.grey_phi = sol.phi;
            grey_J = sol.J;
        }

        if (ell == 0) {
            continue;
        }
        report.counters.lo_solves.push_back(lo_solves);
        if (record_outer(report, cfg, convergence_measure(frozen.grey_phi, old, cfg.norm))) {
            break;
        }
    }

    const LOSolution final_grey{frozen.grey_phi, grey_J};
    double absorbed = 0.0;
    double emitted = 0.0;
    const LDField absorption = project_product(grey.sbar_a, frozen.grey_phi);
    for (std::size_t i = 0; i < mesh.n_cells; ++i) {
        absorbed += absorption.avg[i] * mesh.dx();
        emitted += grey.Q.avg[i] * mesh.dx();
    }
    const double leak = lo_leakage(final_grey, grey_closure);
    report.grey_balance = std::abs(leak + absorbed - emitted) / (emitted != 0.0 ? std::abs(emitted) : 1.0);

    report.aa_fallbacks = aa.fallbacks;
    report.aa_max_abs_alpha = aa.max_abs_alpha;
    report.grey_phi = frozen.grey_phi;
    report.grey_J = grey_J;
    report.group_phi = std::move(state.phi);
    report.group_J = std::move(state.J);
    report.transport_phi = std::move(transport_phi);
    report.transport_J = std::move(transport_J);
    finish(report, cfg, start);
    return report;
}

}  // namespace

RunReport run_mlsm(const ProblemSpec& spec, const IterationConfig& cfg)
{
    if (cfg.method != Method::MLSM) {
        throw std::invalid_argument("run_mlsm: method must be mlsm");
    }
    return run_multilevel(spec, cfg, false);
}

RunReport run_mlsm_aa1(const ProblemSpec& spec, const IterationConfig& cfg)
{
    if (cfg.method != Method::MLSM_AA1) {
        throw std::invalid_argument("run_mlsm_aa1: method must be mlsm-aa1");
    }
    return run_multilevel(spec, cfg, true);
}

RunReport run_source_iteration(const ProblemSpec& spec, const IterationConfig& cfg)
{
    if (cfg.method != Method::SI) {
        throw std::invalid_argument("run_source_iteration: method must be si");
    }
    validate(spec);
    cfg.validate();
    const auto start = Clock::now();
    const unsigned workers = resolve_workers(cfg.threads);
    const Mesh mesh = problem_mesh(spec);
    const AngularQuadrature quad = build_double_gauss(spec.quad_half_order);
    const std::size_t G = spec.groups;

    RunReport report;
    report.method = Method::SI;
    std::vector<LDField> phi(G, LDField(mesh));
    std::vector<LDField> J(G, LDField(mesh));
    LDField grey = sum_fields(phi);

    while (true) {
        std::vector<LDField> rhs(G, LDField(mesh));
        for (std::size_t g = 0; g < G; ++g) {
            for (std::size_t gp = 0; gp < G; ++gp) {
                if (spec.sigma_s[g][gp] != 0.0) {
                    rhs[g] += spec.sigma_s[g][gp] * phi[gp];
                }
            }
            for (auto& v : rhs[g].avg) {
                v += spec.source[g];
            }
            rhs[g] *= 0.5;
        }
        SweepResult sw = sweep_all(spec, quad, rhs, workers);
        report.counters.sweeps += G;
        report.counters.lo_solves.push_back(0);
        for (std::size_t g = 0; g < G; ++g) {
            phi[g] = std::move(sw.moments[g].phi);
            J[g] = std::move(sw.moments[g].J);
        }
        const LDField next = sum_fields(phi);
        const double measure = convergence_measure(next, grey, cfg.norm);
        grey = next;
        if (record_outer(report, cfg, measure)) {
            break;
        }
    }

    report.grey_phi = grey;
    report.grey_J = sum_fields(J);
    report.group_phi = phi;
    report.group_J = J;
    report.transport_phi = std::move(phi);
    report.transport_J = std::move(J);
    finish(report, cfg, start);
    return report;
}

RunReport run(const ProblemSpec& spec, const IterationConfig& cfg)
{
    switch (cfg.method) {
    case Method::SI:
        return run_source_iteration(spec, cfg);
    case Method::MLSM:
        return run_mlsm(spec, cfg);
    case Method::MLSM_AA1:
        return run_mlsm_aa1(spec, cfg);
    }
    throw std::invalid_argument("unknown method");
}

InfiniteMediumRho si_infinite_medium_rho(const ProblemSpec& spec)
{
    validate(spec);
    const std::size_t G = spec.groups;
    std::vector<std::vector<double>> M(G, std::vector<double>(G));
    for (std::size_t g = 0; g < G; ++g) {
        for (std::size_t gp = 0; gp < G; ++gp) {
            M[g][gp] = spec.sigma_s[g][gp] / spec.sigma_t[g];
        }
    }
    auto apply = [&](const std::vector<double>& v) {
        std::vector<double> y(G, 0.0);
        for (std::size_t g = 0; g < G; ++g) {
            for (std::size_t gp = 0; gp < G; ++gp) {
                y[g] += M[g][gp] * v[gp];
            }
        }
        return y;
    };
    auto norm_inf = [](const std::vector<double>& v) {
        double n = 0.0;
        for (double x : v) {
            n = std::max(n, std::abs(x));
        }
        return n;
    };

    InfiniteMediumRho out;
    std::vector<double> v(G, 1.0);
    double lambda = 0.0;
    constexpr std::size_t max_steps = 100000;
    for (std::size_t it = 1; it <= max_steps; ++it) {
        std::vector<double> y = apply(v);
        const double n = norm_inf(y);
        out.iterations = it;
        if (n == 0.0) {
            out.rho = 0.0;
            out.power_converged = true;
            return out;
        }
        for (double& x : y) {
            x /= n;
        }
        v = std::move(y);
        if (std::abs(n - lambda) <= 1e-10 * n) {
            out.rho = n;
            out.power_converged = true;
            return out;
        }
        lambda = n;
    }

    // Gelfand estimate ||M^(2^k)||^(1/2^k) by repeated squaring.
    auto multiply = [&](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
        std::vector<std::vector<double>> c(G, std::vector<double>(G, 0.0));
        for (std::size_t i = 0; i < G; ++i) {
            for (std::size_t k = 0; k < G; ++k) {
                for (std::size_t j = 0; j < G; ++j) {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        return c;
    };
    // M^(2^k) = exp(log_norm) * P with ||P|| = 1.
    std::vector<std::vector<double>> P = M;
    double log_norm = 0.0;
    double power = 1.0;
    for (int k = 0; k < 40; ++k) {
        double n = 0.0;
        for (const auto& row : P) {
            double s = 0.0;
            for (double x : row) {
                s += std::abs(x);
            }
            n = std::max(n, s);
        }
        if (n == 0.0) {
            out.rho = 0.0;
            return out;
        }
        for (auto& row : P) {
            for (double& x : row) {
                x /= n;
            }
        }
        log_norm += std::log(n);
        out.rho = std::exp(log_norm / power);
        P = multiply(P, P);
        log_norm *= 2.0;
        power *= 2.0;
    }
    out.power_converged = false;
    return out;
}

}  // namespace mlsm
