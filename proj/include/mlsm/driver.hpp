#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlsm/ld_field.hpp"
#include "mlsm/problem.hpp"

namespace mlsm {

enum class Method { SI, MLSM, MLSM_AA1 };
enum class NormKind { absolute, relative };
enum class RunStatus { converged, max_outer, diverged };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] std::string to_string(RunStatus s);
/// Accepts "si", "mlsm", "mlsm-aa1" (case-sensitive). Throws std::invalid_argument.
[[nodiscard]] Method parse_method(const std::string& s);

struct IterationConfig {
    Method method = Method::MLSM;
    std::size_t k_max = 1;
    std::size_t s_max = 1;
    double epsilon = 1e-9;
    std::size_t max_outer = 1000;
    std::size_t aa_m = 1;
    double aa_beta = 1.0;
    double aa_weight_J = 1.0;
    unsigned threads = 1;  ///< 0 means hardware concurrency
    NormKind norm = NormKind::absolute;
    double irregular_spread = 0.25;

    /// Throws std::invalid_argument on nonpositive epsilon or caps.
    void validate() const;
};

struct SpectralEstimate {
    double value = 0.0;
    bool irregular = false;
    bool available = false;
    double spread = 0.0;
};

struct RunCounters {
    std::vector<std::size_t> lo_solves;  ///< per transport iteration, groups passes + grey solves
    std::size_t group_passes = 0;
    std::size_t grey_solves = 0;
    std::size_t sweeps = 0;  ///< group sweeps
};

struct RunReport {
    Method method = Method::MLSM;
    std::size_t k_max = 0;
    std::size_t s_max = 0;
    std::size_t N_t = 0;
    SpectralEstimate rho;
    std::size_t M_lo = 0;
    std::vector<double> residual_history;
    RunStatus status = RunStatus::max_outer;
    double wall_seconds = 0.0;
    RunCounters counters;
    std::size_t aa_fallbacks = 0;
    double aa_max_abs_alpha = 0.0;

    LDField grey_phi;
    LDField grey_J;
    std::vector<LDField> group_phi;
    std::vector<LDField> group_J;
    std::vector<LDField> transport_phi;
    std::vector<LDField> transport_J;

    /// |J(X) - J(0) + sum sigma_a phi dx - sum Q dx| / sum Q dx of the final grey solve.
    double grey_balance = 0.0;
};

[[nodiscard]] RunReport run_mlsm(const ProblemSpec& spec, const IterationConfig& cfg);
[[nodiscard]] RunReport run_mlsm_aa1(const ProblemSpec& spec, const IterationConfig& cfg);
[[nodiscard]] RunReport run_source_iteration(const ProblemSpec& spec, const IterationConfig& cfg);
/// Dispatches on cfg.method.
[[nodiscard]] RunReport run(const ProblemSpec& spec, const IterationConfig& cfg);

/// Infinity norm of the change in cell averages; relative divides by ||phi_new||
/// unless that vanishes.
[[nodiscard]] double convergence_measure(const LDField& phi_new, const LDField& phi_old,
                                         NormKind norm = NormKind::relative);

/// Geometric mean of the last min(5, n-1) successive ratios. Needs at least 4
/// positive entries; throws std::invalid_argument otherwise.
[[nodiscard]] SpectralEstimate estimate_spectral_radius(std::span<const double> history,
                                                        double irregular_spread = 0.25);

struct InfiniteMediumRho {
    double rho = 0.0;
    std::size_t iterations = 0;
    bool power_converged = false;
};

/// Spectral radius of diag(sigma_t)^-1 S by power iteration.
[[nodiscard]] InfiniteMediumRho si_infinite_medium_rho(const ProblemSpec& spec);

[[nodiscard]] std::size_t lo_solve_count(const IterationConfig& cfg);

}  // namespace mlsm
