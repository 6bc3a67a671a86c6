#pragma once

#include <span>
#include <vector>

#include "mlsm/angular.hpp"
#include "mlsm/banded.hpp"
#include "mlsm/ld_field.hpp"
#include "mlsm/problem.hpp"

namespace mlsm {

/// Edge data frozen from the latest transport sweep for one group (or their
/// group sum for the grey problem). Edges are indexed 0..n_cells.
///
/// The low-order edge moments are closed with the half-range P1 expressions
///   phi_e = 1/2 phi_L + 3/4 J_L + 1/2 phi_R - 3/4 J_R + phi_corr[e]
///   J_e   = 1/4 phi_L + 1/2 J_L - 1/4 phi_R + 1/2 J_R + J_corr[e]
/// where L/R are the cell traces on either side (absent at the boundaries).
/// The corrections make these exact for the transport solution.
struct LOClosure {
    std::vector<double> phi_corr;
    std::vector<double> J_corr;
    std::vector<double> P_edge;  ///< upwind second-moment closure at edges
    std::vector<double> phi_edge;  ///< transport edge moments (diagnostics)
    std::vector<double> J_edge;

    /// All-zero closure: Marshak-like conditions and P = 0.
    [[nodiscard]] static LOClosure zero(std::size_t n_cells);
    LOClosure& operator+=(const LOClosure& o);
};

/// Boundary form C = J - n phi / 2 (n = -1 left, +1 right) of the closure.
struct LOBoundaryClosure {
    double left = 0.0;
    double right = 0.0;
};

[[nodiscard]] LOClosure compute_closure(std::span<const LDField> psi, const AngularQuadrature& quad);
[[nodiscard]] LOBoundaryClosure boundary_closure(const LOClosure& closure);

/// phi and J of one low-order solve.
struct LOSolution {
    LDField phi;
    LDField J;
};

/// Coefficients of the generic LD-consistent low-order system
///   dJ/dx + P[reaction phi] = source
///   1/3 dphi/dx + sigma_j J + P[drift phi] = dP/dx
struct LOCoefficients {
    LDField reaction;
    std::vector<double> sigma_j;
    LDField drift;
};

/// Band matrix (4 unknowns per cell: phi avg, phi slope, J avg, J slope).
[[nodiscard]] BandedMatrix assemble_lo_matrix(const LOCoefficients& coeffs);
[[nodiscard]] std::vector<double> assemble_lo_rhs(const LDField& source, const LDField& P,
                                                  const LOClosure& closure);
[[nodiscard]] LOSolution solve_lo_system(const LOCoefficients& coeffs, const LDField& source,
                                         const LDField& P, const LOClosure& closure);

/// Cell-major packing (phi_a, phi_x, J_a, J_x) per cell used by the LO matrix.
[[nodiscard]] std::vector<double> pack_lo(const LOSolution& sol);
[[nodiscard]] LOSolution unpack_lo(std::span<const double> x, const Mesh& mesh);

/// Average scattering cross sections sigma-bar_{s,g} weighted by group fluxes.
[[nodiscard]] std::vector<LDField> avg_scattering_xs(std::span<const LDField> phi_groups,
                                                     const std::vector<std::vector<double>>& sigma_s);

/// zeta = grey phi / sum_g phi_g (1 where the sum vanishes).
[[nodiscard]] LDField compute_zeta(const LDField& grey_phi, std::span<const LDField> phi_groups);

[[nodiscard]] LDField sum_fields(std::span<const LDField> fields);

/// Group LOSM with lagged group-to-group coupling scaled by zeta.
[[nodiscard]] LOSolution solve_group_losm(const ProblemSpec& spec, std::size_t g, const LDField& zeta,
                                          std::span<const LDField> phi_lag, const LDField& P_g,
                                          const LOClosure& closure);

struct GreyCoefficients {
    LDField sbar_a;
    LDField sbar_t;  ///< cell-constant
    LDField eta;
    LDField P;
    LDField Q;
};

[[nodiscard]] GreyCoefficients grey_xs(std::span<const LDField> phi_groups, std::span<const LDField> J_groups,
                                       std::span<const LDField> P_groups, const ProblemSpec& spec);

[[nodiscard]] LOSolution solve_grey_losm(const GreyCoefficients& coeffs, const LOClosure& closure);

/// Data held fixed across one inner multigroup pass.
struct LOFrozen {
    const ProblemSpec* spec = nullptr;
    LDField grey_phi;                  ///< for zeta
    std::vector<LDField> P;            ///< per group
    std::vector<LOClosure> closures;   ///< per group
    unsigned workers = 1;
};

/// Per-group state (phi_g, J_g) of the multigroup low-order problem.
struct GroupState {
    std::vector<LDField> phi;
    std::vector<LDField> J;
};

/// One parallel pass of solve_group_losm over all groups, coupling lagged at `in`.
[[nodiscard]] GroupState losm_pass(const GroupState& in, const LOFrozen& frozen);

/// Fixed-point residual A(x) - x in flattened order (costs one pass).
[[nodiscard]] std::vector<double> losm_residual(const GroupState& in, const LOFrozen& frozen);

/// Equation residual b(x) - M x of every group's LOSM system with coupling and
/// zeta evaluated at x, preconditioned by each cell's own 4x4 block of M.
/// Flattened order; zero exactly when x is a fixed point of losm_pass.
[[nodiscard]] std::vector<double> losm_block_residual(const GroupState& in, const LOFrozen& frozen);

/// Boundary leakage J(X) - J(0) of an LO solution under its closure.
[[nodiscard]] double lo_leakage(const LOSolution& sol, const LOClosure& closure);

}  // namespace mlsm
