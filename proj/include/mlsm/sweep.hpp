#pragma once

#include <vector>

#include "mlsm/angular.hpp"
#include "mlsm/ld_field.hpp"

namespace mlsm {

/// One group's decoupled high-order problem  mu dpsi/dx + sigma_t psi = rhs(x).
struct GroupSweepInput {
    double sigma_t = 1.0;
    LDField rhs;                    ///< isotropic source density per unit solid-angle measure dmu
    const AngularQuadrature* quad = nullptr;
    std::vector<double> incoming;   ///< per direction; empty means vacuum
};

/// Linear-discontinuous upwind solve for a single direction. `rhs` may be
/// direction-dependent here; `incoming` is the boundary value entering the slab.
[[nodiscard]] LDField sweep_direction(double mu, double sigma_t, const LDField& rhs, double incoming);

/// Per-direction angular flux, ordered like quad.mu.
[[nodiscard]] std::vector<LDField> sweep_group(const GroupSweepInput& input);

/// rhs = 1/2 P[sbar_s * grey_phi] + 1/2 Q_g.
[[nodiscard]] LDField build_ho_rhs(const LDField& grey_phi, const LDField& sbar_s_g, double source_g);

/// Upwind value of direction d's flux at edge e (0..n_cells); boundary inflow from `incoming`.
[[nodiscard]] double upwind_edge_value(const LDField& psi_d, double mu, std::size_t edge, double incoming = 0.0);

/// Net leakage J(X) - J(0) of a swept group with vacuum inflow.
[[nodiscard]] double sweep_leakage(const std::vector<LDField>& psi, const AngularQuadrature& quad);

}  // namespace mlsm
