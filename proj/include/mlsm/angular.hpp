#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlsm/ld_field.hpp"

namespace mlsm {

/// Double Gauss-Legendre set: Gauss rule on (-1,0) and on (0,1), sorted by mu.
struct AngularQuadrature {
    std::vector<double> mu;
    std::vector<double> w;

    [[nodiscard]] std::size_t size() const { return mu.size(); }
};

/// n_half-point Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};
[[nodiscard]] GaussRule gauss_legendre(std::size_t n);

[[nodiscard]] AngularQuadrature build_double_gauss(std::size_t n_half);

/// Zeroth, first and second-moment (SM closure) angular moments.
struct MomentSet {
    LDField phi;
    LDField J;
    LDField P;
};

/// phi = sum w psi, J = sum w mu psi, P = sum w (1/3 - mu^2) psi, coefficient-wise.
[[nodiscard]] MomentSet angular_moments(std::span<const LDField> psi, const AngularQuadrature& quad);

}  // namespace mlsm
