#include "mlsm/sweep.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace mlsm {

LDField sweep_direction(double mu, double sigma_t, const LDField& rhs, double incoming)
{
    if (mu == 0.0) {
        throw std::invalid_argument("sweep_direction: mu must be nonzero");
    }
    const Mesh& mesh = rhs.mesh;
    const std::size_t n = mesh.n_cells;
    const double a = std::abs(mu) / mesh.dx();
    const double s = mu > 0.0 ? 1.0 : -1.0;

    // Cell system in the upwind-oriented slope y = s * psi_slope:
    //   (a + sigma) avg + a y            = q_avg + a psi_in
    //   -3a avg + (3a + sigma) y         = s q_slope - 3a psi_in
    const double m00 = a + sigma_t;
    const double m01 = a;
    const double m10 = -3.0 * a;
    const double m11 = 3.0 * a + sigma_t;
    const double det = m00 * m11 - m01 * m10;
    assert(det > 0.0);

    LDField psi(mesh);
    double inflow = incoming;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = mu > 0.0 ? k : n - 1 - k;
        const double b0 = rhs.avg[i] + a * inflow;
        const double b1 = s * rhs.slope[i] - 3.0 * a * inflow;
        const double ya = (m11 * b0 - m01 * b1) / det;
        const double yx = (m00 * b1 - m10 * b0) / det;
        psi.avg[i] = ya;
        psi.slope[i] = s * yx;
        inflow = ya + yx;
    }
    return psi;
}

std::vector<LDField> sweep_group(const GroupSweepInput& input)
{
    if (input.quad == nullptr) {
        throw std::invalid_argument("sweep_group: missing quadrature");
    }
    if (!(input.sigma_t > 0.0)) {
        throw std::invalid_argument("sweep_group: sigma_t must be positive");
    }
    const AngularQuadrature& quad = *input.quad;
    if (!input.incoming.empty() && input.incoming.size() != quad.size()) {
        throw std::invalid_argument("sweep_group: incoming flux size mismatch");
    }
    std::vector<LDField> psi;
    psi.reserve(quad.size());
    for (std::size_t d = 0; d < quad.size(); ++d) {
        const double inflow = input.incoming.empty() ? 0.0 : input.incoming[d];
        psi.push_back(sweep_direction(quad.mu[d], input.sigma_t, input.rhs, inflow));
    }
    return psi;
}

LDField build_ho_rhs(const LDField& grey_phi, const LDField& sbar_s_g, double source_g)
{
    LDField rhs = project_product(sbar_s_g, grey_phi);
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        rhs.avg[i] = 0.5 * rhs.avg[i] + 0.5 * source_g;
        rhs.slope[i] *= 0.5;
    }
    return rhs;
}

double upwind_edge_value(const LDField& psi_d, double mu, std::size_t edge, double incoming)
{
    const std::size_t n = psi_d.size();
    if (mu > 0.0) {
        return edge == 0 ? incoming : psi_d.right_trace(edge - 1);
    }
    return edge == n ? incoming : psi_d.left_trace(edge);
}

double sweep_leakage(const std::vector<LDField>& psi, const AngularQuadrature& quad)
{
    const std::size_t n = psi.front().size();
    double right = 0.0;
    double left = 0.0;
    for (std::size_t d = 0; d < quad.size(); ++d) {
        right += quad.w[d] * quad.mu[d] * upwind_edge_value(psi[d], quad.mu[d], n);
        left += quad.w[d] * quad.mu[d] * upwind_edge_value(psi[d], quad.mu[d], 0);
    }
    return right - left;
}

}  // namespace mlsm
