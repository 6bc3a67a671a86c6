#include "mlsm/angular.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlsm {

GaussRule gauss_legendre(std::size_t n)
{
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: n must be >= 1");
    }
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Newton on P_n starting from the Chebyshev-like estimate of root i.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pnm1 = (n == 1) ? 1.0 : p0;
            dp = static_cast<double>(n) * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double kk = static_cast<double>(k);
            const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
            p0 = p1;
            p1 = p2;
        }
        const double pn = (n == 1) ? x : p1;
        const double pnm1 = (n == 1) ? 1.0 : p0;
        dp = static_cast<double>(n) * (x * pn - pnm1) / (x * x - 1.0);
        const double wt = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        rule.w[i] = wt;
        rule.w[n - 1 - i] = wt;
    }
    if (n % 2 == 1) {
        rule.x[n / 2] = 0.0;
    }
    return rule;
}

AngularQuadrature build_double_gauss(std::size_t n_half)
{
    if (n_half < 1) {
        throw std::invalid_argument("build_double_gauss: n_half must be >= 1");
    }
    const GaussRule rule = gauss_legendre(n_half);
    AngularQuadrature q;
    q.mu.resize(2 * n_half);
    q.w.resize(2 * n_half);
    // Map [-1,1] -> (0,1): mu = (x+1)/2, weight w/2. Mirror for (-1,0).
    for (std::size_t i = 0; i < n_half; ++i) {
        const double mu = 0.5 * (rule.x[i] + 1.0);
        const double w = 0.5 * rule.w[i];
        q.mu[n_half + i] = mu;
        q.w[n_half + i] = w;
        q.mu[n_half - 1 - i] = -mu;
        q.w[n_half - 1 - i] = w;
    }
    return q;
}

MomentSet angular_moments(std::span<const LDField> psi, const AngularQuadrature& quad)
{
    if (psi.size() != quad.size()) {
        throw std::invalid_argument("angular_moments: direction count mismatch");
    }
    if (psi.empty()) {
        throw std::invalid_argument("angular_moments: no directions");
    }
    const Mesh& mesh = psi.front().mesh;
    MomentSet m{LDField(mesh), LDField(mesh), LDField(mesh)};
    // Fixed direction order for reproducible sums.
    for (std::size_t d = 0; d < quad.size(); ++d) {
        require_same_mesh(psi[d], m.phi, "angular_moments");
        const double w = quad.w[d];
        const double wmu = w * quad.mu[d];
        const double wp = w * (1.0 / 3.0 - quad.mu[d] * quad.mu[d]);
        for (std::size_t i = 0; i < mesh.n_cells; ++i) {
            m.phi.avg[i] += w * psi[d].avg[i];
            m.phi.slope[i] += w * psi[d].slope[i];
            m.J.avg[i] += wmu * psi[d].avg[i];
            m.J.slope[i] += wmu * psi[d].slope[i];
            m.P.avg[i] += wp * psi[d].avg[i];
            m.P.slope[i] += wp * psi[d].slope[i];
        }
    }
    return m;
}

}  // namespace mlsm
