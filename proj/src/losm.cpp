#include "mlsm/losm.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mlsm/accel.hpp"
#include "mlsm/parallel.hpp"
#include "mlsm/sweep.hpp"

namespace mlsm {

namespace {

constexpr std::size_t kUnknownsPerCell = 4;
constexpr std::size_t kBand = 7;

enum Unknown : std::size_t { kPhiAvg = 0, kPhiSlope = 1, kJAvg = 2, kJSlope = 3 };

std::size_t unknown(std::size_t cell, Unknown u) { return kUnknownsPerCell * cell + u; }

// Linear part of the edge closure: phi_e and J_e as combinations of the
// cell unknowns adjacent to edge e.
struct EdgeTerm {
    std::size_t col;
    double phi;
    double J;
};

struct EdgeStencil {
    std::array<EdgeTerm, 8> terms{};
    std::size_t count = 0;

    void add(std::size_t col, double phi, double J) { terms[count++] = {col, phi, J}; }
};

EdgeStencil edge_stencil(std::size_t edge, std::size_t n_cells)
{
    EdgeStencil st;
    if (edge > 0) {
        // Right trace of the left cell: avg + slope, outgoing half-range P1 moments.
        const std::size_t L = edge - 1;
        st.add(unknown(L, kPhiAvg), 0.5, 0.25);
        st.add(unknown(L, kPhiSlope), 0.5, 0.25);
        st.add(unknown(L, kJAvg), 0.75, 0.5);
        st.add(unknown(L, kJSlope), 0.75, 0.5);
    }
    if (edge < n_cells) {
        // Left trace of the right cell: avg - slope.
        const std::size_t R = edge;
        st.add(unknown(R, kPhiAvg), 0.5, -0.25);
        st.add(unknown(R, kPhiSlope), -0.5, 0.25);
        st.add(unknown(R, kJAvg), -0.75, 0.5);
        st.add(unknown(R, kJSlope), 0.75, -0.5);
    }
    return st;
}

void check_closure(const LOClosure& c, std::size_t n_cells)
{
    const std::size_t ne = n_cells + 1;
    if (c.phi_corr.size() != ne || c.J_corr.size() != ne || c.P_edge.size() != ne) {
        throw std::invalid_argument("LO closure size does not match mesh");
    }
}

double trace_phi_pred(double phi_tr, double j_tr, bool from_left)
{
    return from_left ? 0.5 * phi_tr + 0.75 * j_tr : 0.5 * phi_tr - 0.75 * j_tr;
}

double trace_J_pred(double phi_tr, double j_tr, bool from_left)
{
    return from_left ? 0.25 * phi_tr + 0.5 * j_tr : -0.25 * phi_tr + 0.5 * j_tr;
}

}  // namespace

LOClosure LOClosure::zero(std::size_t n_cells)
{
    LOClosure c;
    c.phi_corr.assign(n_cells + 1, 0.0);
    c.J_corr.assign(n_cells + 1, 0.0);
    c.P_edge.assign(n_cells + 1, 0.0);
    c.phi_edge.assign(n_cells + 1, 0.0);
    c.J_edge.assign(n_cells + 1, 0.0);
    return c;
}

LOClosure& LOClosure::operator+=(const LOClosure& o)
{
    if (o.phi_corr.size() != phi_corr.size()) {
        throw std::invalid_argument("LOClosure::operator+=: size mismatch");
    }
    for (std::size_t e = 0; e < phi_corr.size(); ++e) {
        phi_corr[e] += o.phi_corr[e];
        J_corr[e] += o.J_corr[e];
        P_edge[e] += o.P_edge[e];
        phi_edge[e] += o.phi_edge[e];
        J_edge[e] += o.J_edge[e];
    }
    return *this;
}

LOClosure compute_closure(std::span<const LDField> psi, const AngularQuadrature& quad)
{
    if (psi.size() != quad.size() || psi.empty()) {
        throw std::invalid_argument("compute_closure: direction count mismatch");
    }
    const std::size_t n = psi.front().size();
    LOClosure c = LOClosure::zero(n);
    for (std::size_t e = 0; e <= n; ++e) {
        double phi_l = 0.0, j_l = 0.0, phi_r = 0.0, j_r = 0.0;
        for (std::size_t d = 0; d < quad.size(); ++d) {
            const double w = quad.w[d];
            const double mu = quad.mu[d];
            const double up = upwind_edge_value(psi[d], mu, e);
            c.phi_edge[e] += w * up;
            c.J_edge[e] += w * mu * up;
            c.P_edge[e] += w * (1.0 / 3.0 - mu * mu) * up;
            if (e > 0) {
                const double tr = psi[d].right_trace(e - 1);
                phi_l += w * tr;
                j_l += w * mu * tr;
            }
            if (e < n) {
                const double tr = psi[d].left_trace(e);
                phi_r += w * tr;
                j_r += w * mu * tr;
            }
        }
        double phi_pred = 0.0;
        double j_pred = 0.0;
        if (e > 0) {
            phi_pred += trace_phi_pred(phi_l, j_l, true);
            j_pred += trace_J_pred(phi_l, j_l, true);
        }
        if (e < n) {
            phi_pred += trace_phi_pred(phi_r, j_r, false);
            j_pred += trace_J_pred(phi_r, j_r, false);
        }
        c.phi_corr[e] = c.phi_edge[e] - phi_pred;
        c.J_corr[e] = c.J_edge[e] - j_pred;
    }
    return c;
}

LOBoundaryClosure boundary_closure(const LOClosure& closure)
{
    const std::size_t n = closure.phi_edge.size() - 1;
    return {closure.J_edge[0] + 0.5 * closure.phi_edge[0], closure.J_edge[n] - 0.5 * closure.phi_edge[n]};
}

BandedMatrix assemble_lo_matrix(const LOCoefficients& coeffs)
{
    const Mesh& mesh = coeffs.reaction.mesh;
    const std::size_t n = mesh.n_cells;
    if (coeffs.sigma_j.size() != n) {
        throw std::invalid_argument("assemble_lo_matrix: sigma_j size mismatch");
    }
    require_same_mesh(coeffs.reaction, coeffs.drift, "assemble_lo_matrix");
    const double dx = mesh.dx();
    BandedMatrix A(kUnknownsPerCell * n, kBand, kBand);

    std::vector<EdgeStencil> edges;
    edges.reserve(n + 1);
    for (std::size_t e = 0; e <= n; ++e) {
        edges.push_back(edge_stencil(e, n));
    }

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r0 = unknown(i, kPhiAvg);
        const std::size_t r1 = unknown(i, kPhiSlope);
        const std::size_t r2 = unknown(i, kJAvg);
        const std::size_t r3 = unknown(i, kJSlope);
        const EdgeStencil& left = edges[i];
        const EdgeStencil& right = edges[i + 1];

        // Zeroth-moment balance and slope equations: edge currents.
        for (std::size_t t = 0; t < right.count; ++t) {
            const auto& term = right.terms[t];
            A(r0, term.col) += term.J / dx;
            A(r1, term.col) += 3.0 * term.J / dx;
            A(r2, term.col) += term.phi / (3.0 * dx);
            A(r3, term.col) += term.phi / dx;
        }
        for (std::size_t t = 0; t < left.count; ++t) {
            const auto& term = left.terms[t];
            A(r0, term.col) -= term.J / dx;
            A(r1, term.col) += 3.0 * term.J / dx;
            A(r2, term.col) -= term.phi / (3.0 * dx);
            A(r3, term.col) += term.phi / dx;
        }
        A(r1, unknown(i, kJAvg)) -= 6.0 / dx;
        A(r3, unknown(i, kPhiAvg)) -= 2.0 / dx;

        const double ra = coeffs.reaction.avg[i];
        const double rx = coeffs.reaction.slope[i];
        A(r0, unknown(i, kPhiAvg)) += ra;
        A(r0, unknown(i, kPhiSlope)) += rx / 3.0;
        A(r1, unknown(i, kPhiSlope)) += ra;
        A(r1, unknown(i, kPhiAvg)) += rx;

        A(r2, unknown(i, kJAvg)) += coeffs.sigma_j[i];
        A(r3, unknown(i, kJSlope)) += coeffs.sigma_j[i];

        const double ea = coeffs.drift.avg[i];
        const double ex = coeffs.drift.slope[i];
        A(r2, unknown(i, kPhiAvg)) += ea;
        A(r2, unknown(i, kPhiSlope)) += ex / 3.0;
        A(r3, unknown(i, kPhiSlope)) += ea;
        A(r3, unknown(i, kPhiAvg)) += ex;
    }
    return A;
}

std::vector<double> assemble_lo_rhs(const LDField& source, const LDField& P, const LOClosure& closure)
{
    require_same_mesh(source, P, "assemble_lo_rhs");
    const std::size_t n = source.size();
    check_closure(closure, n);
    const double dx = source.mesh.dx();
    const auto& G = closure.J_corr;
    const auto& F = closure.phi_corr;
    const auto& Pe = closure.P_edge;
    std::vector<double> b(kUnknownsPerCell * n);
    for (std::size_t i = 0; i < n; ++i) {
        b[unknown(i, kPhiAvg)] = source.avg[i] - (G[i + 1] - G[i]) / dx;
        b[unknown(i, kPhiSlope)] = source.slope[i] - 3.0 * (G[i + 1] + G[i]) / dx;
        b[unknown(i, kJAvg)] = (Pe[i + 1] - Pe[i]) / dx - (F[i + 1] - F[i]) / (3.0 * dx);
        b[unknown(i, kJSlope)] = 3.0 * (Pe[i + 1] + Pe[i] - 2.0 * P.avg[i]) / dx - (F[i + 1] + F[i]) / dx;
    }
    return b;
}

std::vector<double> pack_lo(const LOSolution& sol)
{
    const std::size_t n = sol.phi.size();
    std::vector<double> x(kUnknownsPerCell * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[unknown(i, kPhiAvg)] = sol.phi.avg[i];
        x[unknown(i, kPhiSlope)] = sol.phi.slope[i];
        x[unknown(i, kJAvg)] = sol.J.avg[i];
        x[unknown(i, kJSlope)] = sol.J.slope[i];
    }
    return x;
}

LOSolution unpack_lo(std::span<const double> x, const Mesh& mesh)
{
    if (x.size() != kUnknownsPerCell * mesh.n_cells) {
        throw std::invalid_argument("unpack_lo: size mismatch");
    }
    LOSolution sol{LDField(mesh), LDField(mesh)};
    for (std::size_t i = 0; i < mesh.n_cells; ++i) {
        sol.phi.avg[i] = x[unknown(i, kPhiAvg)];
        sol.phi.slope[i] = x[unknown(i, kPhiSlope)];
        sol.J.avg[i] = x[unknown(i, kJAvg)];
        sol.J.slope[i] = x[unknown(i, kJSlope)];
    }
    return sol;
}

LOSolution solve_lo_system(const LOCoefficients& coeffs, const LDField& source, const LDField& P,
                           const LOClosure& closure)
{
    BandedMatrix A = assemble_lo_matrix(coeffs);
    std::vector<double> b = assemble_lo_rhs(source, P, closure);
    try {
        A.solve(b);
    } catch (const SingularSystemError& e) {
        const std::size_t cell = e.row() / kUnknownsPerCell;
        throw SingularSystemError("low-order system singular at cell " + std::to_string(cell), e.row());
    }
    return unpack_lo(b, source.mesh);
}

LDField sum_fields(std::span<const LDField> fields)
{
    if (fields.empty()) {
        throw std::invalid_argument("sum_fields: empty");
    }
    LDField s(fields.front().mesh);
    for (const auto& f : fields) {
        s += f;
    }
    return s;
}

std::vector<LDField> avg_scattering_xs(std::span<const LDField> phi_groups,
                                       const std::vector<std::vector<double>>& sigma_s)
{
    const std::size_t G = phi_groups.size();
    if (sigma_s.size() != G) {
        throw std::invalid_argument("avg_scattering_xs: group count mismatch");
    }
    const LDField den = sum_fields(phi_groups);
    std::vector<LDField> out;
    out.reserve(G);
    for (std::size_t g = 0; g < G; ++g) {
        LDField num(den.mesh);
        double mean = 0.0;
        for (std::size_t gp = 0; gp < G; ++gp) {
            num += sigma_s[g][gp] * phi_groups[gp];
            mean += sigma_s[g][gp];
        }
        out.push_back(project_ratio(num, den, mean / static_cast<double>(G)));
    }
    return out;
}

LDField compute_zeta(const LDField& grey_phi, std::span<const LDField> phi_groups)
{
    return project_ratio(grey_phi, sum_fields(phi_groups), 1.0);
}

LOSolution solve_group_losm(const ProblemSpec& spec, std::size_t g, const LDField& zeta,
                            std::span<const LDField> phi_lag, const LDField& P_g, const LOClosure& closure)
{
    if (g >= spec.groups || phi_lag.size() != spec.groups) {
        throw std::invalid_argument("solve_group_losm: group index or lagged flux count mismatch");
    }
    const double removal = spec.sigma_t[g] - spec.sigma_s[g][g];
    if (!(removal > 0.0)) {
        throw std::invalid_argument("solve_group_losm: sigma_t - sigma_gg must be positive in group " +
                                    std::to_string(g + 1));
    }
    const Mesh& mesh = zeta.mesh;
    LDField coupling(mesh);
    for (std::size_t gp = 0; gp < spec.groups; ++gp) {
        if (gp != g && spec.sigma_s[g][gp] != 0.0) {
            coupling += spec.sigma_s[g][gp] * phi_lag[gp];
        }
    }
    LDField source = project_product(zeta, coupling);
    for (auto& v : source.avg) {
        v += spec.source[g];
    }
    LOCoefficients coeffs{LDField(mesh, removal), std::vector<double>(mesh.n_cells, spec.sigma_t[g]),
                          LDField(mesh)};
    return solve_lo_system(coeffs, source, P_g, closure);
}

GreyCoefficients grey_xs(std::span<const LDField> phi_groups, std::span<const LDField> J_groups,
                         std::span<const LDField> P_groups, const ProblemSpec& spec)
{
    const std::size_t G = spec.groups;
    if (phi_groups.size() != G || J_groups.size() != G || P_groups.size() != G) {
        throw std::invalid_argument("grey_xs: group count mismatch");
    }
    const Mesh& mesh = phi_groups.front().mesh;
    const std::size_t n = mesh.n_cells;
    constexpr double tiny = 1e-30;

    const LDField phi_sum = sum_fields(phi_groups);
    const LDField J_sum = sum_fields(J_groups);

    LDField absorption(mesh);
    double sa_mean = 0.0;
    double st_mean = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
        absorption += spec.sigma_a(g) * phi_groups[g];
        sa_mean += spec.sigma_a(g);
        st_mean += spec.sigma_t[g];
    }
    sa_mean /= static_cast<double>(G);
    st_mean /= static_cast<double>(G);

    GreyCoefficients out;
    out.sbar_a = project_ratio(absorption, phi_sum, sa_mean);

    // |J_g|-weighted total cross section from cell averages.
    out.sbar_t = LDField(mesh);
    for (std::size_t i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0, num_phi = 0.0, den_phi = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            num += spec.sigma_t[g] * std::abs(J_groups[g].avg[i]);
            den += std::abs(J_groups[g].avg[i]);
            num_phi += spec.sigma_t[g] * phi_groups[g].avg[i];
            den_phi += phi_groups[g].avg[i];
        }
        if (std::abs(den) >= tiny) {
            out.sbar_t.avg[i] = num / den;
        } else if (std::abs(den_phi) >= tiny) {
            out.sbar_t.avg[i] = num_phi / den_phi;
        } else {
            out.sbar_t.avg[i] = st_mean;
        }
    }

    // eta: P[eta * sum phi_g] = sum_g sigma_t,g J_g - sbar_t sum_g J_g.
    LDField drift_num(mesh);
    for (std::size_t g = 0; g < G; ++g) {
        drift_num += spec.sigma_t[g] * J_groups[g];
    }
    for (std::size_t i = 0; i < n; ++i) {
        drift_num.avg[i] -= out.sbar_t.avg[i] * J_sum.avg[i];
        drift_num.slope[i] -= out.sbar_t.avg[i] * J_sum.slope[i];
    }
    out.eta = project_ratio(drift_num, phi_sum, 0.0);

    out.P = sum_fields(P_groups);
    double q = 0.0;
    for (double v : spec.source) {
        q += v;
    }
    out.Q = LDField(mesh, q);
    return out;
}

LOSolution solve_grey_losm(const GreyCoefficients& coeffs, const LOClosure& closure)
{
    LOCoefficients lo{coeffs.sbar_a, coeffs.sbar_t.avg, coeffs.eta};
    return solve_lo_system(lo, coeffs.Q, coeffs.P, closure);
}

GroupState losm_pass(const GroupState& in, const LOFrozen& frozen)
{
    const ProblemSpec& spec = *frozen.spec;
    const LDField zeta = compute_zeta(frozen.grey_phi, in.phi);
    GroupState out{std::vector<LDField>(spec.groups), std::vector<LDField>(spec.groups)};
    parallel_for(spec.groups, frozen.workers, [&](std::size_t g) {
        LOSolution sol = solve_group_losm(spec, g, zeta, in.phi, frozen.P[g], frozen.closures[g]);
        out.phi[g] = std::move(sol.phi);
        out.J[g] = std::move(sol.J);
    });
    return out;
}

std::vector<double> losm_residual(const GroupState& in, const LOFrozen& frozen)
{
    const GroupState next = losm_pass(in, frozen);
    std::vector<double> r = flatten_state(next);
    const std::vector<double> x = flatten_state(in);
    for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] -= x[k];
    }
    return r;
}

namespace {

// Solves the 4x4 system in place with partial pivoting.
void solve4(std::array<std::array<double, 4>, 4> m, std::array<double, 4>& b)
{
    for (std::size_t c = 0; c < 4; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < 4; ++r) {
            if (std::abs(m[r][c]) > std::abs(m[p][c])) {
                p = r;
            }
        }
        if (m[p][c] == 0.0) {
            throw SingularSystemError("singular cell block", c);
        }
        std::swap(m[p], m[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = c + 1; r < 4; ++r) {
            const double l = m[r][c] / m[c][c];
            for (std::size_t k = c; k < 4; ++k) {
                m[r][k] -= l * m[c][k];
            }
            b[r] -= l * b[c];
        }
    }
    for (std::size_t c = 4; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < 4; ++k) {
            s -= m[c][k] * b[k];
        }
        b[c] = s / m[c][c];
    }
}

}  // namespace

std::vector<double> losm_block_residual(const GroupState& in, const LOFrozen& frozen)
{
    const ProblemSpec& spec = *frozen.spec;
    const std::size_t G = spec.groups;
    const Mesh& mesh = in.phi.front().mesh;
    const std::size_t n = mesh.n_cells;
    const LDField zeta = compute_zeta(frozen.grey_phi, in.phi);

    GroupState res{std::vector<LDField>(G), std::vector<LDField>(G)};
    parallel_for(G, frozen.workers, [&](std::size_t g) {
        LDField coupling(mesh);
        for (std::size_t gp = 0; gp < G; ++gp) {
            if (gp != g && spec.sigma_s[g][gp] != 0.0) {
                coupling += spec.sigma_s[g][gp] * in.phi[gp];
            }
        }
        LDField source = project_product(zeta, coupling);
        for (auto& v : source.avg) {
            v += spec.source[g];
        }
        const double removal = spec.sigma_t[g] - spec.sigma_s[g][g];
        LOCoefficients coeffs{LDField(mesh, removal), std::vector<double>(n, spec.sigma_t[g]), LDField(mesh)};
        const BandedMatrix A = assemble_lo_matrix(coeffs);
        const std::vector<double> b = assemble_lo_rhs(source, frozen.P[g], frozen.closures[g]);
        const std::vector<double> x = pack_lo({in.phi[g], in.J[g]});
        std::vector<double> Ax(x.size());
        A.multiply(x, Ax);

        std::vector<double> r(x.size());
        for (std::size_t i = 0; i < n; ++i) {
            std::array<std::array<double, 4>, 4> block{};
            std::array<double, 4> local{};
            for (std::size_t a = 0; a < 4; ++a) {
                const std::size_t row = kUnknownsPerCell * i + a;
                local[a] = b[row] - Ax[row];
                for (std::size_t c = 0; c < 4; ++c) {
                    block[a][c] = A(row, kUnknownsPerCell * i + c);
                }
            }
            solve4(block, local);
            for (std::size_t a = 0; a < 4; ++a) {
                r[kUnknownsPerCell * i + a] = local[a];
            }
        }
        LOSolution sol = unpack_lo(r, mesh);
        res.phi[g] = std::move(sol.phi);
        res.J[g] = std::move(sol.J);
    });
    return flatten_state(res);
}

double lo_leakage(const LOSolution& sol, const LOClosure& closure)
{
    const std::size_t n = sol.phi.size();
    check_closure(closure, n);
    const std::vector<double> x = pack_lo(sol);
    auto edge_current = [&](std::size_t e) {
        const EdgeStencil st = edge_stencil(e, n);
        double J = closure.J_corr[e];
        for (std::size_t t = 0; t < st.count; ++t) {
            J += st.terms[t].J * x[st.terms[t].col];
        }
        return J;
    };
    return edge_current(n) - edge_current(0);
}

}  // namespace mlsm
