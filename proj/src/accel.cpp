#include "mlsm/accel.hpp"

#include <algorithm>
#include <cmath>

namespace mlsm {

std::pair<double, double> aa1_alpha(std::span<const double> r_prev, std::span<const double> r_curr)
{
    if (r_prev.size() != r_curr.size()) {
        throw std::invalid_argument("aa1_alpha: length mismatch");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < r_curr.size(); ++i) {
        const double d = r_prev[i] - r_curr[i];
        num -= r_curr[i] * d;
        den += d * d;
    }
    if (!(den > 0.0)) {
        throw DegenerateAAError("aa1_alpha: identical residuals");
    }
    const double a0 = num / den;
    return {a0, 1.0 - a0};
}

void AAState::push(std::vector<double> x, std::vector<double> Ax)
{
    if (x.size() != Ax.size() || (!history.empty() && history.front().x.size() != x.size())) {
        throw std::invalid_argument("AAState::push: length mismatch");
    }
    history.push_back({std::move(x), std::move(Ax)});
    while (history.size() > m + 1) {
        history.pop_front();
    }
}

namespace {

// Solves the small dense SPD-ish system in place; false when (near) singular.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b)
{
    const std::size_t n = b.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(a[i][i]));
    }
    if (!(scale > 0.0)) {
        return false;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) {
                p = r;
            }
        }
        if (std::abs(a[p][c]) <= 1e-14 * scale) {
            return false;
        }
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double l = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) {
                a[r][k] -= l * a[c][k];
            }
            b[r] -= l * b[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < n; ++k) {
            s -= a[c][k] * b[k];
        }
        b[c] = s / a[c][c];
    }
    return true;
}

}  // namespace

std::vector<double> aa_step(AAState& state, std::span<const double> x_curr, std::span<const double> Ax_curr)
{
    state.push(std::vector<double>(x_curr.begin(), x_curr.end()),
               std::vector<double>(Ax_curr.begin(), Ax_curr.end()));
    const std::size_t n = x_curr.size();
    const std::size_t cols = state.history.size() - 1;
    if (cols == 0) {
        return state.history.back().Ax;
    }
    if (!state.weights.empty() && state.weights.size() != n) {
        throw std::invalid_argument("aa_step: weight length mismatch");
    }
    auto weight = [&](std::size_t i) { return state.weights.empty() ? 1.0 : state.weights[i]; };

    // Residual differences dR_j = r_{j+1} - r_j (oldest first).
    std::vector<std::vector<double>> dR(cols, std::vector<double>(n));
    std::vector<double> r_last(n);
    for (std::size_t j = 0; j <= cols; ++j) {
        const auto& e = state.history[j];
        for (std::size_t i = 0; i < n; ++i) {
            const double r = e.Ax[i] - e.x[i];
            if (j < cols) {
                dR[j][i] -= r;
            }
            if (j > 0) {
                dR[j - 1][i] += r;
            }
            if (j == cols) {
                r_last[i] = r;
            }
        }
    }

    std::vector<std::vector<double>> normal(cols, std::vector<double>(cols, 0.0));
    std::vector<double> rhs(cols, 0.0);
    for (std::size_t a = 0; a < cols; ++a) {
        for (std::size_t i = 0; i < n; ++i) {
            const double w = weight(i) * weight(i);
            rhs[a] += w * dR[a][i] * r_last[i];
            for (std::size_t b = a; b < cols; ++b) {
                normal[a][b] += w * dR[a][i] * dR[b][i];
            }
        }
        for (std::size_t b = 0; b < a; ++b) {
            normal[a][b] = normal[b][a];
        }
    }
    std::vector<double> gamma = rhs;
    if (!solve_dense(normal, gamma)) {
        ++state.fallbacks;
        return state.history.back().Ax;
    }

    // alpha_j on history entries: alpha_last = 1 - gamma_last, etc.
    std::vector<double> alpha(cols + 1, 0.0);
    alpha[cols] = 1.0;
    for (std::size_t j = 0; j < cols; ++j) {
        alpha[j + 1] -= gamma[j];
        alpha[j] += gamma[j];
    }
    for (double a : alpha) {
        state.max_abs_alpha = std::max(state.max_abs_alpha, std::abs(a));
    }

    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j <= cols; ++j) {
        const auto& e = state.history[j];
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += alpha[j] * ((1.0 - state.beta) * e.x[i] + state.beta * e.Ax[i]);
        }
    }
    return out;
}

std::vector<double> flatten_state(const GroupState& s)
{
    if (s.phi.size() != s.J.size() || s.phi.empty()) {
        throw std::invalid_argument("flatten_state: group count mismatch");
    }
    const std::size_t n = s.phi.front().size();
    std::vector<double> v;
    v.reserve(s.phi.size() * n * 4);
    for (std::size_t g = 0; g < s.phi.size(); ++g) {
        if (s.phi[g].size() != n || s.J[g].size() != n) {
            throw std::invalid_argument("flatten_state: cell count mismatch");
        }
        for (std::size_t i = 0; i < n; ++i) {
            v.push_back(s.phi[g].avg[i]);
            v.push_back(s.J[g].avg[i]);
            v.push_back(s.phi[g].slope[i]);
            v.push_back(s.J[g].slope[i]);
        }
    }
    return v;
}

GroupState unflatten_state(std::span<const double> v, std::size_t groups, const Mesh& mesh)
{
    const std::size_t n = mesh.n_cells;
    if (v.size() != groups * n * 4) {
        throw std::invalid_argument("unflatten_state: length mismatch");
    }
    GroupState s{std::vector<LDField>(groups, LDField(mesh)), std::vector<LDField>(groups, LDField(mesh))};
    std::size_t k = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t i = 0; i < n; ++i) {
            s.phi[g].avg[i] = v[k++];
            s.J[g].avg[i] = v[k++];
            s.phi[g].slope[i] = v[k++];
            s.J[g].slope[i] = v[k++];
        }
    }
    return s;
}

std::vector<double> state_weights(std::size_t groups, std::size_t n_cells, double w_J)
{
    std::vector<double> w(groups * n_cells * 4, 1.0);
    for (std::size_t k = 1; k < w.size(); k += 2) {
        w[k] = w_J;
    }
    return w;
}

}  // namespace mlsm
