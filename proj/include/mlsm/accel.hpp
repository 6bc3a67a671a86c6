#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mlsm/losm.hpp"

namespace mlsm {

class DegenerateAAError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-form AA(1) weights (alpha0 on r_prev, alpha1 = 1 - alpha0) minimizing
/// || alpha0 r_prev + alpha1 r_curr ||_2. Throws DegenerateAAError when r_prev == r_curr.
[[nodiscard]] std::pair<double, double> aa1_alpha(std::span<const double> r_prev, std::span<const double> r_curr);

/// Anderson mixing state for x <- A(x).
///
/// History keeps the last m+1 pairs (x_j, A(x_j)). Residuals r_j = A(x_j) - x_j
/// enter the least-squares with optional per-entry weights.
struct AAState {
    std::size_t m = 1;
    double beta = 1.0;
    std::vector<double> weights;  ///< empty means unit weights

    struct Entry {
        std::vector<double> x;
        std::vector<double> Ax;
    };
    std::deque<Entry> history;

    std::size_t fallbacks = 0;   ///< degenerate least-squares events
    double max_abs_alpha = 0.0;  ///< largest |alpha_j| seen

    AAState() = default;
    AAState(std::size_t depth, double mixing) : m(depth), beta(mixing) {}

    void reset() { history.clear(); }
    /// Appends a pair, dropping the oldest beyond m+1.
    void push(std::vector<double> x, std::vector<double> Ax);
};

/// Pushes (x_curr, Ax_curr) and returns the next iterate.
[[nodiscard]] std::vector<double> aa_step(AAState& state, std::span<const double> x_curr,
                                          std::span<const double> Ax_curr);

/// Group-major, then cell, then coefficient (avg, slope), phi before J.
[[nodiscard]] std::vector<double> flatten_state(const GroupState& s);
[[nodiscard]] GroupState unflatten_state(std::span<const double> v, std::size_t groups, const Mesh& mesh);

/// Per-entry weights in flatten_state order: 1 for phi, w_J for J.
[[nodiscard]] std::vector<double> state_weights(std::size_t groups, std::size_t n_cells, double w_J);

}  // namespace mlsm
