#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mlsm {

/// Uniform 1D slab mesh on [0, width].
struct Mesh {
    double width = 1.0;
    std::size_t n_cells = 1;

    [[nodiscard]] double dx() const { return width / static_cast<double>(n_cells); }
    [[nodiscard]] double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
    [[nodiscard]] double left_edge(std::size_t i) const { return static_cast<double>(i) * dx(); }

    friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Linear-discontinuous function on a mesh.
///
/// On cell i the function is u(x) = avg[i] + slope[i] * xi with
/// xi = 2 (x - x_i) / dx in [-1, 1], so the cell edge traces are avg -/+ slope.
struct LDField {
    Mesh mesh;
    std::vector<double> avg;
    std::vector<double> slope;

    LDField() = default;
    explicit LDField(const Mesh& m, double value = 0.0)
        : mesh(m), avg(m.n_cells, value), slope(m.n_cells, 0.0) {}

    [[nodiscard]] std::size_t size() const { return avg.size(); }
    [[nodiscard]] double left_trace(std::size_t i) const { return avg[i] - slope[i]; }
    [[nodiscard]] double right_trace(std::size_t i) const { return avg[i] + slope[i]; }
    [[nodiscard]] double eval(std::size_t i, double xi) const { return avg[i] + slope[i] * xi; }

    LDField& operator+=(const LDField& o);
    LDField& operator*=(double a);
};

[[nodiscard]] LDField operator+(LDField a, const LDField& b);
[[nodiscard]] LDField operator*(double s, LDField a);

/// Throws std::invalid_argument when the two fields live on different meshes.
void require_same_mesh(const LDField& a, const LDField& b, const char* what);

/// L2 projection onto LD of the per-cell product of two LD functions.
/// Cell average and first moment of the quadratic product are preserved.
[[nodiscard]] LDField project_product(const LDField& a, const LDField& b);

/// Weighted-ratio field r with project_product(r, den) == num.
///
/// Solves the 2x2 Galerkin system per cell. Cells whose denominator average
/// magnitude is below `tiny`, or whose 2x2 system is near singular, get the
/// constant value `fallback` (slope zero), so the coefficient is bounded.
[[nodiscard]] LDField project_ratio(const LDField& num, const LDField& den, double fallback,
                                    double tiny = 1e-30);

/// Same as project_ratio but with a per-cell fallback value.
[[nodiscard]] LDField project_ratio(const LDField& num, const LDField& den,
                                    const std::vector<double>& fallback, double tiny = 1e-30);

}  // namespace mlsm
