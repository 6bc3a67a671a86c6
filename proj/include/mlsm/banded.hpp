#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mlsm {

/// Raised when elimination meets a zero pivot; `row` is the failing equation.
class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, std::size_t row)
        : std::runtime_error(what), row_(row) {}
    [[nodiscard]] std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Square band matrix with kl sub- and ku super-diagonals, factored in place
/// by Gaussian elimination with partial pivoting (LAPACK gbtrf layout: the
/// factor needs kl extra super-diagonals for fill-in).
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] std::size_t lower() const { return kl_; }
    [[nodiscard]] std::size_t upper() const { return ku_; }

    /// Element access inside the band; throws std::out_of_range otherwise.
    double& operator()(std::size_t row, std::size_t col);
    [[nodiscard]] double operator()(std::size_t row, std::size_t col) const;
    [[nodiscard]] bool in_band(std::size_t row, std::size_t col) const;

    /// y = A x (must be called before factor()).
    void multiply(std::span<const double> x, std::span<double> y) const;

    void factor();
    [[nodiscard]] bool factored() const { return factored_; }

    /// Solves A x = b in place; factors first if needed.
    void solve(std::span<double> b);

private:
    [[nodiscard]] std::size_t index(std::size_t row, std::size_t col) const;

    std::size_t n_;
    std::size_t kl_;
    std::size_t ku_;
    std::size_t ld_;  // rows of band storage: 2 kl + ku + 1
    std::vector<double> ab_;
    std::vector<std::size_t> piv_;
    bool factored_ = false;
};

}  // namespace mlsm
