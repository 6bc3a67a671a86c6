#include "mlsm/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlsm {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1), ab_(ld_ * n, 0.0), piv_(n, 0)
{
    if (n == 0) {
        throw std::invalid_argument("BandedMatrix: empty system");
    }
}

// Column-major band storage: A(r,c) lives at ab_[c*ld_ + kl_ + ku_ + r - c].
std::size_t BandedMatrix::index(std::size_t row, std::size_t col) const
{
    return col * ld_ + kl_ + ku_ + row - col;
}

bool BandedMatrix::in_band(std::size_t row, std::size_t col) const
{
    return row < n_ && col < n_ && row <= col + kl_ && col <= row + ku_;
}

double& BandedMatrix::operator()(std::size_t row, std::size_t col)
{
    if (!in_band(row, col)) {
        throw std::out_of_range("BandedMatrix: (" + std::to_string(row) + "," + std::to_string(col) +
                                ") outside band");
    }
    return ab_[index(row, col)];
}

double BandedMatrix::operator()(std::size_t row, std::size_t col) const
{
    if (!in_band(row, col)) {
        return 0.0;
    }
    return ab_[index(row, col)];
}

void BandedMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    if (factored_) {
        throw std::logic_error("BandedMatrix::multiply after factor");
    }
    if (x.size() != n_ || y.size() != n_) {
        throw std::invalid_argument("BandedMatrix::multiply: size mismatch");
    }
    for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t c0 = r > kl_ ? r - kl_ : 0;
        const std::size_t c1 = std::min(n_ - 1, r + ku_);
        double sum = 0.0;
        for (std::size_t c = c0; c <= c1; ++c) {
            sum += ab_[index(r, c)] * x[c];
        }
        y[r] = sum;
    }
}

void BandedMatrix::factor()
{
    if (factored_) {
        return;
    }
    const std::size_t kv = ku_ + kl_;  // upper bandwidth of U after pivoting
    auto at = [&](std::size_t r, std::size_t c) -> double& { return ab_[index(r, c)]; };

    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t last = std::min(n_ - 1, j + kl_);
        std::size_t p = j;
        double best = std::abs(at(j, j));
        for (std::size_t r = j + 1; r <= last; ++r) {
            if (std::abs(at(r, j)) > best) {
                best = std::abs(at(r, j));
                p = r;
            }
        }
        piv_[j] = p;
        if (best == 0.0 || !std::isfinite(best)) {
            throw SingularSystemError("banded solve: zero pivot at row " + std::to_string(j), j);
        }
        const std::size_t cmax = std::min(n_ - 1, j + kv);
        if (p != j) {
            for (std::size_t c = j; c <= cmax; ++c) {
                std::swap(at(j, c), at(p, c));
            }
        }
        const double inv = 1.0 / at(j, j);
        for (std::size_t r = j + 1; r <= last; ++r) {
            const double l = at(r, j) * inv;
            at(r, j) = l;
            if (l == 0.0) {
                continue;
            }
            for (std::size_t c = j + 1; c <= cmax; ++c) {
                at(r, c) -= l * at(j, c);
            }
        }
    }
    factored_ = true;
}

void BandedMatrix::solve(std::span<double> b)
{
    if (b.size() != n_) {
        throw std::invalid_argument("BandedMatrix::solve: size mismatch");
    }
    factor();
    const std::size_t kv = ku_ + kl_;
    for (std::size_t j = 0; j < n_; ++j) {
        if (piv_[j] != j) {
            std::swap(b[j], b[piv_[j]]);
        }
        const std::size_t last = std::min(n_ - 1, j + kl_);
        for (std::size_t r = j + 1; r <= last; ++r) {
            b[r] -= ab_[index(r, j)] * b[j];
        }
    }
    for (std::size_t jj = n_; jj-- > 0;) {
        const std::size_t cmax = std::min(n_ - 1, jj + kv);
        double sum = b[jj];
        for (std::size_t c = jj + 1; c <= cmax; ++c) {
            sum -= ab_[index(jj, c)] * b[c];
        }
        b[jj] = sum / ab_[index(jj, jj)];
    }
}

}  // namespace mlsm
