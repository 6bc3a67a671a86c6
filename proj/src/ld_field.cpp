#include "mlsm/ld_field.hpp"

#include <cmath>

namespace mlsm {

LDField& LDField::operator+=(const LDField& o)
{
    require_same_mesh(*this, o, "LDField::operator+=");
    for (std::size_t i = 0; i < avg.size(); ++i) {
        avg[i] += o.avg[i];
        slope[i] += o.slope[i];
    }
    return *this;
}

LDField& LDField::operator*=(double a)
{
    for (std::size_t i = 0; i < avg.size(); ++i) {
        avg[i] *= a;
        slope[i] *= a;
    }
    return *this;
}

LDField operator+(LDField a, const LDField& b)
{
    a += b;
    return a;
}

LDField operator*(double s, LDField a)
{
    a *= s;
    return a;
}

void require_same_mesh(const LDField& a, const LDField& b, const char* what)
{
    if (!(a.mesh == b.mesh) || a.size() != b.size()) {
        throw std::invalid_argument(std::string(what) + ": mesh mismatch");
    }
}

LDField project_product(const LDField& a, const LDField& b)
{
    require_same_mesh(a, b, "project_product");
    LDField out(a.mesh);
    for (std::size_t i = 0; i < a.size(); ++i) {
        // (a0 + a1 xi)(b0 + b1 xi): <xi^2> = 1/3 and the xi^3 term has no first moment.
        out.avg[i] = a.avg[i] * b.avg[i] + a.slope[i] * b.slope[i] / 3.0;
        out.slope[i] = a.avg[i] * b.slope[i] + a.slope[i] * b.avg[i];
    }
    return out;
}

namespace {

template <class Fallback>
LDField ratio_impl(const LDField& num, const LDField& den, Fallback fallback, double tiny)
{
    require_same_mesh(num, den, "project_ratio");
    LDField out(num.mesh);
    for (std::size_t i = 0; i < num.size(); ++i) {
        const double da = den.avg[i];
        const double ds = den.slope[i];
        const double det = da * da - ds * ds / 3.0;
        if (std::abs(da) < tiny || det <= 1e-12 * da * da) {
            out.avg[i] = fallback(i);
            out.slope[i] = 0.0;
            continue;
        }
        out.avg[i] = (num.avg[i] * da - num.slope[i] * ds / 3.0) / det;
        out.slope[i] = (num.slope[i] * da - num.avg[i] * ds) / det;
    }
    return out;
}

}  // namespace

LDField project_ratio(const LDField& num, const LDField& den, double fallback, double tiny)
{
    return ratio_impl(num, den, [fallback](std::size_t) { return fallback; }, tiny);
}

LDField project_ratio(const LDField& num, const LDField& den, const std::vector<double>& fallback,
                      double tiny)
{
    if (fallback.size() != num.size()) {
        throw std::invalid_argument("project_ratio: fallback size mismatch");
    }
    return ratio_impl(num, den, [&fallback](std::size_t i) { return fallback[i]; }, tiny);
}

}  // namespace mlsm
