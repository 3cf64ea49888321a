#include "regsub/tridiagonal.hpp"

#include <stdexcept>

namespace regsub {

TridiagonalLU::TridiagonalLU(std::span<const double> lower, std::span<const double> diag,
                             std::span<const double> upper)
{
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n || upper.size() != n)
        throw std::invalid_argument("tridiagonal: inconsistent band sizes");
    lower_.assign(lower.begin(), lower.end());
    pivot_.resize(n);
    upper_ratio_.assign(n, 0.0);

    pivot_[0] = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0)
            pivot_[i] = diag[i] - lower[i] * upper_ratio_[i - 1];
        if (pivot_[i] == 0.0)
            throw std::runtime_error("tridiagonal: zero pivot");
        if (i + 1 < n)
            upper_ratio_[i] = upper[i] / pivot_[i];
    }
}

void TridiagonalLU::solve(std::span<double> rhs) const
{
    const std::size_t n = pivot_.size();
    if (rhs.size() != n)
        throw std::invalid_argument("tridiagonal: rhs size mismatch");
    rhs[0] /= pivot_[0];
    for (std::size_t i = 1; i < n; ++i)
        rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) / pivot_[i];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] -= upper_ratio_[i] * rhs[i + 1];
}

}  // namespace regsub
