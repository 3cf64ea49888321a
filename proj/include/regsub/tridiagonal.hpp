#pragma once

#include <span>
#include <vector>

namespace regsub {

/// LU factors of a tridiagonal matrix (Thomas algorithm without pivoting).
/// Intended for diagonally dominant systems, where no pivoting is needed.
///
/// Row i reads lower[i] x_{i-1} + diag[i] x_i + upper[i] x_{i+1};
/// lower[0] and upper[n-1] are ignored.
class TridiagonalLU {
public:
    TridiagonalLU(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper);

    /// Solves in place.
    void solve(std::span<double> rhs) const;
    std::size_t size() const { return pivot_.size(); }

private:
    std::vector<double> lower_;
    std::vector<double> pivot_;
    std::vector<double> upper_ratio_;
};

}  // namespace regsub
