#pragma once

#include <memory>
#include <span>
#include <vector>

#include "regsub/discrete_form.hpp"

namespace regsub {

enum class Scheme {
    CrankNicolson,
    /// Dense spectral exponential of the symmetrized generator; at most
    /// kExactSmallLimit states.
    ExactSmall
};

inline constexpr std::size_t kExactSmallLimit = 64;
inline constexpr double kDefaultMaxStep = 1e-3;

/// T_t = exp(t L) for a DiscreteForm. Immutable; evolve() is thread-safe.
class SemigroupEvolver {
public:
    explicit SemigroupEvolver(DiscreteForm form, Scheme scheme = Scheme::CrankNicolson,
                              double max_step = kDefaultMaxStep);
    ~SemigroupEvolver();
    SemigroupEvolver(SemigroupEvolver&&) noexcept;
    SemigroupEvolver& operator=(SemigroupEvolver&&) noexcept;

    /// T_t f on states. T_0 f = f exactly; throws for t < 0 or non-finite f.
    /// Crank–Nicolson uses dt = min(max_step, t/100), shrunk to divide t;
    /// the first two steps are replaced by four implicit Euler half steps.
    std::vector<double> evolve(std::span<const double> f, double t) const;

    const DiscreteForm& form() const { return form_; }
    Scheme scheme() const { return scheme_; }
    double max_step() const { return max_step_; }

private:
    struct Spectral;

    std::vector<double> evolve_cn(std::span<const double> f, double t) const;
    std::vector<double> evolve_exact(std::span<const double> f, double t) const;

    DiscreteForm form_;
    Scheme scheme_;
    double max_step_;
    std::unique_ptr<Spectral> spectral_;
};

/// (Σ m_i (u_i - v_i)²)^{1/2}.
double l2m_distance(std::span<const double> masses, std::span<const double> u,
                    std::span<const double> v);

double l2m_norm(std::span<const double> masses, std::span<const double> u);

}  // namespace regsub
