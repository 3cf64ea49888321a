#include "regsub/semigroup.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "regsub/tridiagonal.hpp"

namespace regsub {

struct SemigroupEvolver::Spectral {
    std::vector<std::size_t> free_states;
    Eigen::VectorXd sqrt_mass;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

SemigroupEvolver::SemigroupEvolver(DiscreteForm form, Scheme scheme, double max_step)
    : form_(std::move(form)), scheme_(scheme), max_step_(max_step)
{
    if (!(max_step_ > 0.0))
        throw std::invalid_argument("evolver: max_step must be positive");
    if (scheme_ != Scheme::ExactSmall)
        return;
    if (form_.size() > kExactSmallLimit)
        throw std::invalid_argument("evolver: exact_small is limited to 64 states");

    auto sp = std::make_unique<Spectral>();
    for (std::size_t j = 0; j < form_.size(); ++j)
        if (!form_.pinned()[j])
            sp->free_states.push_back(j);
    const auto n = static_cast<Eigen::Index>(sp->free_states.size());
    sp->sqrt_mass.resize(n);
    for (Eigen::Index a = 0; a < n; ++a)
        sp->sqrt_mass[a] = std::sqrt(form_.masses()[sp->free_states[static_cast<std::size_t>(a)]]);

    // D^{1/2} L D^{-1/2} restricted to free states is symmetric.
    Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(n, n);
    const auto& c = form_.conductances();
    for (Eigen::Index a = 0; a < n; ++a) {
        const std::size_t j = sp->free_states[static_cast<std::size_t>(a)];
        sym(a, a) = form_.diagonal()[j];
        if (a + 1 < n && sp->free_states[static_cast<std::size_t>(a + 1)] == j + 1) {
            const double off = c[j] / (sp->sqrt_mass[a] * sp->sqrt_mass[a + 1]);
            sym(a, a + 1) = off;
            sym(a + 1, a) = off;
        }
    }
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("evolver: eigendecomposition failed");
        sp->eigenvalues = solver.eigenvalues();
        sp->eigenvectors = solver.eigenvectors();
    }
    spectral_ = std::move(sp);
}

SemigroupEvolver::~SemigroupEvolver() = default;
SemigroupEvolver::SemigroupEvolver(SemigroupEvolver&&) noexcept = default;
SemigroupEvolver& SemigroupEvolver::operator=(SemigroupEvolver&&) noexcept = default;

std::vector<double> SemigroupEvolver::evolve(std::span<const double> f, double t) const
{
    if (f.size() != form_.size())
        throw std::invalid_argument("evolve: dimension mismatch");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("evolve: time must be finite and nonnegative");
    for (double v : f)
        if (!std::isfinite(v))
            throw std::invalid_argument("evolve: non-finite input");
    if (t == 0.0)
        return {f.begin(), f.end()};
    return scheme_ == Scheme::CrankNicolson ? evolve_cn(f, t) : evolve_exact(f, t);
}

std::vector<double> SemigroupEvolver::evolve_cn(std::span<const double> f, double t) const
{
    const double dt_target = std::min(max_step_, t / 100.0);
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt_target - 1e-9));
    const double half = 0.5 * (t / static_cast<double>(steps));

    const std::size_t S = form_.size();
    const auto& pinned = form_.pinned();
    const auto& sub = form_.sub_diagonal();
    const auto& diag = form_.diagonal();
    const auto& sup = form_.super_diagonal();

    std::vector<double> lower(S, 0.0), mid(S, 1.0), upper(S, 0.0);
    for (std::size_t j = 0; j < S; ++j) {
        if (pinned[j])
            continue;
        mid[j] = 1.0 - half * diag[j];
        if (j > 0 && !pinned[j - 1])
            lower[j] = -half * sub[j];
        if (j + 1 < S && !pinned[j + 1])
            upper[j] = -half * sup[j];
    }
    const TridiagonalLU lu(lower, mid, upper);

    std::vector<double> u(f.begin(), f.end());
    for (std::size_t j = 0; j < S; ++j)
        if (pinned[j])
            u[j] = 0.0;
    // Rannacher start: the first two steps are four implicit Euler half
    // steps, which share the matrix I - (dt/2) L.
    const std::size_t startup = std::min<std::size_t>(2, steps);
    for (std::size_t k = 0; k < 2 * startup; ++k)
        lu.solve(u);
    std::vector<double> rhs(S);
    for (std::size_t k = startup; k < steps; ++k) {
        for (std::size_t j = 0; j < S; ++j) {
            if (pinned[j]) {
                rhs[j] = 0.0;
                continue;
            }
            double acc = (1.0 + half * diag[j]) * u[j];
            if (j > 0 && !pinned[j - 1])
                acc += half * sub[j] * u[j - 1];
            if (j + 1 < S && !pinned[j + 1])
                acc += half * sup[j] * u[j + 1];
            rhs[j] = acc;
        }
        lu.solve(rhs);
        u.swap(rhs);
    }
    return u;
}

std::vector<double> SemigroupEvolver::evolve_exact(std::span<const double> f, double t) const
{
    const auto& sp = *spectral_;
    std::vector<double> out(form_.size(), 0.0);
    const auto n = static_cast<Eigen::Index>(sp.free_states.size());
    if (n == 0)
        return out;
    Eigen::VectorXd w(n);
    for (Eigen::Index a = 0; a < n; ++a)
        w[a] = sp.sqrt_mass[a] * f[sp.free_states[static_cast<std::size_t>(a)]];
    Eigen::VectorXd coeff = sp.eigenvectors.transpose() * w;
    for (Eigen::Index a = 0; a < n; ++a)
        coeff[a] *= std::exp(t * sp.eigenvalues[a]);
    const Eigen::VectorXd back = sp.eigenvectors * coeff;
    for (Eigen::Index a = 0; a < n; ++a)
        out[sp.free_states[static_cast<std::size_t>(a)]] = back[a] / sp.sqrt_mass[a];
    return out;
}

double l2m_distance(std::span<const double> masses, std::span<const double> u,
                    std::span<const double> v)
{
    if (u.size() != masses.size() || v.size() != masses.size())
        throw std::invalid_argument("l2m_distance: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double d = u[i] - v[i];
        acc += masses[i] * d * d;
    }
    return std::sqrt(acc);
}

double l2m_norm(std::span<const double> masses, std::span<const double> u)
{
    if (u.size() != masses.size())
        throw std::invalid_argument("l2m_norm: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i)
        acc += masses[i] * u[i] * u[i];
    return std::sqrt(acc);
}

}  // namespace regsub
