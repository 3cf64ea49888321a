#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regsub/discrete_form.hpp"
#include "regsub/scale_function.hpp"

namespace regsub {

/// Piecewise-constant right-continuous jump path of the chain.
/// The last entry is the first jump after the horizon, or +inf when the
/// path got trapped in a state with no exit.
struct Path {
    std::vector<double> times;
    std::vector<std::uint32_t> states;
    double horizon = 0.0;
    bool trapped = false;

    std::uint32_t x0() const { return states.front(); }
    /// Index k of the segment [times[k], times[k+1]) containing t.
    std::size_t segment_at(double t) const;
    std::uint32_t state_at(double t) const { return states[segment_at(t)]; }
};

/// Initial distribution of the chain: density g w.r.t. the cell masses of
/// the grid points, or a point mass at one grid point.
struct InitialLaw {
    enum class Kind { Density, PointMass };

    Kind kind = Kind::PointMass;
    /// Grid point index of the point mass.
    std::size_t x0 = 0;
    /// g on grid points; empty for a point mass.
    std::vector<double> density;
    /// Cell masses the density integrates against.
    std::vector<double> masses;
    std::vector<double> points;

    static InitialLaw point_mass(const Grid& grid, std::size_t point);
    /// Point mass at the grid point nearest to x.
    static InitialLaw point_mass_at(const Grid& grid, double x);
    /// Throws unless g >= 0 and |Σ g_i m_i - 1| <= 1e-10.
    static InitialLaw from_density(const Grid& grid, std::vector<double> g);

    /// Probability of each grid point.
    std::vector<double> point_probabilities() const;
    std::string describe() const;
};

/// g·m normalized to probability one.
std::vector<double> normalize_density(const Grid& grid, std::vector<double> g);

struct PathEnsemble {
    std::vector<Path> paths;
    std::uint64_t seed = 0;
    std::string form_id;
    InitialLaw initial_law;
    std::shared_ptr<const DiscreteForm> form;
    /// Value reported for each grid point (coordinate, or its image under a
    /// spatial transform).
    std::vector<double> point_values;
    /// Cell-mass average of point_values over each state.
    std::vector<double> state_values;
    double horizon = 0.0;

    std::size_t size() const { return paths.size(); }
};

/// Per-path stream seed: splitmix64 of the root seed combined with the
/// splitmix64 image of the path index.
std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index);

/// Exact jump-chain simulation up to T starting from state x0.
Path simulate_path(const DiscreteForm& form, std::size_t x0, double T, std::uint64_t stream);

/// Paths are simulated in parallel, each on its own substream; the result is
/// a pure function of (form, law, T, n_paths, seed).
PathEnsemble simulate_ensemble(std::shared_ptr<const DiscreteForm> form, const InitialLaw& law,
                               double T, std::size_t n_paths, std::uint64_t seed,
                               std::string form_id = "form", unsigned threads = 0);

/// Maps every reported value through s0. Time stamps and states are kept.
/// Throws std::invalid_argument when s0 is not strictly increasing on the
/// current values, unless allow_flat is set (a flat s0 collapses values).
PathEnsemble transform_ensemble(const PathEnsemble& ens, const ScaleFunction& s0,
                                bool allow_flat = false);

struct QVReport {
    double realized_qv = 0.0;
    double phi_integral = 0.0;
    double rel_error = 0.0;
};

/// Sum of squared jumps of f along the path versus ∫_0^T φ(Z_s) ds.
/// f and phi are per state. Throws when T exceeds the path horizon.
QVReport quadratic_variation_report(const Path& path, std::span<const double> f,
                                    std::span<const double> phi, double T);

/// Jump rate weighted squared increments of s0 per state:
/// φ_j = (Δs0_left + Δs0_right) / (2 M_j).
std::vector<double> phi_per_state(const DiscreteForm& form, const ScaleFunction& s0);

/// s0 evaluated on each state (mass-weighted over merged groups).
std::vector<double> state_function(const DiscreteForm& form, const ScaleFunction& s0);

/// Rows path_id,t,state_value.
void write_csv(std::ostream& os, const PathEnsemble& ens);
nlohmann::json header_json(const PathEnsemble& ens);

}  // namespace regsub
