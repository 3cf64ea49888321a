#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regsub/interval_union.hpp"
#include "regsub/scale_function.hpp"
#include "regsub/speed_measure.hpp"

namespace regsub {

/// Vertex grid on the window with half-cell mass bookkeeping: point x_i owns
/// the cell between the midpoints to its neighbours, and the two boundary
/// points own half a cell reaching to the window edge.
struct Grid {
    std::vector<double> points;
    std::vector<double> cell_masses;
    /// s(x_i) for the scale the grid was built with.
    std::vector<double> scale_values;
    /// s(x_{i+1}) - s(x_i).
    std::vector<double> scale_gaps;
    /// Density-only mass of (x_i, x_{i+1}); used for the ratio ds/dm.
    std::vector<double> gap_density_masses;

    std::size_t size() const { return points.size(); }
};

/// Grid of N uniform intervals on the window, refined so that every knot of
/// s, every atom of m and every `extra_points` entry inside the window is a
/// grid point. Throws std::invalid_argument for N < 3, a scale that misses
/// grid points, or a cell of zero mass.
Grid build_grid(const DomainSpec& domain, const ScaleFunction& s, const SpeedMeasure& m, int N,
                std::span<const double> extra_points = {});

/// Same points and masses, scale values recomputed for another scale
/// function. Every knot of `s` inside the window must already be a point.
Grid with_scale(const Grid& grid, const ScaleFunction& s);

enum class BoundaryKind { Neumann, Dirichlet };

struct BoundaryFlags {
    BoundaryKind left = BoundaryKind::Neumann;
    BoundaryKind right = BoundaryKind::Neumann;
};

std::string to_string(BoundaryKind k);
BoundaryKind boundary_from_string(const std::string& s);

/// Consecutive grid points [first, last] sharing one chain state.
struct StateGroup {
    std::size_t first;
    std::size_t last;
    std::size_t count() const { return last - first + 1; }
};

/// Tridiagonal generator of the discretized form ½∫ du/ds dv/ds ds on L²(m).
///
/// Grid points joined by a flat stretch of the scale (Δs = 0) are merged into
/// one sticky state whose mass is the sum of the point masses. States are
/// coupled by conductances c_j = 1/(2 Δs_j), and the generator is
/// L_{j,j±1} = c / M_j with zero row sums. A Dirichlet side pins the state
/// holding the boundary point to zero; its row is identically zero.
class DiscreteForm {
public:
    const Grid& grid() const { return grid_; }
    BoundaryFlags boundary() const { return boundary_; }
    std::size_t size() const { return masses_.size(); }

    const std::vector<StateGroup>& groups() const { return groups_; }
    const std::vector<std::size_t>& state_of_point() const { return state_of_point_; }
    const std::vector<double>& masses() const { return masses_; }
    const std::vector<double>& conductances() const { return conductances_; }
    const std::vector<double>& edge_scale_gaps() const { return edge_gaps_; }
    const std::vector<double>& sub_diagonal() const { return sub_; }
    const std::vector<double>& diagonal() const { return diag_; }
    const std::vector<double>& super_diagonal() const { return super_; }
    const std::vector<bool>& pinned() const { return pinned_; }

    /// Mass-weighted centroid of each state's points.
    std::vector<double> positions() const;
    /// Scale value of each state (constant on a merged group).
    std::vector<double> state_scale_values() const;

    /// L²(m)-orthogonal projection of a point function onto states:
    /// cell-mass weighted average over each group. Pinned states get 0.
    std::vector<double> project(std::span<const double> point_values) const;
    /// Piecewise-constant extension of a state function to the points.
    std::vector<double> lift(std::span<const double> state_values) const;

    /// (L u)_j.
    std::vector<double> apply(std::span<const double> u) const;

    /// Hand-set chain on synthetic points 0, 1, ..., S-1 (no merging).
    static DiscreteForm from_conductances(std::vector<double> masses,
                                          std::vector<double> conductances,
                                          BoundaryFlags boundary = {});

    /// Shared body of assemble_form / assemble_wide_sense.
    static DiscreteForm assemble(const Grid& grid, BoundaryFlags boundary, bool allow_collapse);

private:
    void build_generator();

    Grid grid_;
    BoundaryFlags boundary_;
    std::vector<StateGroup> groups_;
    std::vector<std::size_t> state_of_point_;
    std::vector<double> masses_;
    std::vector<double> conductances_;
    std::vector<double> edge_gaps_;
    std::vector<double> sub_, diag_, super_;
    std::vector<bool> pinned_;
};

/// Throws std::invalid_argument when every scale gap is zero.
DiscreteForm assemble_form(const Grid& grid, BoundaryFlags boundary);

/// Wide-sense limit forms: same rule as assemble_form but a scale that is
/// flat on the whole window is allowed and yields a single frozen state.
DiscreteForm assemble_wide_sense(const Grid& grid, BoundaryFlags boundary);

/// ½ Σ (u_{j+1} - u_j)(v_{j+1} - v_j) / Δs_j over edges with Δs_j > 0.
/// Arguments live on states; pinned entries must be zero.
double energy(const DiscreteForm& form, std::span<const double> u, std::span<const double> v);

enum class Side { Left, Right };

struct BoundaryClass {
    Side endpoint = Side::Left;
    bool approachable = false;
    /// +inf when divergence is certified.
    double test_integral = 0.0;
};

/// Divergence certificate thresholds for infinite endpoints.
inline constexpr double kDivergenceThreshold = 1e6;
inline constexpr int kDefaultExpansionSteps = 64;

/// Feller test integral ∫_a^c m((x, c)) ds(x) (left) or ∫_c^b m((c, x)) ds(x)
/// (right). Finite endpoints (no tail on that side of s) are integrated
/// exactly; infinite endpoints are swept with `expansion_steps` doubling
/// cells and declared divergent once partial sums pass kDivergenceThreshold
/// with nondecreasing increments.
BoundaryClass classify_boundary(const ScaleFunction& s, const SpeedMeasure& m, Side endpoint,
                                double c, int expansion_steps = kDefaultExpansionSteps);

nlohmann::json to_json(const DiscreteForm& form);
nlohmann::json to_json(const BoundaryClass& bc);

}  // namespace regsub
