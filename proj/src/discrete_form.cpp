#include "regsub/discrete_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regsub {

namespace {

bool inside(double x, double lo, double hi) { return x >= lo && x <= hi; }

void fill_scale(Grid& g, const ScaleFunction& s)
{
    g.scale_values.resize(g.points.size());
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        if (!s.in_domain(g.points[i]))
            throw std::invalid_argument("grid: scale function undefined at a grid point");
        g.scale_values[i] = s(g.points[i]);
    }
    g.scale_gaps.resize(g.points.size() - 1);
    for (std::size_t i = 0; i + 1 < g.points.size(); ++i)
        g.scale_gaps[i] = g.scale_values[i + 1] - g.scale_values[i];
}

}  // namespace

Grid build_grid(const DomainSpec& domain, const ScaleFunction& s, const SpeedMeasure& m, int N,
                std::span<const double> extra_points)
{
    if (N < 3)
        throw std::invalid_argument("build_grid: N must be at least 3");
    const double lo = domain.window_lo;
    const double hi = domain.window_hi;
    const double h = domain.width() / static_cast<double>(N);

    std::vector<double> mandatory{lo, hi};
    for (double x : s.knot_positions())
        if (inside(x, lo, hi))
            mandatory.push_back(x);
    for (double x : m.atom_positions())
        if (inside(x, lo, hi))
            mandatory.push_back(x);
    for (double x : extra_points)
        if (inside(x, lo, hi))
            mandatory.push_back(x);
    std::sort(mandatory.begin(), mandatory.end());
    mandatory.erase(std::unique(mandatory.begin(), mandatory.end()), mandatory.end());

    // Uniform points that nearly coincide with a mandatory one are dropped.
    const double tol = 1e-9 * h;
    std::vector<double> points = mandatory;
    for (int i = 1; i < N; ++i) {
        const double x = lo + static_cast<double>(i) * h;
        auto it = std::lower_bound(mandatory.begin(), mandatory.end(), x);
        const bool near_right = it != mandatory.end() && *it - x <= tol;
        const bool near_left = it != mandatory.begin() && x - *(it - 1) <= tol;
        if (!near_left && !near_right)
            points.push_back(x);
    }
    std::sort(points.begin(), points.end());

    Grid g;
    g.points = std::move(points);
    fill_scale(g, s);

    const std::size_t P = g.points.size();
    g.cell_masses.resize(P);
    for (std::size_t i = 0; i < P; ++i) {
        const double a = i == 0 ? lo : 0.5 * (g.points[i - 1] + g.points[i]);
        const double b = i + 1 == P ? hi : 0.5 * (g.points[i] + g.points[i + 1]);
        double mass = m.cell_mass(a, b);
        if (i + 1 == P)
            for (const auto& at : m.atoms())
                if (at.x == hi)
                    mass += at.mass;
        if (!(mass > 0.0))
            throw std::invalid_argument("build_grid: speed measure gives a cell zero mass");
        g.cell_masses[i] = mass;
    }
    g.gap_density_masses.resize(P - 1);
    for (std::size_t i = 0; i + 1 < P; ++i)
        g.gap_density_masses[i] = m.density_mass(g.points[i], g.points[i + 1]);
    return g;
}

Grid with_scale(const Grid& grid, const ScaleFunction& s)
{
    const double lo = grid.points.front();
    const double hi = grid.points.back();
    for (double x : s.knot_positions())
        if (inside(x, lo, hi) && !std::binary_search(grid.points.begin(), grid.points.end(), x))
            throw std::invalid_argument("with_scale: a knot of the scale is not a grid point");
    Grid g = grid;
    fill_scale(g, s);
    return g;
}

std::string to_string(BoundaryKind k)
{
    return k == BoundaryKind::Neumann ? "neumann" : "dirichlet";
}

BoundaryKind boundary_from_string(const std::string& s)
{
    if (s == "neumann")
        return BoundaryKind::Neumann;
    if (s == "dirichlet")
        return BoundaryKind::Dirichlet;
    throw std::invalid_argument("boundary must be 'neumann' or 'dirichlet'");
}

DiscreteForm DiscreteForm::assemble(const Grid& grid, BoundaryFlags boundary, bool allow_collapse)
{
    if (grid.points.size() < 2)
        throw std::invalid_argument("assemble_form: grid too small");
    for (double gap : grid.scale_gaps)
        if (!(gap >= 0.0))
            throw std::invalid_argument("assemble_form: negative scale gap");

    DiscreteForm f;
    f.grid_ = grid;
    f.boundary_ = boundary;

    const std::size_t P = grid.points.size();
    f.state_of_point_.resize(P);
    std::size_t start = 0;
    for (std::size_t i = 0; i < P; ++i) {
        f.state_of_point_[i] = f.groups_.size();
        const bool closes = i + 1 == P || grid.scale_gaps[i] > 0.0;
        if (closes) {
            f.groups_.push_back({start, i});
            start = i + 1;
        }
    }
    if (f.groups_.size() == 1 && !allow_collapse)
        throw std::invalid_argument("assemble_form: scale is flat on the whole window");

    const std::size_t S = f.groups_.size();
    f.masses_.assign(S, 0.0);
    for (std::size_t i = 0; i < P; ++i)
        f.masses_[f.state_of_point_[i]] += grid.cell_masses[i];
    f.edge_gaps_.resize(S - 1);
    f.conductances_.resize(S - 1);
    for (std::size_t j = 0; j + 1 < S; ++j) {
        f.edge_gaps_[j] = grid.scale_gaps[f.groups_[j].last];
        f.conductances_[j] = 1.0 / (2.0 * f.edge_gaps_[j]);
    }
    f.pinned_.assign(S, false);
    if (boundary.left == BoundaryKind::Dirichlet)
        f.pinned_.front() = true;
    if (boundary.right == BoundaryKind::Dirichlet)
        f.pinned_.back() = true;
    f.build_generator();
    return f;
}

void DiscreteForm::build_generator()
{
    const std::size_t S = masses_.size();
    sub_.assign(S, 0.0);
    diag_.assign(S, 0.0);
    super_.assign(S, 0.0);
    for (std::size_t j = 0; j < S; ++j) {
        if (pinned_[j])
            continue;
        if (j > 0)
            sub_[j] = conductances_[j - 1] / masses_[j];
        if (j + 1 < S)
            super_[j] = conductances_[j] / masses_[j];
        diag_[j] = -(sub_[j] + super_[j]);
    }
}

DiscreteForm DiscreteForm::from_conductances(std::vector<double> masses,
                                             std::vector<double> conductances,
                                             BoundaryFlags boundary)
{
    const std::size_t S = masses.size();
    if (S < 2 || conductances.size() + 1 != S)
        throw std::invalid_argument("from_conductances: need S >= 2 masses and S-1 conductances");
    for (double m : masses)
        if (!(m > 0.0))
            throw std::invalid_argument("from_conductances: masses must be positive");
    for (double c : conductances)
        if (!(c > 0.0) || !std::isfinite(c))
            throw std::invalid_argument("from_conductances: conductances must be positive");

    Grid g;
    for (std::size_t i = 0; i < S; ++i)
        g.points.push_back(static_cast<double>(i));
    g.cell_masses = masses;
    g.scale_values.push_back(0.0);
    for (double c : conductances) {
        g.scale_gaps.push_back(1.0 / (2.0 * c));
        g.scale_values.push_back(g.scale_values.back() + g.scale_gaps.back());
    }
    for (std::size_t i = 0; i + 1 < S; ++i)
        g.gap_density_masses.push_back(0.5 * (masses[i] + masses[i + 1]));

    DiscreteForm f = assemble(g, boundary, false);
    // Keep the hand-set conductances bit-exact.
    f.conductances_ = std::move(conductances);
    f.build_generator();
    return f;
}

std::vector<double> DiscreteForm::positions() const
{
    std::vector<double> out(size(), 0.0);
    for (std::size_t j = 0; j < size(); ++j) {
        double num = 0.0;
        for (std::size_t i = groups_[j].first; i <= groups_[j].last; ++i)
            num += grid_.cell_masses[i] * grid_.points[i];
        out[j] = groups_[j].count() == 1 ? grid_.points[groups_[j].first] : num / masses_[j];
    }
    return out;
}

std::vector<double> DiscreteForm::state_scale_values() const
{
    std::vector<double> out(size());
    for (std::size_t j = 0; j < size(); ++j)
        out[j] = grid_.scale_values[groups_[j].first];
    return out;
}

std::vector<double> DiscreteForm::project(std::span<const double> point_values) const
{
    if (point_values.size() != grid_.size())
        throw std::invalid_argument("project: dimension mismatch");
    std::vector<double> out(size(), 0.0);
    for (std::size_t j = 0; j < size(); ++j) {
        if (pinned_[j])
            continue;
        const auto& g = groups_[j];
        if (g.count() == 1) {
            out[j] = point_values[g.first];
            continue;
        }
        double num = 0.0;
        for (std::size_t i = g.first; i <= g.last; ++i)
            num += grid_.cell_masses[i] * point_values[i];
        out[j] = num / masses_[j];
    }
    return out;
}

std::vector<double> DiscreteForm::lift(std::span<const double> state_values) const
{
    if (state_values.size() != size())
        throw std::invalid_argument("lift: dimension mismatch");
    std::vector<double> out(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i)
        out[i] = state_values[state_of_point_[i]];
    return out;
}

std::vector<double> DiscreteForm::apply(std::span<const double> u) const
{
    if (u.size() != size())
        throw std::invalid_argument("apply: dimension mismatch");
    const std::size_t S = size();
    std::vector<double> out(S, 0.0);
    for (std::size_t j = 0; j < S; ++j) {
        double acc = diag_[j] * u[j];
        if (j > 0 && !pinned_[j - 1])
            acc += sub_[j] * u[j - 1];
        if (j + 1 < S && !pinned_[j + 1])
            acc += super_[j] * u[j + 1];
        out[j] = acc;
    }
    return out;
}

DiscreteForm assemble_form(const Grid& grid, BoundaryFlags boundary)
{
    return DiscreteForm::assemble(grid, boundary, false);
}

DiscreteForm assemble_wide_sense(const Grid& grid, BoundaryFlags boundary)
{
    return DiscreteForm::assemble(grid, boundary, true);
}

double energy(const DiscreteForm& form, std::span<const double> u, std::span<const double> v)
{
    if (u.size() != form.size() || v.size() != form.size())
        throw std::invalid_argument("energy: dimension mismatch");
    for (std::size_t j = 0; j < form.size(); ++j)
        if (form.pinned()[j] && (u[j] != 0.0 || v[j] != 0.0))
            throw std::invalid_argument("energy: Dirichlet-pinned entries must be zero");
    const auto& c = form.conductances();
    double total = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
        total += c[j] * (u[j + 1] - u[j]) * (v[j + 1] - v[j]);
    return total;
}

namespace {

/// Sorted breakpoints of s and m strictly inside (u, w), plus u and w.
std::vector<double> pieces_between(const ScaleFunction& s, const SpeedMeasure& m, double u, double w)
{
    std::vector<double> xs{u, w};
    auto add = [&](double x) {
        if (x > u && x < w)
            xs.push_back(x);
    };
    for (double x : s.knot_positions())
        add(x);
    for (double x : m.breaks())
        add(x);
    for (double x : m.atom_positions())
        add(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

/// ∫_u^w m((x, c)) ds(x) for u < w <= c, exact for piecewise-linear s and
/// step density: on each piece the integrand is affine in x, so its ds-integral
/// is Δs times the value at the midpoint.
double left_test_integral(const ScaleFunction& s, const SpeedMeasure& m, double u, double w,
                          double c)
{
    const auto xs = pieces_between(s, m, u, w);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double p = xs[i], q = xs[i + 1];
        const double ds = s(q) - s(p);
        if (ds == 0.0)
            continue;
        double atoms = 0.0;
        for (const auto& at : m.atoms())
            if (at.x >= q && at.x < c)
                atoms += at.mass;
        total += ds * (m.density_mass(0.5 * (p + q), c) + atoms);
    }
    return total;
}

double right_test_integral(const ScaleFunction& s, const SpeedMeasure& m, double u, double w,
                           double c)
{
    const auto xs = pieces_between(s, m, u, w);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double p = xs[i], q = xs[i + 1];
        const double ds = s(q) - s(p);
        if (ds == 0.0)
            continue;
        double atoms = 0.0;
        for (const auto& at : m.atoms())
            if (at.x > c && at.x <= p)
                atoms += at.mass;
        total += ds * (m.density_mass(c, 0.5 * (p + q)) + atoms);
    }
    return total;
}

}  // namespace

BoundaryClass classify_boundary(const ScaleFunction& s, const SpeedMeasure& m, Side endpoint,
                                double c, int expansion_steps)
{
    if (!(c > s.first_knot() || s.tails().left_slope) || !(c < s.last_knot() || s.tails().right_slope))
        throw std::invalid_argument("classify_boundary: c must lie inside the domain");
    if (expansion_steps < 1)
        throw std::invalid_argument("classify_boundary: need at least one expansion step");

    BoundaryClass out;
    out.endpoint = endpoint;
    const bool left = endpoint == Side::Left;
    const bool infinite = left ? s.tails().left_slope.has_value() : s.tails().right_slope.has_value();

    if (!infinite) {
        out.test_integral = left ? left_test_integral(s, m, s.first_knot(), c, c)
                                 : right_test_integral(s, m, c, s.last_knot(), c);
        out.approachable = std::isfinite(out.test_integral);
        return out;
    }

    double reach = left ? c - s.first_knot() : s.last_knot() - c;
    if (!(reach > 0.0))
        reach = 1.0;
    double total = left ? left_test_integral(s, m, c - reach, c, c)
                        : right_test_integral(s, m, c, c + reach, c);
    double previous_increment = 0.0;
    bool increments_nondecreasing = true;
    for (int k = 0; k < expansion_steps; ++k) {
        const double next = 2.0 * reach;
        const double increment = left ? left_test_integral(s, m, c - next, c - reach, c)
                                      : right_test_integral(s, m, c + reach, c + next, c);
        if (k > 0 && increment < previous_increment)
            increments_nondecreasing = false;
        previous_increment = increment;
        total += increment;
        reach = next;
    }
    if (total > kDivergenceThreshold && increments_nondecreasing) {
        out.test_integral = kInf;
        out.approachable = false;
    } else {
        out.test_integral = total;
        out.approachable = true;
    }
    return out;
}

nlohmann::json to_json(const DiscreteForm& form)
{
    auto groups = nlohmann::json::array();
    for (const auto& g : form.groups())
        groups.push_back({g.first, g.last});
    return {{"points", form.grid().points},
            {"cell_masses", form.grid().cell_masses},
            {"state_masses", form.masses()},
            {"sub_diagonal", form.sub_diagonal()},
            {"diagonal", form.diagonal()},
            {"super_diagonal", form.super_diagonal()},
            {"merged_groups", groups},
            {"boundary", {to_string(form.boundary().left), to_string(form.boundary().right)}}};
}

nlohmann::json to_json(const BoundaryClass& bc)
{
    nlohmann::json integral = std::isfinite(bc.test_integral) ? nlohmann::json(bc.test_integral)
                                                              : nlohmann::json("inf");
    return {{"endpoint", bc.endpoint == Side::Left ? "left" : "right"},
            {"approachable", bc.approachable},
            {"test_integral", integral}};
}

}  // namespace regsub
