#include "regsub/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace regsub {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng)
{
    // 53 random bits in (0, 1).
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> group_average(const DiscreteForm& form, std::span<const double> point_values)
{
    const auto& masses = form.grid().cell_masses;
    std::vector<double> out;
    out.reserve(form.size());
    for (const auto& g : form.groups()) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = g.first; i <= g.last; ++i) {
            num += masses[i] * point_values[i];
            den += masses[i];
        }
        out.push_back(g.count() == 1 ? point_values[g.first] : num / den);
    }
    return out;
}

}  // namespace

std::size_t Path::segment_at(double t) const
{
    if (t < 0.0 || t > horizon)
        throw std::out_of_range("path: time outside [0, horizon]");
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

InitialLaw InitialLaw::point_mass(const Grid& grid, std::size_t point)
{
    if (point >= grid.size())
        throw std::invalid_argument("initial law: point outside the grid");
    InitialLaw law;
    law.kind = Kind::PointMass;
    law.x0 = point;
    law.masses = grid.cell_masses;
    law.points = grid.points;
    return law;
}

InitialLaw InitialLaw::point_mass_at(const Grid& grid, double x)
{
    const auto it = std::lower_bound(grid.points.begin(), grid.points.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.points.begin());
    if (i == grid.size())
        --i;
    else if (i > 0 && x - grid.points[i - 1] <= grid.points[i] - x)
        --i;
    return point_mass(grid, i);
}

InitialLaw InitialLaw::from_density(const Grid& grid, std::vector<double> g)
{
    if (g.size() != grid.size())
        throw std::invalid_argument("initial law: density has wrong size");
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] >= 0.0) || !std::isfinite(g[i]))
            throw std::invalid_argument("initial law: density must be finite and nonnegative");
        total += g[i] * grid.cell_masses[i];
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw std::invalid_argument("initial law: density is not normalized");
    InitialLaw law;
    law.kind = Kind::Density;
    law.density = std::move(g);
    law.masses = grid.cell_masses;
    law.points = grid.points;
    return law;
}

std::vector<double> InitialLaw::point_probabilities() const
{
    std::vector<double> p(masses.size(), 0.0);
    if (kind == Kind::PointMass) {
        p[x0] = 1.0;
        return p;
    }
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = density[i] * masses[i];
    return p;
}

std::string InitialLaw::describe() const
{
    std::ostringstream os;
    os.precision(17);
    if (kind == Kind::PointMass)
        os << "point_mass(" << points[x0] << ")";
    else
        os << "density(" << density.size() << " points)";
    return os.str();
}

std::vector<double> normalize_density(const Grid& grid, std::vector<double> g)
{
    if (g.size() != grid.size())
        throw std::invalid_argument("normalize_density: wrong size");
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        total += g[i] * grid.cell_masses[i];
    if (!(total > 0.0))
        throw std::invalid_argument("normalize_density: zero total mass");
    for (double& v : g)
        v /= total;
    return g;
}

std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index)
{
    return splitmix64(root ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Path simulate_path(const DiscreteForm& form, std::size_t x0, double T, std::uint64_t stream)
{
    if (x0 >= form.size())
        throw std::invalid_argument("simulate_path: start state outside the chain");
    if (!(T > 0.0))
        throw std::invalid_argument("simulate_path: horizon must be positive");

    const auto& sub = form.sub_diagonal();
    const auto& sup = form.super_diagonal();
    const auto& pinned = form.pinned();
    const std::size_t S = form.size();

    std::mt19937_64 rng(stream);
    Path path;
    path.horizon = T;
    std::size_t j = x0;
    double t = 0.0;
    path.times.push_back(0.0);
    path.states.push_back(static_cast<std::uint32_t>(j));
    while (true) {
        const double left = (!pinned[j] && j > 0) ? sub[j] : 0.0;
        const double right = (!pinned[j] && j + 1 < S) ? sup[j] : 0.0;
        const double rate = left + right;
        if (!(rate > 0.0)) {
            path.trapped = true;
            path.times.push_back(std::numeric_limits<double>::infinity());
            path.states.push_back(static_cast<std::uint32_t>(j));
            break;
        }
        t += -std::log(uniform01(rng)) / rate;
        j = uniform01(rng) * rate < right ? j + 1 : j - 1;
        path.times.push_back(t);
        path.states.push_back(static_cast<std::uint32_t>(j));
        if (t >= T)
            break;
    }
    return path;
}

PathEnsemble simulate_ensemble(std::shared_ptr<const DiscreteForm> form, const InitialLaw& law,
                               double T, std::size_t n_paths, std::uint64_t seed,
                               std::string form_id, unsigned threads)
{
    if (!form)
        throw std::invalid_argument("simulate_ensemble: null form");
    if (n_paths == 0)
        throw std::invalid_argument("simulate_ensemble: n_paths must be positive");
    if (law.masses.size() != form->grid().size())
        throw std::invalid_argument("simulate_ensemble: law lives on another grid");

    std::vector<double> cdf = law.point_probabilities();
    std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
    const auto& state_of = form->state_of_point();

    PathEnsemble ens;
    ens.seed = seed;
    ens.form_id = std::move(form_id);
    ens.initial_law = law;
    ens.horizon = T;
    ens.point_values = form->grid().points;
    ens.state_values = group_average(*form, ens.point_values);
    ens.paths.resize(n_paths);

    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const std::uint64_t stream = substream_seed(seed, p);
            std::size_t start_point = law.x0;
            if (law.kind == InitialLaw::Kind::Density) {
                std::mt19937_64 init(splitmix64(stream ^ 0xa5a5a5a5a5a5a5a5ULL));
                const double u = uniform01(init) * cdf.back();
                start_point = static_cast<std::size_t>(
                    std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                start_point = std::min(start_point, cdf.size() - 1);
            }
            ens.paths[p] = simulate_path(*form, state_of[start_point], T, stream);
        }
    };

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_paths));
    if (threads <= 1) {
        run(0, n_paths);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n_paths + threads - 1) / threads;
        for (std::size_t b = 0; b < n_paths; b += chunk)
            pool.emplace_back(run, b, std::min(n_paths, b + chunk));
    }
    ens.form = std::move(form);
    return ens;
}

PathEnsemble transform_ensemble(const PathEnsemble& ens, const ScaleFunction& s0, bool allow_flat)
{
    PathEnsemble out = ens;
    for (double& v : out.point_values)
        v = s0(v);
    if (!allow_flat)
        for (std::size_t i = 0; i + 1 < out.point_values.size(); ++i)
            if (!(out.point_values[i + 1] > out.point_values[i]))
                throw std::invalid_argument("transform_ensemble: s0 is not strictly increasing");
    out.state_values = group_average(*out.form, out.point_values);
    return out;
}

QVReport quadratic_variation_report(const Path& path, std::span<const double> f,
                                    std::span<const double> phi, double T)
{
    if (T > path.horizon)
        throw std::invalid_argument("quadratic_variation_report: T exceeds the path horizon");
    if (f.size() != phi.size())
        throw std::invalid_argument("quadratic_variation_report: f and phi sizes differ");
    QVReport r;
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        const double t0 = path.times[k];
        if (t0 >= T)
            break;
        const double t1 = std::min(path.times[k + 1], T);
        r.phi_integral += (t1 - t0) * phi[path.states[k]];
        if (path.times[k + 1] <= T) {
            const double d = f[path.states[k + 1]] - f[path.states[k]];
            r.realized_qv += d * d;
        }
    }
    r.rel_error = std::abs(r.realized_qv - r.phi_integral) /
                  std::max(r.phi_integral, std::numeric_limits<double>::min());
    return r;
}

std::vector<double> phi_per_state(const DiscreteForm& form, const ScaleFunction& s0)
{
    const auto& groups = form.groups();
    const auto& pts = form.grid().points;
    std::vector<double> phi(form.size(), 0.0);
    for (std::size_t j = 0; j < form.size(); ++j) {
        double acc = 0.0;
        if (j > 0)
            acc += s0(pts[groups[j].first]) - s0(pts[groups[j - 1].last]);
        if (j + 1 < form.size())
            acc += s0(pts[groups[j + 1].first]) - s0(pts[groups[j].last]);
        phi[j] = acc / (2.0 * form.masses()[j]);
    }
    return phi;
}

std::vector<double> state_function(const DiscreteForm& form, const ScaleFunction& s0)
{
    std::vector<double> v;
    v.reserve(form.grid().size());
    for (double x : form.grid().points)
        v.push_back(s0(x));
    return group_average(form, v);
}

void write_csv(std::ostream& os, const PathEnsemble& ens)
{
    const auto old = os.precision(17);
    os << "path_id,t,state_value\n";
    for (std::size_t p = 0; p < ens.paths.size(); ++p) {
        const auto& path = ens.paths[p];
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            if (!std::isfinite(path.times[k]))
                continue;
            os << p << ',' << path.times[k] << ',' << ens.state_values[path.states[k]] << '\n';
        }
    }
    os.precision(old);
}

nlohmann::json header_json(const PathEnsemble& ens)
{
    return {{"seed", ens.seed},
            {"form_id", ens.form_id},
            {"initial_law", ens.initial_law.describe()},
            {"n_paths", ens.paths.size()},
            {"horizon", ens.horizon}};
}

}  // namespace regsub
