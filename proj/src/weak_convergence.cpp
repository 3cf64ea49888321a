#include "regsub/weak_convergence.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace regsub {

KsResult ks_two_sample(std::vector<double> x, std::vector<double> y)
{
    if (x.empty() || y.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double stat = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v)
            ++i;
        while (j < y.size() && y[j] == v)
            ++j;
        stat = std::max(stat, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return {stat, 1.358 * std::sqrt((nx + ny) / (nx * ny))};
}

namespace {

constexpr std::size_t kKilled = std::numeric_limits<std::size_t>::max();

/// Grid point reported by path p at observation k; kKilled in a pinned state.
std::size_t observe(const PathEnsemble& ens, std::size_t p, std::size_t k, std::size_t n_times,
                    std::uint32_t state, std::vector<double>& cdf)
{
    const auto& form = *ens.form;
    if (form.pinned()[state])
        return kKilled;
    const auto& g = form.groups()[state];
    if (g.count() == 1)
        return g.first;
    const auto& masses = form.grid().cell_masses;
    cdf.clear();
    double acc = 0.0;
    for (std::size_t i = g.first; i <= g.last; ++i)
        cdf.push_back(acc += masses[i]);
    std::mt19937_64 rng(substream_seed(ens.seed ^ 0x7f4a7c15f39cc060ULL, p * n_times + k));
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53 * acc;
    const auto off = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                              cdf.begin());
    return g.first + std::min(off, g.count() - 1);
}

struct Moment {
    double mean = 0.0;
    double se = 0.0;
};

Moment mean_and_se(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v)
        var += (x - mean) * (x - mean);
    var /= std::max(1.0, n - 1.0);
    return {mean, std::sqrt(var / n)};
}

double law_expectation(const InitialLaw& law, const DiscreteForm& form,
                       std::span<const double> state_fn)
{
    const auto p = law.point_probabilities();
    const auto lifted = form.lift(state_fn);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        acc += p[i] * lifted[i];
    return acc;
}

}  // namespace

FddSamples sample_fdd(const PathEnsemble& ens, const std::vector<double>& times,
                      const MomentOracle* oracle)
{
    for (double t : times)
        if (t < 0.0 || t > ens.horizon)
            throw std::invalid_argument("sample_fdd: time beyond the ensemble horizon");
    const std::size_t K = times.size();
    const std::size_t P = ens.paths.size();
    FddSamples out;
    out.times = times;
    out.values.assign(K, std::vector<double>(P));
    std::vector<std::vector<std::size_t>> points(K, std::vector<std::size_t>(P));
    std::vector<double> scratch;
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t k = 0; k < K; ++k) {
            const auto state = ens.paths[p].state_at(times[k]);
            const auto pt = observe(ens, p, k, K, state, scratch);
            points[k][p] = pt;
            out.values[k][p] =
                pt == kKilled ? ens.point_values[ens.form->groups()[state].first] : ens.point_values[pt];
        }

    if (!oracle)
        return out;
    const auto& form = *ens.form;
    const std::size_t G = form.grid().size();
    if (oracle->f0.size() != G || oracle->f1.size() != G)
        throw std::invalid_argument("sample_fdd: oracle functions have wrong size");
    const SemigroupEvolver ev(form, oracle->scheme);
    auto f_at = [](const std::vector<double>& f, std::size_t pt) {
        return pt == kKilled ? 0.0 : f[pt];
    };
    const auto pf0 = form.project(oracle->f0);
    const auto pf1 = form.project(oracle->f1);

    std::vector<double> sample(P);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t p = 0; p < P; ++p)
            sample[p] = f_at(oracle->f0, points[k][p]);
        const auto mc = mean_and_se(sample);
        MomentCheck mcheck{"single", times[k], times[k], mc.mean,
                           law_expectation(ens.initial_law, form, ev.evolve(pf0, times[k])),
                           mc.se, 0.0};
        out.moments.push_back(mcheck);
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
        if (!(times[k + 1] > times[k]))
            continue;
        for (std::size_t p = 0; p < P; ++p)
            sample[p] = f_at(oracle->f0, points[k][p]) * f_at(oracle->f1, points[k + 1][p]);
        const auto mc = mean_and_se(sample);
        auto inner = ev.evolve(pf1, times[k + 1] - times[k]);
        for (std::size_t j = 0; j < inner.size(); ++j)
            inner[j] *= pf0[j];
        MomentCheck mcheck{"product", times[k], times[k + 1], mc.mean,
                           law_expectation(ens.initial_law, form, ev.evolve(inner, times[k])),
                           mc.se, 0.0};
        out.moments.push_back(mcheck);
    }
    for (auto& m : out.moments) {
        const double diff = m.mc - m.exact;
        m.z = m.std_error > 0.0 ? diff / m.std_error
                                : (std::abs(diff) <= 1e-12 ? 0.0
                                                           : std::copysign(
                                                                 std::numeric_limits<double>::infinity(),
                                                                 diff));
    }
    return out;
}

FddReport fdd_convergence_suite(const std::vector<FddSamples>& family, const FddSamples& limit,
                                std::vector<int> n_values)
{
    if (family.empty())
        throw std::invalid_argument("fdd_convergence_suite: empty family");
    for (const auto& f : family)
        if (f.times != limit.times)
            throw std::invalid_argument("fdd_convergence_suite: sampling times differ");
    if (n_values.empty())
        for (std::size_t k = 0; k < family.size(); ++k)
            n_values.push_back(static_cast<int>(k) + 1);
    FddReport r;
    r.times = limit.times;
    r.n_values = std::move(n_values);
    for (const auto& f : family) {
        std::vector<double> ks, th;
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            const auto res = ks_two_sample(f.values[k], limit.values[k]);
            ks.push_back(res.stat);
            th.push_back(res.critical_5pct);
        }
        r.ks.push_back(std::move(ks));
        r.thresholds.push_back(std::move(th));
        r.moments.push_back(f.moments);
    }
    r.moments.push_back(limit.moments);
    r.pass = true;
    for (std::size_t k = 0; k < r.times.size(); ++k)
        if (!(r.ks.back()[k] <= r.thresholds.back()[k]))
            r.pass = false;
    for (const auto& row : r.moments)
        for (const auto& m : row)
            r.max_abs_z = std::max(r.max_abs_z, std::abs(m.z));
    return r;
}

FddReport fdd_convergence_suite(const std::vector<const PathEnsemble*>& family,
                                const PathEnsemble& limit, const std::vector<double>& times,
                                const MomentOracle* oracle, std::vector<int> n_values)
{
    std::vector<FddSamples> samples;
    for (const auto* ens : family)
        samples.push_back(sample_fdd(*ens, times, oracle));
    return fdd_convergence_suite(samples, sample_fdd(limit, times, oracle), std::move(n_values));
}

bool modulus_reaches(const Path& path, std::span<const double> state_values, double T,
                     double delta, double rho)
{
    if (!(delta > 0.0) || !(rho > 0.0))
        throw std::invalid_argument("modulus: delta and rho must be positive");
    if (T > path.horizon)
        throw std::invalid_argument("modulus: T exceeds the path horizon");
    const auto& t = path.times;
    auto v = [&](std::size_t i) { return state_values[path.states[i]]; };
    // Pair (i, j), i < j, is admissible iff t_j <= T and t_j - t_{i+1} < delta.
    std::deque<std::size_t> maxq, minq;
    std::size_t lo = 0;
    for (std::size_t j = 1; j < t.size() && t[j] <= T; ++j) {
        const std::size_t i_new = j - 1;
        while (!maxq.empty() && v(maxq.back()) <= v(i_new))
            maxq.pop_back();
        maxq.push_back(i_new);
        while (!minq.empty() && v(minq.back()) >= v(i_new))
            minq.pop_back();
        minq.push_back(i_new);
        while (lo < j && !(t[j] - t[lo + 1] < delta))
            ++lo;
        while (!maxq.empty() && maxq.front() < lo)
            maxq.pop_front();
        while (!minq.empty() && minq.front() < lo)
            minq.pop_front();
        if (lo >= j)
            continue;
        if (v(maxq.front()) - v(j) >= rho || v(j) - v(minq.front()) >= rho)
            return true;
    }
    return false;
}

bool modulus_reaches_bruteforce(const Path& path, std::span<const double> state_values, double T,
                                double delta, double rho)
{
    const auto& t = path.times;
    for (std::size_t j = 1; j < t.size() && t[j] <= T; ++j)
        for (std::size_t i = 0; i < j; ++i)
            if (t[j] - t[i + 1] < delta &&
                std::abs(state_values[path.states[j]] - state_values[path.states[i]]) >= rho)
                return true;
    return false;
}

double modulus_statistic(const PathEnsemble& ens, double T, double delta, double rho)
{
    std::size_t hits = 0;
    for (const auto& p : ens.paths)
        hits += modulus_reaches(p, ens.state_values, T, delta, rho) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(ens.paths.size());
}

double modulus_statistic_bruteforce(const PathEnsemble& ens, double T, double delta, double rho)
{
    std::size_t hits = 0;
    for (const auto& p : ens.paths)
        hits += modulus_reaches_bruteforce(p, ens.state_values, T, delta, rho) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(ens.paths.size());
}

double brownian_modulus_bound(double C, double T, double delta, double rho, std::size_t n_mc,
                              std::uint64_t seed)
{
    if (!(C > 0.0) || !(T > 0.0) || !(delta > 0.0) || !(rho > 0.0) || n_mc == 0)
        throw std::invalid_argument("brownian_modulus_bound: invalid arguments");
    constexpr std::size_t sub = 64;
    const double h = C * delta / static_cast<double>(sub);
    const auto steps = static_cast<std::size_t>(std::ceil(C * T / h - 1e-9));
    const double sd = std::sqrt(h);
    std::size_t hits = 0;
    std::vector<double> b(steps + 1);
    for (std::size_t k = 0; k < n_mc; ++k) {
        std::mt19937_64 rng(substream_seed(seed, k));
        std::normal_distribution<double> normal(0.0, sd);
        b[0] = 0.0;
        for (std::size_t i = 1; i <= steps; ++i)
            b[i] = b[i - 1] + normal(rng);
        // Admissible pairs: index gap at most sub - 1, i.e. t - s < C delta.
        std::deque<std::size_t> maxq, minq;
        bool hit = false;
        for (std::size_t j = 1; j <= steps && !hit; ++j) {
            const std::size_t i_new = j - 1;
            while (!maxq.empty() && b[maxq.back()] <= b[i_new])
                maxq.pop_back();
            maxq.push_back(i_new);
            while (!minq.empty() && b[minq.back()] >= b[i_new])
                minq.pop_back();
            minq.push_back(i_new);
            const std::size_t lo = j >= sub - 1 ? j - (sub - 1) : 0;
            while (maxq.front() < lo)
                maxq.pop_front();
            while (minq.front() < lo)
                minq.pop_front();
            hit = b[maxq.front()] - b[j] >= rho || b[j] - b[minq.front()] >= rho;
        }
        hits += hit ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(n_mc);
}

double sup_phi(const Grid& grid, const ScaleFunction& s0)
{
    double sup = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double ds = s0(grid.points[i + 1]) - s0(grid.points[i]);
        if (ds <= 0.0)
            continue;
        const double dm = grid.gap_density_masses[i];
        if (!(dm > 0.0))
            return std::numeric_limits<double>::infinity();
        sup = std::max(sup, ds / dm);
    }
    return sup;
}

TightnessReport initial_tightness(const std::vector<InitialLaw>& laws,
                                  const std::vector<double>& A_grid)
{
    if (!std::is_sorted(A_grid.begin(), A_grid.end()))
        throw std::invalid_argument("initial_tightness: A_grid must be increasing");
    TightnessReport r;
    r.A_grid = A_grid;
    r.liminf_proxy = laws.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& law : laws) {
        const auto p = law.point_probabilities();
        std::vector<double> row;
        for (double A : A_grid) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                if (std::abs(law.points[i]) <= A)
                    acc += p[i];
            row.push_back(acc);
        }
        if (!row.empty())
            r.liminf_proxy = std::min(r.liminf_proxy, row.back());
        r.mass.push_back(std::move(row));
    }
    return r;
}

H2Report h2_check(const std::vector<InitialLaw>& laws, const InitialLaw& limit)
{
    if (limit.kind != InitialLaw::Kind::Density)
        throw std::invalid_argument("h2_check: the limit law must have a density");
    H2Report r;
    for (const auto& law : laws) {
        if (law.kind != InitialLaw::Kind::Density)
            throw std::invalid_argument("h2_check: point-mass laws have no density");
        if (law.points != limit.points)
            throw std::invalid_argument("h2_check: densities live on different grids");
        double l1 = 0.0, l2 = 0.0;
        for (std::size_t i = 0; i < law.density.size(); ++i) {
            const double d = law.density[i] - limit.density[i];
            l1 += law.masses[i] * std::abs(d);
            l2 += law.masses[i] * d * d;
        }
        r.l1_gaps.push_back(l1);
        r.l2_gaps.push_back(std::sqrt(l2));
    }
    return r;
}

void write_rows(std::ostream& os, const std::vector<ReportRow>& rows)
{
    const auto old = os.precision(17);
    os << "n,statistic,parameters,value,threshold,pass\n";
    for (const auto& r : rows)
        os << r.n << ',' << r.statistic << ',' << r.parameters << ',' << r.value << ','
           << r.threshold << ',' << (r.pass ? 1 : 0) << '\n';
    os.precision(old);
}

}  // namespace regsub
