#include "regsub/mosco.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace regsub {

FormFamily assemble_family(const CharacteristicFamily& family, const DomainSpec& domain,
                           const ScaleFunction& s, const SpeedMeasure& m, int N,
                           BoundaryFlags boundary, double e)
{
    FormFamily out;
    out.direction = family.direction;
    out.n_values = family.n_values;

    std::vector<double> extra;
    for (const auto& g : family.sets)
        for (double x : g.endpoints())
            extra.push_back(x);
    for (double x : family.asymptotic_limit.endpoints())
        extra.push_back(x);
    extra.push_back(e);
    const Grid base = build_grid(domain, s, m, N, extra);

    for (const auto& g : family.sets) {
        out.scales.push_back(derive_subscale(s, g, e));
        out.forms.push_back(assemble_form(with_scale(base, out.scales.back()), boundary));
    }
    out.limit_scale = derive_subscale(s, family.asymptotic_limit, e);
    out.limit = assemble_wide_sense(with_scale(base, out.limit_scale), boundary);
    return out;
}

std::vector<double> hat_function(const Grid& grid, double center, double half_width)
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = std::max(0.0, 1.0 - std::abs(grid.points[i] - center) / half_width);
    return out;
}

std::vector<TestFunction> standard_dictionary(const Grid& grid)
{
    const double lo = grid.points.front();
    const double hi = grid.points.back();
    const double width = hi - lo;
    const double h = width / static_cast<double>(grid.size() - 1);
    std::vector<TestFunction> dict;

    for (int k = 0; k < 8; ++k) {
        const double c = lo + width * (k + 0.5) / 8.0;
        dict.push_back({"hat" + std::to_string(k), hat_function(grid, c, width / 8.0)});
    }
    for (int k = 1; k <= 3; ++k) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            v[i] = std::sin(k * std::numbers::pi * (grid.points[i] - lo) / width);
        dict.push_back({"sine" + std::to_string(k), std::move(v)});
    }
    const double windows[2][2] = {{0.2, 0.45}, {0.55, 0.8}};
    for (int k = 0; k < 2; ++k) {
        const double a = lo + windows[k][0] * width;
        const double b = lo + windows[k][1] * width;
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.points[i];
            v[i] = 0.5 * (std::tanh((x - a) / h) - std::tanh((x - b) / h));
        }
        dict.push_back({"indicator" + std::to_string(k), std::move(v)});
    }
    return dict;
}

namespace {

bool same_points(const DiscreteForm& a, const DiscreteForm& b)
{
    return a.grid().points == b.grid().points && a.grid().cell_masses == b.grid().cell_masses;
}

std::vector<double> evolve_on_points(const SemigroupEvolver& ev, const std::vector<double>& f,
                                     double t)
{
    const auto& form = ev.form();
    return form.lift(ev.evolve(form.project(f), t));
}

}  // namespace

MoscoReport mosco_certificate(const std::vector<DiscreteForm>& family, const DiscreteForm& limit,
                              const std::vector<TestFunction>& dictionary,
                              const std::vector<double>& times, Scheme scheme,
                              std::vector<int> n_values)
{
    if (family.empty())
        throw std::invalid_argument("mosco_certificate: empty family");
    for (const auto& f : family)
        if (!same_points(f, limit))
            throw std::invalid_argument("mosco_certificate: incompatible grids");
    for (const auto& tf : dictionary)
        if (tf.values.size() != limit.grid().size())
            throw std::invalid_argument("mosco_certificate: dictionary function has wrong size");
    if (n_values.empty())
        for (std::size_t k = 0; k < family.size(); ++k)
            n_values.push_back(static_cast<int>(k) + 1);

    MoscoReport report;
    report.n_values = std::move(n_values);
    report.times = times;
    for (const auto& tf : dictionary)
        report.test_ids.push_back(tf.id);

    const auto& masses = limit.grid().cell_masses;
    const SemigroupEvolver limit_ev(limit, scheme);
    std::vector<std::vector<std::vector<double>>> reference(dictionary.size());
    for (std::size_t f = 0; f < dictionary.size(); ++f)
        for (double t : times)
            reference[f].push_back(evolve_on_points(limit_ev, dictionary[f].values, t));

    report.distances.resize(family.size());
    for (std::size_t n = 0; n < family.size(); ++n) {
        const SemigroupEvolver ev(family[n], scheme);
        report.distances[n].resize(dictionary.size());
        for (std::size_t f = 0; f < dictionary.size(); ++f)
            for (std::size_t k = 0; k < times.size(); ++k) {
                const auto moved = evolve_on_points(ev, dictionary[f].values, times[k]);
                report.distances[n][f].push_back(l2m_distance(masses, moved, reference[f][k]));
            }
    }

    // The first index is a burn-in and exempt from the monotonicity check.
    constexpr double slack = 1e-12;
    for (std::size_t n = 1; n + 1 < family.size(); ++n)
        for (std::size_t f = 0; f < dictionary.size(); ++f)
            for (std::size_t k = 0; k < times.size(); ++k)
                if (report.distances[n + 1][f][k] > report.distances[n][f][k] + slack)
                    report.monotone_ok = false;
    for (const auto& row : report.distances.back())
        for (double d : row)
            report.final_max = std::max(report.final_max, d);
    return report;
}

void write_csv(std::ostream& os, const MoscoReport& report)
{
    const auto old_precision = os.precision(17);
    os << "n,test_id,t,distance\n";
    for (std::size_t n = 0; n < report.distances.size(); ++n)
        for (std::size_t f = 0; f < report.test_ids.size(); ++f)
            for (std::size_t k = 0; k < report.times.size(); ++k)
                os << report.n_values[n] << ',' << report.test_ids[f] << ',' << report.times[k]
                   << ',' << report.distances[n][f][k] << '\n';
    os << "summary,monotone_ok," << (report.monotone_ok ? 1 : 0) << ',' << report.final_max
       << '\n';
    os.precision(old_precision);
}

std::vector<double> freeze_check(const FormFamily& family, const std::vector<double>& u, double t)
{
    if (family.direction != Direction::Decreasing)
        throw std::invalid_argument("freeze_check: family must be decreasing");
    std::vector<double> out;
    for (const auto& form : family.forms) {
        if (u.size() != form.grid().size())
            throw std::invalid_argument("freeze_check: dimension mismatch");
        const SemigroupEvolver ev(form);
        const auto moved = evolve_on_points(ev, u, t);
        out.push_back(l2m_distance(form.grid().cell_masses, moved, u));
    }
    return out;
}

double BumpSpec::value(double y) const
{
    const double r = (y - center) / radius;
    if (std::abs(r) >= 1.0)
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double BumpSpec::derivative(double y) const
{
    const double r = (y - center) / radius;
    if (std::abs(r) >= 1.0)
        return 0.0;
    const double q = 1.0 - r * r;
    return value(y) * (-2.0 * r / (q * q)) / radius;
}

CoreApproximation core_approximation_energy(const BumpSpec& phi, const ScaleFunction& s_n,
                                            const ScaleFunction& s_inf, const ScaleFunction& s,
                                            const SpeedMeasure& m)
{
    const double lo = s.first_knot();
    const double hi = s.last_knot();
    auto image_contains = [&](const ScaleFunction& f) {
        return f(lo) < phi.lo() && phi.hi() < f(hi);
    };
    if (!(phi.radius > 0.0) || !image_contains(s_n) || !image_contains(s_inf))
        throw std::invalid_argument(
            "core_approximation_energy: bump support must lie inside s_n(I) and s_inf(I)");

    std::vector<double> xs{lo, hi};
    auto add = [&](double x) {
        if (x > lo && x < hi)
            xs.push_back(x);
    };
    for (const auto* f : {&s_n, &s_inf, &s})
        for (double x : f->knot_positions())
            add(x);
    for (double x : m.breaks())
        add(x);
    for (const auto* f : {&s_n, &s_inf})
        for (double y : {phi.lo(), phi.hi()})
            add(f->inverse(y));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    using Rule = boost::math::quadrature::gauss<double, 20>;
    const double max_piece = (hi - lo) / 256.0;
    CoreApproximation out;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double p = xs[i], q = xs[i + 1];
        const double ds = s(q) - s(p);
        const double dsn = s_n(q) - s_n(p);
        const double dsinf = s_inf(q) - s_inf(p);
        const double ind_n = ds > 0.0 ? dsn / ds : 0.0;
        const double ind = ds > 0.0 ? dsinf / ds : 0.0;
        const double s_slope = ds / (q - p);
        const double sinf_slope = dsinf / (q - p);
        const double density = m.density(0.5 * (p + q));

        const auto parts = static_cast<int>(std::ceil((q - p) / max_piece));
        for (int k = 0; k < parts; ++k) {
            const double a = p + (q - p) * k / parts;
            const double b = k + 1 == parts ? q : p + (q - p) * (k + 1) / parts;
            if (density > 0.0)
                out.l2_gap += density * Rule::integrate(
                                            [&](double x) {
                                                const double d =
                                                    phi.value(s_n(x)) - phi.value(s_inf(x));
                                                return d * d;
                                            },
                                            a, b);
            if (ind_n != ind && s_slope > 0.0)
                out.Phi += (ind_n - ind) * (ind_n - ind) * s_slope *
                           Rule::integrate(
                               [&](double x) {
                                   const double d = phi.derivative(s_n(x));
                                   return d * d;
                               },
                               a, b);
            if (sinf_slope > 0.0)
                out.Psi += sinf_slope * Rule::integrate(
                                            [&](double x) {
                                                const double d = phi.derivative(s_n(x)) -
                                                                 phi.derivative(s_inf(x));
                                                return d * d;
                                            },
                                            a, b);
        }
    }
    for (const auto& at : m.atoms())
        if (at.x >= lo && at.x <= hi) {
            const double d = phi.value(s_n(at.x)) - phi.value(s_inf(at.x));
            out.l2_gap += at.mass * d * d;
        }
    return out;
}

}  // namespace regsub
