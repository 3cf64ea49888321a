#include <cmath>
#include <random>

#include <doctest.h>

#include "regsub/characteristic_family.hpp"
#include "regsub/discrete_form.hpp"
#include "regsub/semigroup.hpp"

using namespace regsub;

namespace {

const DomainSpec kUnit = DomainSpec::unit_interval();
const ScaleFunction kId = ScaleFunction::identity(0.0, 1.0, 0.5);
const SpeedMeasure kUniform = SpeedMeasure::uniform(1.0);

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

// Forms used by the property sweeps: plain, flat stretch, step density with atom, Dirichlet.
std::vector<DiscreteForm> golden_forms()
{
    std::vector<DiscreteForm> out;
    out.push_back(assemble_form(build_grid(kUnit, kId, kUniform, 64), {}));
    const auto flat = derive_subscale(kId, IntervalUnion({{0, 0.3}, {0.45, 1}}), 0.5);
    out.push_back(assemble_form(build_grid(kUnit, flat, kUniform, 64), {}));
    const auto m = SpeedMeasure::step({0.5}, {1.0, 4.0}).with_atoms({{0.25, 0.5}});
    const auto s = ScaleFunction::from_knots({{0, 0}, {0.4, 0.1}, {1, 1.5}}, 0.5);
    out.push_back(assemble_form(build_grid(kUnit, s, m, 64), {}));
    out.push_back(assemble_form(build_grid(kUnit, kId, kUniform, 64),
                                {BoundaryKind::Dirichlet, BoundaryKind::Dirichlet}));
    return out;
}

}  // namespace

TEST_CASE("build_grid half-cell masses")
{
    const auto g = build_grid(kUnit, kId, kUniform, 4);
    REQUIRE(g.size() == 5);
    const std::vector<double> expected{0.125, 0.25, 0.25, 0.25, 0.125};
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(g.cell_masses[i] == doctest::Approx(expected[i]).epsilon(1e-15));

    const auto ga = build_grid(kUnit, kId, kUniform.with_atoms({{0.5, 2.0}}), 4);
    CHECK(ga.cell_masses[2] == doctest::Approx(2.25));
    CHECK(ga.cell_masses[1] == doctest::Approx(0.25));

    const auto s = ScaleFunction::from_knots({{0, 0}, {0.123, 0.2}, {0.77, 0.3}, {1, 1}}, 0.5);
    const auto gs = build_grid(kUnit, s, kUniform, 10);
    for (double k : s.knot_positions())
        CHECK(std::find(gs.points.begin(), gs.points.end(), k) != gs.points.end());

    CHECK_THROWS(build_grid(kUnit, kId, kUniform, 2));
}

TEST_CASE("stencil reproduces the second derivative")
{
    const int N = 50;
    const auto f = assemble_form(build_grid(kUnit, kId, kUniform, N), {});
    std::vector<double> u(f.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = f.grid().points[i] * f.grid().points[i];
    const auto Lu = f.apply(u);
    const double d = 1.0 / N;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        CHECK(Lu[i] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(f.sub_diagonal()[i] == doctest::Approx(1.0 / (2 * d * d)));
        CHECK(f.diagonal()[i] == doctest::Approx(-1.0 / (d * d)));
        CHECK(f.super_diagonal()[i] == doctest::Approx(1.0 / (2 * d * d)));
    }
}

TEST_CASE("generator structure on golden forms")
{
    for (const auto& f : golden_forms()) {
        const auto& M = f.masses();
        for (std::size_t j = 0; j < f.size(); ++j) {
            if (f.pinned()[j])
                continue;
            const double lo = j > 0 && !f.pinned()[j - 1] ? f.sub_diagonal()[j] : 0.0;
            const double hi = j + 1 < f.size() && !f.pinned()[j + 1] ? f.super_diagonal()[j] : 0.0;
            const bool touches_pin = (j > 0 && f.pinned()[j - 1]) || (j + 1 < f.size() && f.pinned()[j + 1]);
            if (!touches_pin)
                CHECK(f.diagonal()[j] + lo + hi == doctest::Approx(0.0).scale(std::abs(f.diagonal()[j])));
            if (j + 1 < f.size() && !f.pinned()[j + 1])
                CHECK(M[j] * f.super_diagonal()[j] ==
                      doctest::Approx(M[j + 1] * f.sub_diagonal()[j + 1]).epsilon(1e-12));
        }
        for (double c : f.conductances())
            CHECK(c >= 0.0);
    }
}

TEST_CASE("energy")
{
    const auto f = assemble_form(build_grid(kUnit, kId, kUniform, 100), {});
    std::vector<double> c(f.size(), 3.0), x(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        x[i] = f.grid().points[i];
    CHECK(energy(f, c, c) == 0.0);
    CHECK(energy(f, x, x) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS(energy(f, std::vector<double>(3), std::vector<double>(3)));
}

TEST_CASE("Markov property and positivity of the energy")
{
    std::mt19937_64 rng(2024);
    int violations = 0;
    for (const auto& f : golden_forms()) {
        for (int trial = 0; trial < 1000; ++trial) {
            auto u = random_vector(rng, f.size(), -0.5, 1.5);
            for (std::size_t j = 0; j < f.size(); ++j)
                if (f.pinned()[j])
                    u[j] = 0.0;
            auto v = u;
            for (auto& x : v)
                x = std::clamp(x, 0.0, 1.0);
            const double eu = energy(f, u, u);
            if (energy(f, v, v) > eu * (1 + 1e-14) || eu < 0.0)
                ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("flat stretches merge into one sticky state")
{
    const auto flat = derive_subscale(kId, IntervalUnion({{0, 0.4}, {0.6, 1}}), 0.5);
    const auto grid = build_grid(kUnit, flat, kUniform, 40);
    const auto merged = assemble_form(grid, {});
    CHECK(merged.size() == grid.size() - 8);

    double total = 0.0;
    for (double m : merged.masses())
        total += m;
    double point_total = 0.0;
    for (double m : grid.cell_masses)
        point_total += m;
    CHECK(total == doctest::Approx(point_total).epsilon(1e-14));

    const auto& big = merged.groups()[merged.state_of_point()[20]];
    CHECK(big.count() == 9);
    CHECK(merged.masses()[merged.state_of_point()[20]] == doctest::Approx(0.2 + 0.025).epsilon(1e-14));

    // slope 1e-8 on the flat stretch instead of merging
    std::vector<Knot> knots{{0, flat(0)}, {0.4, flat(0.4)}, {0.6, flat(0.6) + 2e-9}, {1, flat(1) + 2e-9}};
    const auto tilted = ScaleFunction::from_knots(knots, 0.5);
    const auto unmerged = assemble_form(with_scale(grid, tilted), {});
    REQUIRE(unmerged.size() == grid.size());

    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::sin(3.0 * grid.points[i]) + grid.points[i];
    const SemigroupEvolver em(merged, Scheme::ExactSmall), eu(unmerged, Scheme::ExactSmall);
    for (double t : {0.01, 0.1, 0.5}) {
        const auto a = merged.lift(em.evolve(merged.project(f), t));
        const auto b = eu.evolve(f, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            worst = std::max(worst, std::abs(a[i] - b[i]));
        CHECK(worst < 1e-4);
    }

    // energy of a group-constant function is the point-level sum over Δs > 0
    std::mt19937_64 rng(8);
    const auto states = random_vector(rng, merged.size(), -1, 1);
    const auto lifted = merged.lift(states);
    double direct = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid.scale_gaps[i] > 0)
            direct += 0.5 * std::pow(lifted[i + 1] - lifted[i], 2) / grid.scale_gaps[i];
    CHECK(energy(merged, states, states) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("forms of nested sets agree on the coarser domain")
{
    const IntervalUnion G({{0, 0.3}, {0.35, 0.6}, {0.7, 1}});
    const IntervalUnion Gp({{0, 0.3}, {0.4, 0.6}, {0.8, 1}});
    const auto sG = derive_subscale(kId, G, 0.5), sGp = derive_subscale(kId, Gp, 0.5);
    std::vector<double> extra{0.3, 0.35, 0.4, 0.6, 0.7, 0.8};
    const auto grid = build_grid(kUnit, kId, kUniform, 80, extra);
    const auto fG = assemble_form(with_scale(grid, sG), {});
    const auto fGp = assemble_form(with_scale(grid, sGp), {});
    CHECK(fGp.size() < fG.size());

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const auto coarse = random_vector(rng, fGp.size(), -1, 1);
        const auto points = fGp.lift(coarse);
        const auto fine = fG.project(points);
        const auto back = fG.lift(fine);
        for (std::size_t i = 0; i < points.size(); ++i)
            CHECK(back[i] == doctest::Approx(points[i]).epsilon(1e-14));
        CHECK(energy(fG, fine, fine) == doctest::Approx(energy(fGp, coarse, coarse)).epsilon(1e-12));
    }
}

TEST_CASE("Dirichlet pins the boundary state")
{
    const auto f = assemble_form(build_grid(kUnit, kId, kUniform, 10),
                                 {BoundaryKind::Dirichlet, BoundaryKind::Neumann});
    CHECK(f.pinned().front());
    CHECK_FALSE(f.pinned().back());
    std::vector<double> u(f.size(), 1.0);
    u[0] = 0.0;
    const auto Lu = f.apply(u);
    CHECK(Lu[0] == 0.0);
    CHECK(Lu[1] < 0.0);
}

TEST_CASE("degenerate scale is rejected, wide-sense assembly accepts it")
{
    const auto zero = derive_subscale(kId, IntervalUnion{}, 0.5);
    const auto grid = build_grid(kUnit, kId, kUniform, 10);
    CHECK_THROWS(assemble_form(with_scale(grid, zero), {}));
    const auto frozen = assemble_wide_sense(with_scale(grid, zero), {});
    CHECK(frozen.size() == 1);
    CHECK(frozen.masses()[0] == doctest::Approx(1.0));
}

TEST_CASE("classify_boundary")
{
    const auto left = classify_boundary(kId, kUniform, Side::Left, 1.0 - 1e-12);
    CHECK(left.approachable);
    CHECK(left.test_integral == doctest::Approx(0.5).epsilon(1e-10));
    const auto r = classify_boundary(kId, kUniform, Side::Right, 0.5);
    CHECK(r.test_integral == doctest::Approx(0.125));

    const auto half_line = DomainSpec::make(-kInf, 1.0, -1.0, 1.0);
    const auto s = ScaleFunction::identity(half_line, 0.0);
    const auto div = classify_boundary(s, kUniform, Side::Left, 0.5);
    CHECK_FALSE(div.approachable);
    CHECK(std::isinf(div.test_integral));
    const auto with_atom = classify_boundary(s, kUniform.with_atoms({{-3.0, 5.0}}), Side::Left, 0.5);
    CHECK(with_atom.approachable == div.approachable);
}

TEST_CASE("json round trip of a form")
{
    const auto f = assemble_form(build_grid(kUnit, kId, kUniform, 5), {});
    const auto j = to_json(f);
    CHECK(j.contains("diagonal"));
    CHECK(j["state_masses"].size() == f.size());
}
