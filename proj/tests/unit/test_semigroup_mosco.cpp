#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <doctest.h>

#include "regsub/mosco.hpp"
#include "regsub/semigroup.hpp"

using namespace regsub;

namespace {

const DomainSpec kUnit = DomainSpec::unit_interval();
const ScaleFunction kId = ScaleFunction::identity(0.0, 1.0, 0.5);
const SpeedMeasure kUniform = SpeedMeasure::uniform(1.0);

std::vector<DiscreteForm> golden_forms()
{
    std::vector<DiscreteForm> out;
    out.push_back(assemble_form(build_grid(kUnit, kId, kUniform, 80), {}));
    const auto flat = derive_subscale(kId, IntervalUnion({{0, 0.3}, {0.45, 1}}), 0.5);
    out.push_back(assemble_form(build_grid(kUnit, flat, kUniform, 80), {}));
    const auto m = SpeedMeasure::step({0.5}, {1.0, 4.0}).with_atoms({{0.25, 0.5}});
    out.push_back(assemble_form(build_grid(kUnit, kId, m, 80), {}));
    out.push_back(assemble_form(build_grid(kUnit, kId, kUniform, 80),
                                {BoundaryKind::Dirichlet, BoundaryKind::Neumann}));
    return out;
}

std::vector<double> random_state_function(std::mt19937_64& rng, const DiscreteForm& f, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(f.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = f.pinned()[j] ? 0.0 : u(rng);
    return v;
}

// Generator of a hand-set chain as a dense matrix, from masses and conductances.
Eigen::MatrixXd dense_generator(const std::vector<double>& M, const std::vector<double>& c)
{
    const auto S = static_cast<Eigen::Index>(M.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(S, S);
    for (Eigen::Index j = 0; j + 1 < S; ++j) {
        L(j, j + 1) = c[j] / M[j];
        L(j + 1, j) = c[j] / M[j + 1];
    }
    for (Eigen::Index j = 0; j < S; ++j)
        L(j, j) = -L.row(j).sum();
    return L;
}

double bump_derivative(double y, double center, double radius)
{
    const double r = (y - center) / radius;
    if (std::abs(r) >= 1.0)
        return 0.0;
    const double phi = std::exp(1.0 - 1.0 / (1.0 - r * r));
    return phi * (-2.0 * r / ((1.0 - r * r) * (1.0 - r * r))) / radius;
}

}  // namespace

TEST_CASE("evolve at t = 0 and argument checks")
{
    const auto f = golden_forms()[0];
    const SemigroupEvolver ev(f);
    std::vector<double> u(f.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = std::cos(7.0 * i);
    CHECK(ev.evolve(u, 0.0) == u);
    CHECK_THROWS(ev.evolve(u, -0.1));
    u[3] = NAN;
    CHECK_THROWS(ev.evolve(u, 0.1));
    CHECK_THROWS(SemigroupEvolver(f, Scheme::ExactSmall));
}

TEST_CASE("heat semigroup on (0, pi) with Dirichlet ends")
{
    const double pi = std::numbers::pi;
    const auto d = DomainSpec::make(0.0, pi, 0.0, pi);
    const auto s = ScaleFunction::identity(0.0, pi, pi / 2);
    const auto form = assemble_form(build_grid(d, s, kUniform, 400),
                                    {BoundaryKind::Dirichlet, BoundaryKind::Dirichlet});
    std::vector<double> f(form.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::sin(form.grid().points[i]);
    const auto Tf = SemigroupEvolver(form).evolve(f, 1.0);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        err = std::max(err, std::abs(Tf[i] - std::exp(-0.5) * f[i]));
    CHECK(err <= 5e-3);
}

TEST_CASE("Neumann evolution conserves mass")
{
    std::mt19937_64 rng(4);
    for (const auto& form : golden_forms()) {
        if (form.pinned().front())
            continue;
        const auto f = random_state_function(rng, form, 0, 1);
        const auto Tf = SemigroupEvolver(form).evolve(f, 0.5);
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            a += form.masses()[j] * f[j];
            b += form.masses()[j] * Tf[j];
        }
        CHECK(std::abs(a - b) <= 1e-10 * 500);
    }
}

TEST_CASE("l2m_distance")
{
    const std::vector<double> u{1.0, 2.0, 3.0};
    CHECK(l2m_distance(std::vector<double>{1, 1, 1}, u, u) == 0.0);
    CHECK(l2m_distance(std::vector<double>{1, 1, 1}, u, std::vector<double>{1, 3, 3}) == 1.0);
    CHECK(l2m_distance(std::vector<double>{1, 4}, std::vector<double>{1, 1}, std::vector<double>{0, 0}) ==
          doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    CHECK_THROWS(l2m_distance(std::vector<double>{1, 4}, u, u));
}

TEST_CASE("contraction, positivity and the semigroup property")
{
    std::mt19937_64 rng(99);
    for (const auto& form : golden_forms()) {
        const SemigroupEvolver ev(form);
        const auto& M = form.masses();
        for (int trial = 0; trial < 20; ++trial) {
            const auto f = random_state_function(rng, form, -1, 1);
            for (double t : {0.01, 0.1, 0.7})
                CHECK(l2m_norm(M, ev.evolve(f, t)) <= l2m_norm(M, f) * (1 + 1e-12));

            const auto g = random_state_function(rng, form, 0, 1);
            for (double v : ev.evolve(g, 0.2))
                CHECK(v >= -1e-12);

            const auto ts = ev.evolve(ev.evolve(f, 0.2), 0.3);
            CHECK(l2m_distance(M, ev.evolve(f, 0.5), ts) <= 1e-6);
        }
    }
}

TEST_CASE("exact_small agrees with Crank-Nicolson")
{
    const auto form = assemble_form(build_grid(kUnit, kId, kUniform, 40), {});
    std::vector<double> f(form.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = form.grid().points[i] < 0.5 ? 1.0 : 0.0;
    const auto a = SemigroupEvolver(form).evolve(f, 0.3);
    const auto b = SemigroupEvolver(form, Scheme::ExactSmall).evolve(f, 0.3);
    CHECK(l2m_distance(form.masses(), a, b) < 1e-6);
}

TEST_CASE("mosco_certificate on hand-set 3-state chains")
{
    const std::vector<double> M{1.0, 2.0, 0.5};
    const std::vector<std::vector<double>> cs{{3.0, 0.2}, {1.5, 0.6}, {1.1, 0.9}};
    const std::vector<double> c_lim{1.0, 1.0};
    std::vector<DiscreteForm> family;
    for (const auto& c : cs)
        family.push_back(DiscreteForm::from_conductances(M, c));
    const auto limit = DiscreteForm::from_conductances(M, c_lim);
    const std::vector<TestFunction> dict{{"a", {1.0, 0.0, 0.0}}, {"b", {0.3, -1.0, 2.0}}};
    const std::vector<double> times{0.05, 0.5, 2.0};
    const auto rep = mosco_certificate(family, limit, dict, times, Scheme::ExactSmall, {1, 2, 3});

    const Eigen::MatrixXd Ll = dense_generator(M, c_lim);
    for (std::size_t n = 0; n < cs.size(); ++n) {
        const Eigen::MatrixXd Ln = dense_generator(M, cs[n]);
        for (std::size_t k = 0; k < dict.size(); ++k) {
            const Eigen::Vector3d f(dict[k].values[0], dict[k].values[1], dict[k].values[2]);
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                const Eigen::MatrixXd En = (times[ti] * Ln).exp();
                const Eigen::MatrixXd El = (times[ti] * Ll).exp();
                const Eigen::VectorXd diff = En * f - El * f;
                double acc = 0.0;
                for (int j = 0; j < 3; ++j)
                    acc += M[j] * diff[j] * diff[j];
                CHECK(std::abs(rep.distances[n][k][ti] - std::sqrt(acc)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("mosco_certificate of a constant family is zero")
{
    const auto limit = assemble_form(build_grid(kUnit, kId, kUniform, 100), {});
    const auto dict = standard_dictionary(limit.grid());
    CHECK(dict.size() == 13);
    const auto rep = mosco_certificate({limit, limit, limit}, limit, dict, kStandardTimes);
    CHECK(rep.monotone_ok);
    CHECK(rep.final_max <= 1e-8);

    const auto other = assemble_form(build_grid(kUnit, kId, kUniform, 50), {});
    CHECK_THROWS(mosco_certificate({other}, limit, dict, kStandardTimes));

    std::ostringstream os;
    write_csv(os, rep);
    const auto text = os.str();
    CHECK(text.rfind("n,test_id,t,distance\n", 0) == 0);
    CHECK(text.find("summary,monotone_ok,1,") != std::string::npos);
}

TEST_CASE("increasing removed-interval family has a monotone certificate")
{
    const std::vector<int> ns{1, 2, 4, 8, 16};
    const auto fam = single_removed_interval_family(kUnit, 0.5, 0.1, ns, Direction::Increasing);
    const auto ff = assemble_family(fam, kUnit, kId, kUniform, 200, {}, 0.5);
    const auto rep = mosco_certificate(ff.forms, ff.limit, standard_dictionary(ff.limit.grid()),
                                       kStandardTimes, Scheme::CrankNicolson, ff.n_values);
    CHECK(rep.monotone_ok);
    CHECK(rep.final_max < 1e-2);
}

TEST_CASE("dyadic family against the frozen limit")
{
    const auto fam = example26_family(kUnit, 64, {1, 2, 4, 8, 16, 32});
    const auto ff = assemble_family(fam, kUnit, kId, kUniform, 400, {}, 0.5);
    CHECK(ff.limit.size() == 1);
    const auto rep = mosco_certificate(ff.forms, ff.limit, standard_dictionary(ff.limit.grid()),
                                       kStandardTimes, Scheme::CrankNicolson, ff.n_values);
    // worst-case distance drops once n passes the coarse stage
    std::vector<double> worst;
    for (const auto& per_n : rep.distances) {
        double w = 0.0;
        for (const auto& per_f : per_n)
            for (double d : per_f)
                w = std::max(w, d);
        worst.push_back(w);
    }
    CHECK(worst.back() < worst.front());
    for (std::size_t i = 3; i < worst.size(); ++i)
        CHECK(worst[i] < worst[i - 1]);
}

TEST_CASE("freeze_check trivial inputs")
{
    const auto fam = example26_family(kUnit, 16, {1, 2, 4});
    const auto ff = assemble_family(fam, kUnit, kId, kUniform, 200, {}, 0.5);
    const std::size_t P = ff.limit.grid().size();
    for (double d : freeze_check(ff, std::vector<double>(P, 0.0), 0.1))
        CHECK(d == 0.0);
    for (double d : freeze_check(ff, std::vector<double>(P, 2.5), 0.1))
        CHECK(d <= 1e-9);

    const auto inc = single_removed_interval_family(kUnit, 0.5, 0.1, {1, 2}, Direction::Increasing);
    const auto fi = assemble_family(inc, kUnit, kId, kUniform, 100, {}, 0.5);
    CHECK_THROWS(freeze_check(fi, std::vector<double>(fi.limit.grid().size(), 1.0), 0.1));
}

TEST_CASE("core approximation energies")
{
    const BumpSpec phi{0.1, 0.25};
    const auto G = IntervalUnion({{0, 0.5}, {0.5, 1}});
    const auto s_inf = derive_subscale(kId, G, 0.5);
    const auto zero = core_approximation_energy(phi, s_inf, s_inf, kId, kUniform);
    CHECK(zero.l2_gap == 0.0);
    CHECK(zero.Phi == 0.0);
    CHECK(zero.Psi == 0.0);

    const double dphi0 = bump_derivative(0.0, phi.center, phi.radius);
    double prev_phi = INFINITY;
    for (int n : {1, 2, 4, 8, 16, 32}) {
        const double w = 0.1 / n;
        const auto s_n = derive_subscale(kId, IntervalUnion({{0, 0.5}, {0.5 + w, 1}}), 0.5);
        const auto c = core_approximation_energy(phi, s_n, s_inf, kId, kUniform);
        // s_n is flat (= s_n(0.5) = 0) on the removed piece
        CHECK(std::abs(c.Phi - w * dphi0 * dphi0) <= 1e-6);
        double sup = 0.0;
        for (int i = 0; i <= 10000; ++i)
            sup = std::max(sup, std::abs(bump_derivative(-0.15 + 0.5 * i / 10000.0, 0.1, 0.25)));
        CHECK(c.Phi <= sup * sup * w * (1 + 1e-9));
        CHECK(c.Phi <= prev_phi);
        prev_phi = c.Phi;
    }

    const BumpSpec too_wide{0.4, 0.3};
    const auto s_n = derive_subscale(kId, IntervalUnion({{0, 0.5}, {0.6, 1}}), 0.5);
    CHECK_THROWS(core_approximation_energy(too_wide, s_n, s_inf, kId, kUniform));
}

TEST_CASE("bump spec")
{
    const BumpSpec b{0.0, 2.0};
    CHECK(b.value(0.0) == doctest::Approx(1.0));
    CHECK(b.value(2.0) == 0.0);
    CHECK(b.derivative(0.7) == doctest::Approx(bump_derivative(0.7, 0.0, 2.0)).epsilon(1e-12));
}
