#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regsub/mosco.hpp"
#include "regsub/scenario.hpp"
#include "regsub/semigroup.hpp"
#include "regsub/weak_convergence.hpp"

namespace py = pybind11;
using namespace regsub;

namespace {

IntervalUnion to_union(const std::vector<std::pair<double, double>>& pieces)
{
    std::vector<Interval> v;
    for (const auto& [lo, hi] : pieces)
        v.push_back({lo, hi});
    return IntervalUnion(std::move(v));
}

std::vector<std::pair<double, double>> from_union(const IntervalUnion& u)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& p : u.pieces())
        out.emplace_back(p.lo, p.hi);
    return out;
}

SetOpKind op_kind(const std::string& s)
{
    if (s == "union")
        return SetOpKind::Union;
    if (s == "intersect")
        return SetOpKind::Intersect;
    if (s == "diff")
        return SetOpKind::Diff;
    throw std::invalid_argument("kind must be union, intersect or diff");
}

BoundaryFlags flags(const std::string& left, const std::string& right)
{
    return {boundary_from_string(left), boundary_from_string(right)};
}

}  // namespace

PYBIND11_MODULE(_regsub, m)
{
    m.doc() = "Scale/speed diffusions, Dirichlet subspaces and their monotone limits";

    py::class_<DomainSpec>(m, "DomainSpec")
        .def(py::init(&DomainSpec::make), py::arg("a"), py::arg("b"), py::arg("window_lo"),
             py::arg("window_hi"))
        .def_readonly("a", &DomainSpec::a)
        .def_readonly("b", &DomainSpec::b)
        .def_readonly("window_lo", &DomainSpec::window_lo)
        .def_readonly("window_hi", &DomainSpec::window_hi);

    m.def(
        "set_op",
        [](const std::vector<std::pair<double, double>>& lhs,
           const std::vector<std::pair<double, double>>& rhs, const std::string& kind,
           const DomainSpec& window) {
            return from_union(set_op(to_union(lhs), to_union(rhs), op_kind(kind), window));
        },
        py::arg("lhs"), py::arg("rhs"), py::arg("kind"), py::arg("window"));

    py::class_<ScaleFunction>(m, "ScaleFunction")
        .def_static("identity",
                    py::overload_cast<double, double, double>(&ScaleFunction::identity),
                    py::arg("lo"), py::arg("hi"), py::arg("base_point"))
        .def_static(
            "from_knots",
            [](const std::vector<std::pair<double, double>>& knots, double e) {
                std::vector<Knot> k;
                for (const auto& [x, s] : knots)
                    k.push_back({x, s});
                return ScaleFunction::from_knots(std::move(k), e);
            },
            py::arg("knots"), py::arg("base_point"))
        .def("__call__", &ScaleFunction::operator(), py::arg("x"))
        .def("inverse", &ScaleFunction::inverse, py::arg("y"))
        .def_property_readonly("strict", &ScaleFunction::strict)
        .def_property_readonly("base_point", &ScaleFunction::base_point)
        .def_property_readonly("knots", [](const ScaleFunction& s) {
            std::vector<std::pair<double, double>> out;
            for (const auto& k : s.knots())
                out.emplace_back(k.x, k.s);
            return out;
        });

    m.def(
        "stieltjes_measure",
        [](const ScaleFunction& s, const std::vector<std::pair<double, double>>& A) {
            return stieltjes_measure(s, to_union(A));
        },
        py::arg("s"), py::arg("A"));
    m.def(
        "derive_subscale",
        [](const ScaleFunction& s, const std::vector<std::pair<double, double>>& G, double e) {
            return derive_subscale(s, to_union(G), e);
        },
        py::arg("s"), py::arg("G"), py::arg("e"));

    py::class_<SpeedMeasure>(m, "SpeedMeasure")
        .def_static("uniform", &SpeedMeasure::uniform, py::arg("density") = 1.0)
        .def_static("step", &SpeedMeasure::step, py::arg("breaks"), py::arg("values"))
        .def("mass", &SpeedMeasure::mass, py::arg("a"), py::arg("b"));

    py::class_<CharacteristicFamily>(m, "CharacteristicFamily")
        .def_property_readonly("sets",
                               [](const CharacteristicFamily& f) {
                                   std::vector<std::vector<std::pair<double, double>>> out;
                                   for (const auto& s : f.sets)
                                       out.push_back(from_union(s));
                                   return out;
                               })
        .def_readonly("n_values", &CharacteristicFamily::n_values)
        .def_property_readonly("direction",
                               [](const CharacteristicFamily& f) { return to_string(f.direction); })
        .def_property_readonly("limit",
                               [](const CharacteristicFamily& f) { return from_union(f.limit); });

    m.def("example26_family", &example26_family, py::arg("window"), py::arg("K"),
          py::arg("n_list"));
    m.def(
        "single_removed_interval_family",
        [](const DomainSpec& w, double c, double width, const std::vector<int>& n_list,
           const std::string& direction) {
            return single_removed_interval_family(w, c, width, n_list,
                                                  direction_from_string(direction));
        },
        py::arg("window"), py::arg("center"), py::arg("width"), py::arg("n_list"),
        py::arg("direction"));

    py::class_<Grid>(m, "Grid")
        .def_readonly("points", &Grid::points)
        .def_readonly("cell_masses", &Grid::cell_masses)
        .def_readonly("scale_gaps", &Grid::scale_gaps);
    m.def(
        "build_grid",
        [](const DomainSpec& d, const ScaleFunction& s, const SpeedMeasure& sm, int N) {
            return build_grid(d, s, sm, N);
        },
        py::arg("domain"), py::arg("s"), py::arg("m"), py::arg("N"));

    py::class_<DiscreteForm>(m, "DiscreteForm")
        .def_property_readonly("size", &DiscreteForm::size)
        .def_property_readonly("grid", &DiscreteForm::grid)
        .def_property_readonly("masses", &DiscreteForm::masses)
        .def_property_readonly("conductances", &DiscreteForm::conductances)
        .def("project", [](const DiscreteForm& f, const std::vector<double>& v) { return f.project(v); })
        .def("lift", [](const DiscreteForm& f, const std::vector<double>& v) { return f.lift(v); })
        .def("apply", [](const DiscreteForm& f, const std::vector<double>& v) { return f.apply(v); });
    m.def(
        "assemble_form",
        [](const Grid& g, const std::string& left, const std::string& right) {
            return assemble_form(g, flags(left, right));
        },
        py::arg("grid"), py::arg("left") = "neumann", py::arg("right") = "neumann");
    m.def(
        "energy",
        [](const DiscreteForm& f, const std::vector<double>& u, const std::vector<double>& v) {
            return energy(f, u, v);
        },
        py::arg("form"), py::arg("u"), py::arg("v"));
    m.def(
        "classify_boundary",
        [](const ScaleFunction& s, const SpeedMeasure& sm, const std::string& side, double c) {
            const auto bc = classify_boundary(s, sm, side == "left" ? Side::Left : Side::Right, c);
            return py::make_tuple(bc.approachable, bc.test_integral);
        },
        py::arg("s"), py::arg("m"), py::arg("endpoint"), py::arg("c"));

    py::class_<SemigroupEvolver>(m, "SemigroupEvolver")
        .def(py::init([](const DiscreteForm& f, const std::string& scheme) {
                 return SemigroupEvolver(f, scheme == "exact_small" ? Scheme::ExactSmall
                                                                    : Scheme::CrankNicolson);
             }),
             py::arg("form"), py::arg("scheme") = "crank_nicolson")
        .def(
            "evolve",
            [](const SemigroupEvolver& ev, const std::vector<double>& f, double t) {
                return ev.evolve(f, t);
            },
            py::arg("f"), py::arg("t"));
    m.def(
        "l2m_distance",
        [](const std::vector<double>& m_, const std::vector<double>& u,
           const std::vector<double>& v) { return l2m_distance(m_, u, v); },
        py::arg("masses"), py::arg("u"), py::arg("v"));

    m.def(
        "mosco_distances",
        [](const CharacteristicFamily& fam, const DomainSpec& d, const ScaleFunction& s,
           const SpeedMeasure& sm, int N, double e, const std::vector<double>& times) {
            const auto ff = assemble_family(fam, d, s, sm, N, BoundaryFlags{}, e);
            const auto r = mosco_certificate(ff.forms, ff.limit, standard_dictionary(ff.limit.grid()),
                                             times, Scheme::CrankNicolson, ff.n_values);
            return py::make_tuple(r.monotone_ok, r.final_max, r.distances);
        },
        py::arg("family"), py::arg("domain"), py::arg("s"), py::arg("m"), py::arg("N"),
        py::arg("e"), py::arg("times") = kStandardTimes);
    m.def(
        "freeze_distances",
        [](const CharacteristicFamily& fam, const DomainSpec& d, const ScaleFunction& s,
           const SpeedMeasure& sm, int N, double e, double center, double half_width, double t) {
            const auto ff = assemble_family(fam, d, s, sm, N, BoundaryFlags{}, e);
            return freeze_check(ff, hat_function(ff.limit.grid(), center, half_width), t);
        },
        py::arg("family"), py::arg("domain"), py::arg("s"), py::arg("m"), py::arg("N"),
        py::arg("e"), py::arg("center"), py::arg("half_width"), py::arg("t"));
    m.def(
        "core_approximation_energy",
        [](double center, double radius, const ScaleFunction& sn, const ScaleFunction& sinf,
           const ScaleFunction& s, const SpeedMeasure& sm) {
            const auto c = core_approximation_energy(BumpSpec{center, radius}, sn, sinf, s, sm);
            return py::make_tuple(c.l2_gap, c.Phi, c.Psi);
        },
        py::arg("center"), py::arg("radius"), py::arg("s_n"), py::arg("s_inf"), py::arg("s"),
        py::arg("m"));

    m.def(
        "ks_two_sample",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto r = ks_two_sample(x, y);
            return py::make_tuple(r.stat, r.critical_5pct);
        },
        py::arg("x"), py::arg("y"));
    m.def("brownian_modulus_bound", &brownian_modulus_bound, py::arg("C"), py::arg("T"),
          py::arg("delta"), py::arg("rho"), py::arg("n_mc"), py::arg("seed"));
    m.def(
        "modulus_statistic",
        [](const DiscreteForm& f, double x0, double T, std::size_t n_paths, std::uint64_t seed,
           double delta, double rho) {
            const auto law = InitialLaw::point_mass_at(f.grid(), x0);
            const auto ens = simulate_ensemble(std::make_shared<DiscreteForm>(f), law, T, n_paths, seed);
            return modulus_statistic(ens, T, delta, rho);
        },
        py::arg("form"), py::arg("x0"), py::arg("T"), py::arg("n_paths"), py::arg("seed"),
        py::arg("delta"), py::arg("rho"));

    m.def(
        "validate_config",
        [](const std::string& text) { return validate_config(nlohmann::json::parse(text)).normalized.dump(); },
        py::arg("config_json"));
    m.def(
        "run_scenario",
        [](const std::string& text, const std::string& mode) {
            RunMode rm = RunMode::All;
            if (mode == "mosco")
                rm = RunMode::Mosco;
            else if (mode == "paths")
                rm = RunMode::Paths;
            else if (mode == "weakconv")
                rm = RunMode::WeakConv;
            const auto r = run_scenario(validate_config(nlohmann::json::parse(text)), rm);
            py::list suites;
            for (const auto& s : r.suites)
                suites.append(py::make_tuple(s.suite, s.pass, s.detail));
            return py::make_tuple(r.exit_code, suites);
        },
        py::arg("config_json"), py::arg("mode") = "run");

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}
