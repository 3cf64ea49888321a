#include "regsub/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include "regsub/path.hpp"
#include "regsub/weak_convergence.hpp"

namespace regsub {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class NumericalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

const json& require(const json& j, const std::string& key, const std::string& path)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(join(path, key), "missing required field");
    return j.at(key);
}

double number(const json& j, const std::string& path)
{
    if (!j.is_number())
        throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw ConfigError(path, "expected a finite number");
    return v;
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path)
{
    if (!j.contains(key))
        return fallback;
    return number(j.at(key), join(path, key));
}

std::vector<double> numbers(const json& j, const std::string& path)
{
    if (!j.is_array())
        throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], index(path, i)));
    return out;
}

std::vector<int> positive_ints(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty())
        throw ConfigError(path, "expected a nonempty array of positive integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer() || j[i].get<long long>() < 1)
            throw ConfigError(index(path, i), "expected a positive integer");
        if (!out.empty() && j[i].get<int>() <= out.back())
            throw ConfigError(index(path, i), "n_list must be strictly increasing");
        out.push_back(j[i].get<int>());
    }
    return out;
}

double endpoint(const json& j, double infinite, const std::string& path)
{
    if (j.is_null())
        return infinite;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "-inf" && infinite < 0)
            return infinite;
        if (s == "inf" && infinite > 0)
            return infinite;
        throw ConfigError(path, "expected a number, null or \"" +
                                    std::string(infinite < 0 ? "-inf" : "inf") + "\"");
    }
    return number(j, path);
}

std::string string_or(const json& j, const std::string& key, const std::string& fallback,
                      const std::string& path)
{
    if (!j.contains(key))
        return fallback;
    if (!j.at(key).is_string())
        throw ConfigError(join(path, key), "expected a string");
    return j.at(key).get<std::string>();
}

DomainSpec parse_domain(const json& j)
{
    const std::string path = "domain";
    const double a = endpoint(require(j, "a", path), -kInf, "domain.a");
    const double b = endpoint(require(j, "b", path), kInf, "domain.b");
    double lo = a, hi = b;
    if (j.contains("window")) {
        const auto w = numbers(j.at("window"), "domain.window");
        if (w.size() != 2)
            throw ConfigError("domain.window", "expected [lo, hi]");
        lo = w[0];
        hi = w[1];
    } else if (std::isinf(a) || std::isinf(b)) {
        throw ConfigError("domain.window", "required when an endpoint is infinite");
    }
    try {
        return DomainSpec::make(a, b, lo, hi);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("domain", e.what());
    }
}

ScaleFunction parse_scale(const json& root, const DomainSpec& domain, double e)
{
    if (!root.contains("scale"))
        return ScaleFunction::identity(domain, e);
    const auto& j = root.at("scale");
    const auto kind = string_or(j, "kind", "identity", "scale");
    if (kind == "identity")
        return ScaleFunction::identity(domain, e);
    if (kind != "knots")
        throw ConfigError("scale.kind", "expected \"identity\" or \"knots\"");
    const auto& arr = require(j, "knots", "scale");
    if (!arr.is_array() || arr.size() < 2)
        throw ConfigError("scale.knots", "expected at least two [x, s] pairs");
    std::vector<Knot> knots;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto p = numbers(arr[i], index("scale.knots", i));
        if (p.size() != 2)
            throw ConfigError(index("scale.knots", i), "expected [x, s]");
        knots.push_back({p[0], p[1]});
    }
    ScaleTails tails;
    if (j.contains("tails")) {
        const auto& t = j.at("tails");
        if (!t.is_array() || t.size() != 2)
            throw ConfigError("scale.tails", "expected [left_slope|null, right_slope|null]");
        if (!t[0].is_null())
            tails.left_slope = number(t[0], "scale.tails[0]");
        if (!t[1].is_null())
            tails.right_slope = number(t[1], "scale.tails[1]");
    }
    try {
        return ScaleFunction::from_knots(std::move(knots), e, tails);
    } catch (const std::exception& ex) {
        throw ConfigError("scale.knots", ex.what());
    }
}

SpeedMeasure parse_speed(const json& root)
{
    SpeedMeasure m = SpeedMeasure::uniform(1.0);
    if (!root.contains("speed"))
        return m;
    const auto& j = root.at("speed");
    const auto kind = string_or(j, "kind", "uniform", "speed");
    try {
        if (kind == "uniform")
            m = SpeedMeasure::uniform(number_or(j, "density", 1.0, "speed"));
        else if (kind == "step")
            m = SpeedMeasure::step(numbers(require(j, "breaks", "speed"), "speed.breaks"),
                                   numbers(require(j, "values", "speed"), "speed.values"));
        else
            throw ConfigError("speed.kind", "expected \"uniform\" or \"step\"");
        if (j.contains("atoms")) {
            std::vector<Atom> atoms;
            const auto& arr = j.at("atoms");
            if (!arr.is_array())
                throw ConfigError("speed.atoms", "expected an array of [x, mass] pairs");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const auto p = numbers(arr[i], index("speed.atoms", i));
                if (p.size() != 2 || !(p[1] > 0.0))
                    throw ConfigError(index("speed.atoms", i), "expected [x, mass > 0]");
                atoms.push_back({p[0], p[1]});
            }
            m = m.with_atoms(std::move(atoms));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError("speed", ex.what());
    }
    return m;
}

CharacteristicFamily parse_family(const json& root, const DomainSpec& domain)
{
    const auto& j = require(root, "family", "");
    const auto kind = string_or(j, "kind", "", "family");
    const bool has_direction = root.contains("direction");
    Direction direction = Direction::Decreasing;
    if (has_direction) {
        try {
            direction = direction_from_string(root.at("direction").get<std::string>());
        } catch (const std::exception&) {
            throw ConfigError("direction", "expected \"decreasing\" or \"increasing\"");
        }
    }

    if (kind == "example26") {
        if (has_direction && direction != Direction::Decreasing)
            throw ConfigError("direction", "the example26 family is decreasing");
        const auto& K = require(j, "K", "family");
        if (!K.is_number_integer() || K.get<int>() < 1)
            throw ConfigError("family.K", "expected a positive integer");
        return example26_family(domain, K.get<int>(),
                                positive_ints(require(j, "n_list", "family"), "family.n_list"));
    }
    if (!has_direction)
        throw ConfigError("direction", "missing required field");

    if (kind == "explicit") {
        const auto& arr = require(j, "sets", "family");
        if (!arr.is_array() || arr.empty())
            throw ConfigError("family.sets", "expected a nonempty array of interval unions");
        std::vector<IntervalUnion> sets;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            try {
                sets.push_back(interval_union_from_json(arr[i]));
            } catch (const std::exception& ex) {
                throw ConfigError(index("family.sets", i), ex.what());
            }
            if (!sets.back().within(domain.window_lo, domain.window_hi))
                throw ConfigError(index("family.sets", i), "set leaves the window");
        }
        if (auto bad = first_nesting_violation(sets, direction))
            throw ConfigError(index("family.sets", *bad),
                              "breaks the " + to_string(direction) + " nesting");
        std::vector<int> n_values;
        if (j.contains("n_list")) {
            n_values = positive_ints(j.at("n_list"), "family.n_list");
            if (n_values.size() != sets.size())
                throw ConfigError("family.n_list", "must have one entry per set");
        }
        return explicit_family(std::move(sets), direction, std::move(n_values));
    }
    if (kind == "single_removed_interval") {
        const double c = number(require(j, "center", "family"), "family.center");
        if (!(c > domain.window_lo && c < domain.window_hi))
            throw ConfigError("family.center", "must lie inside the window");
        if (j.contains("widths")) {
            const auto widths = numbers(j.at("widths"), "family.widths");
            std::vector<IntervalUnion> sets;
            const auto window = IntervalUnion::window(domain);
            for (std::size_t i = 0; i < widths.size(); ++i) {
                if (!(widths[i] >= 0.0) || c + widths[i] >= domain.window_hi)
                    throw ConfigError(index("family.widths", i),
                                      "removed interval must be inside the window");
                sets.push_back(widths[i] > 0.0
                                   ? set_diff(window, IntervalUnion::single(c, c + widths[i]))
                                   : set_diff(window, IntervalUnion{}));
            }
            if (sets.empty())
                throw ConfigError("family.widths", "expected at least one width");
            if (auto bad = first_nesting_violation(sets, direction))
                throw ConfigError(index("family.widths", *bad),
                                  "breaks the " + to_string(direction) + " nesting");
            std::vector<int> n_values;
            if (j.contains("n_list"))
                n_values = positive_ints(j.at("n_list"), "family.n_list");
            return explicit_family(std::move(sets), direction, std::move(n_values));
        }
        const double w = number(require(j, "width", "family"), "family.width");
        if (!(w > 0.0) || c + w >= domain.window_hi)
            throw ConfigError("family.width", "removed interval must be inside the window");
        return single_removed_interval_family(
            domain, c, w, positive_ints(require(j, "n_list", "family"), "family.n_list"),
            direction);
    }
    throw ConfigError("family.kind",
                      "expected \"example26\", \"explicit\" or \"single_removed_interval\"");
}

BoundaryFlags parse_boundary(const json& root)
{
    BoundaryFlags flags;
    if (!root.contains("boundary"))
        return flags;
    const auto& j = root.at("boundary");
    if (!j.is_array() || j.size() != 2)
        throw ConfigError("boundary", "expected [left, right]");
    for (std::size_t i = 0; i < 2; ++i) {
        if (!j[i].is_string())
            throw ConfigError(index("boundary", i), "expected \"neumann\" or \"dirichlet\"");
        try {
            (i == 0 ? flags.left : flags.right) = boundary_from_string(j[i].get<std::string>());
        } catch (const std::exception&) {
            throw ConfigError(index("boundary", i), "expected \"neumann\" or \"dirichlet\"");
        }
    }
    return flags;
}

McSpec parse_mc(const json& j)
{
    McSpec mc;
    if (!j.contains("seed"))
        throw ConfigError("mc.seed", "a seed is required whenever mc is requested");
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
        throw ConfigError("mc.seed", "expected a nonnegative integer");
    mc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_paths")) {
        if (!j.at("n_paths").is_number_integer() || j.at("n_paths").get<long long>() < 1)
            throw ConfigError("mc.n_paths", "expected a positive integer");
        mc.n_paths = j.at("n_paths").get<std::size_t>();
    }
    mc.T = number_or(j, "T", mc.T, "mc");
    if (!(mc.T > 0.0))
        throw ConfigError("mc.T", "must be positive");
    if (j.contains("delta_list"))
        mc.delta_list = numbers(j.at("delta_list"), "mc.delta_list");
    for (std::size_t i = 0; i < mc.delta_list.size(); ++i)
        if (!(mc.delta_list[i] > 0.0))
            throw ConfigError(index("mc.delta_list", i), "must be positive");
    mc.rho = number_or(j, "rho", mc.rho, "mc");
    if (!(mc.rho > 0.0))
        throw ConfigError("mc.rho", "must be positive");
    if (j.contains("times"))
        mc.times = numbers(j.at("times"), "mc.times");
    for (std::size_t i = 0; i < mc.times.size(); ++i)
        if (!(mc.times[i] > 0.0) || mc.times[i] > mc.T)
            throw ConfigError(index("mc.times", i), "must lie in (0, T]");
    if (!std::is_sorted(mc.times.begin(), mc.times.end()))
        throw ConfigError("mc.times", "must be increasing");
    if (j.contains("grid_N")) {
        if (!j.at("grid_N").is_number_integer() || j.at("grid_N").get<int>() < 3)
            throw ConfigError("mc.grid_N", "must be an integer >= 3");
        mc.grid_N = j.at("grid_N").get<int>();
    }
    if (j.contains("n_mc")) {
        if (!j.at("n_mc").is_number_integer() || j.at("n_mc").get<long long>() < 1)
            throw ConfigError("mc.n_mc", "expected a positive integer");
        mc.n_mc = j.at("n_mc").get<std::size_t>();
    }
    return mc;
}

InitialLawSpec parse_law(const json& root, const DomainSpec& domain)
{
    InitialLawSpec spec;
    spec.center = domain.midpoint();
    spec.half_width = 0.25 * domain.width();
    if (!root.contains("initial_law"))
        return spec;
    const auto& j = root.at("initial_law");
    const auto kind = string_or(j, "kind", "hat", "initial_law");
    if (kind == "point") {
        spec.kind = InitialLawSpec::Kind::Point;
        spec.x0 = number(require(j, "x0", "initial_law"), "initial_law.x0");
        if (spec.x0 < domain.window_lo || spec.x0 > domain.window_hi)
            throw ConfigError("initial_law.x0", "must lie in the window");
        return spec;
    }
    if (kind != "hat")
        throw ConfigError("initial_law.kind", "expected \"hat\" or \"point\"");
    spec.center = number_or(j, "center", spec.center, "initial_law");
    spec.half_width = number_or(j, "half_width", spec.half_width, "initial_law");
    spec.perturbation = number_or(j, "perturbation", 0.0, "initial_law");
    if (!(spec.half_width > 0.0))
        throw ConfigError("initial_law.half_width", "must be positive");
    if (spec.center - spec.half_width < domain.window_lo ||
        spec.center + spec.half_width > domain.window_hi)
        throw ConfigError("initial_law", "hat support must lie in the window");
    if (spec.perturbation < 0.0)
        throw ConfigError("initial_law.perturbation", "must be nonnegative");
    return spec;
}

Gates parse_gates(const json& root)
{
    Gates g;
    if (!root.contains("gates"))
        return g;
    const auto& j = root.at("gates");
    g.mosco_final_max = number_or(j, "mosco_final_max", g.mosco_final_max, "gates");
    g.freeze_ratio = number_or(j, "freeze_ratio", g.freeze_ratio, "gates");
    g.core_ratio = number_or(j, "core_ratio", g.core_ratio, "gates");
    g.ks_slack = number_or(j, "ks_slack", g.ks_slack, "gates");
    g.z_max = number_or(j, "z_max", g.z_max, "gates");
    g.qv_rel_error = number_or(j, "qv_rel_error", g.qv_rel_error, "gates");
    return g;
}

}  // namespace

Scenario validate_config(const json& raw)
{
    if (!raw.is_object())
        throw ConfigError("$", "expected a JSON object");
    Scenario sc;
    sc.name = string_or(raw, "name", "scenario", "");
    sc.domain = parse_domain(require(raw, "domain", ""));
    sc.base_point = number_or(raw, "base_point", sc.domain.midpoint(), "");
    if (sc.base_point < sc.domain.window_lo || sc.base_point > sc.domain.window_hi)
        throw ConfigError("base_point", "must lie in the window");
    sc.scale = parse_scale(raw, sc.domain, sc.base_point);
    if (!sc.scale.in_domain(sc.domain.window_lo) || !sc.scale.in_domain(sc.domain.window_hi))
        throw ConfigError("scale.knots", "scale must cover the window");
    sc.speed = parse_speed(raw);
    sc.family = parse_family(raw, sc.domain);
    sc.boundary = parse_boundary(raw);

    if (raw.contains("grid_N")) {
        if (!raw.at("grid_N").is_number_integer() || raw.at("grid_N").get<long long>() < 3)
            throw ConfigError("grid_N", "must be an integer >= 3 to hold the window ends and a "
                                        "mandatory interior point");
        sc.grid_N = raw.at("grid_N").get<int>();
    }
    sc.times = raw.contains("times") ? numbers(raw.at("times"), "times") : kStandardTimes;
    for (std::size_t i = 0; i < sc.times.size(); ++i)
        if (sc.times[i] < 0.0)
            throw ConfigError(index("times", i), "must be nonnegative");
    sc.dictionary = string_or(raw, "dictionary", "standard", "");
    if (sc.dictionary != "standard")
        throw ConfigError("dictionary", "only the \"standard\" preset exists");

    if (raw.contains("freeze")) {
        if (sc.family.direction != Direction::Decreasing)
            throw ConfigError("freeze", "requires a decreasing family");
        const auto& f = raw.at("freeze");
        sc.freeze_t = number(require(f, "t", "freeze"), "freeze.t");
        if (*sc.freeze_t < 0.0)
            throw ConfigError("freeze.t", "must be nonnegative");
        sc.freeze_center = sc.domain.midpoint();
        sc.freeze_half_width = 0.25 * sc.domain.width();
        if (f.contains("hat")) {
            const auto h = numbers(f.at("hat"), "freeze.hat");
            if (h.size() != 2 || !(h[1] > 0.0))
                throw ConfigError("freeze.hat", "expected [center, half_width > 0]");
            sc.freeze_center = h[0];
            sc.freeze_half_width = h[1];
        }
    }
    if (raw.contains("core")) {
        if (sc.family.direction != Direction::Increasing)
            throw ConfigError("core", "requires an increasing family");
        const auto& b = require(raw.at("core"), "bump", "core");
        BumpSpec bump{number(require(b, "center", "core.bump"), "core.bump.center"),
                      number(require(b, "radius", "core.bump"), "core.bump.radius")};
        if (!(bump.radius > 0.0))
            throw ConfigError("core.bump.radius", "must be positive");
        sc.bump = bump;
    }
    if (raw.contains("mc"))
        sc.mc = parse_mc(raw.at("mc"));
    sc.initial_law = parse_law(raw, sc.domain);
    sc.gates = parse_gates(raw);
    sc.output_dir = string_or(raw, "output_dir", "out", "");

    json norm = raw;
    norm["name"] = sc.name;
    norm["domain"] = to_json(sc.domain);
    norm["base_point"] = sc.base_point;
    norm["direction"] = to_string(sc.family.direction);
    norm["boundary"] = {to_string(sc.boundary.left), to_string(sc.boundary.right)};
    norm["grid_N"] = sc.grid_N;
    norm["times"] = sc.times;
    norm["dictionary"] = sc.dictionary;
    if (sc.mc) {
        norm["mc"]["seed"] = sc.mc->seed;
        norm["mc"]["n_paths"] = sc.mc->n_paths;
        norm["mc"]["T"] = sc.mc->T;
        norm["mc"]["delta_list"] = sc.mc->delta_list;
        norm["mc"]["rho"] = sc.mc->rho;
        norm["mc"]["times"] = sc.mc->times;
        norm["mc"]["grid_N"] = sc.mc->grid_N;
        norm["mc"]["n_mc"] = sc.mc->n_mc;
    }
    norm["output_dir"] = sc.output_dir.string();
    sc.normalized = std::move(norm);
    return sc;
}

LawFamily build_laws(const InitialLawSpec& spec, const Grid& grid, const std::vector<int>& n_values)
{
    LawFamily out;
    if (spec.kind == InitialLawSpec::Kind::Point) {
        out.limit = InitialLaw::point_mass_at(grid, spec.x0);
        out.members.assign(n_values.size(), out.limit);
        return out;
    }
    const auto g = normalize_density(grid, hat_function(grid, spec.center, spec.half_width));
    out.limit = InitialLaw::from_density(grid, g);
    if (spec.perturbation == 0.0) {
        out.members.assign(n_values.size(), out.limit);
        return out;
    }
    // b = h1 - c h2 with zero m-mean, then ∫|b| dm = 1.
    const double q = 0.25 * spec.half_width;
    const auto h1 = hat_function(grid, spec.center - q, 2.0 * q);
    const auto h2 = hat_function(grid, spec.center + q, 2.0 * q);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        m1 += grid.cell_masses[i] * h1[i];
        m2 += grid.cell_masses[i] * h2[i];
    }
    std::vector<double> b(grid.size());
    double l1 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        b[i] = h1[i] - (m1 / m2) * h2[i];
        l1 += grid.cell_masses[i] * std::abs(b[i]);
    }
    for (int n : n_values) {
        std::vector<double> gn(g);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            gn[i] += spec.perturbation / n * b[i] / l1;
            if (gn[i] < 0.0)
                throw ConfigError("initial_law.perturbation",
                                  "makes g_" + std::to_string(n) + " negative");
        }
        // Renormalize against rounding only; ∫ b dm = 0 exactly up to it.
        out.members.push_back(InitialLaw::from_density(grid, normalize_density(grid, gn)));
    }
    return out;
}

const ScaleFunction& transform_scale(const FormFamily& family)
{
    return family.direction == Direction::Decreasing ? family.limit_scale : family.scales.front();
}

std::string sha256_file(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + file.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest init failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void check_finite(double v, const std::string& what)
{
    if (!std::isfinite(v))
        throw NumericalError("non-finite value in " + what);
}

class Runner {
public:
    Runner(const Scenario& sc, RunMode mode) : sc_(sc), mode_(mode) {}

    RunResult run()
    {
        fs::create_directories(sc_.output_dir);
        try {
            boundary();
            if (mode_ == RunMode::All || mode_ == RunMode::Mosco)
                mosco();
            if (mode_ != RunMode::Mosco) {
                if (!sc_.mc)
                    summary("paths", true, "no mc section; path suites skipped");
                else
                    paths();
            }
        } catch (const NumericalError& e) {
            result_.exit_code = kExitNumerical;
            summary("numerical", false, e.what());
        }
        manifest();
        if (result_.exit_code == kExitPass)
            for (const auto& s : result_.suites)
                if (!s.pass)
                    result_.exit_code = kExitGateFailed;
        return result_;
    }

private:
    std::ofstream open(const std::string& name)
    {
        const auto p = sc_.output_dir / name;
        std::ofstream os(p, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write " + p.string());
        result_.artifacts.push_back(p);
        return os;
    }

    void summary(std::string suite, bool pass, std::string detail)
    {
        result_.suites.push_back({std::move(suite), pass, std::move(detail)});
    }

    void boundary()
    {
        const double c = sc_.base_point;
        const auto left = classify_boundary(sc_.scale, sc_.speed, Side::Left, c);
        const auto right = classify_boundary(sc_.scale, sc_.speed, Side::Right, c);
        json j = {{"c", c},
                  {"left", to_json(left)},
                  {"right", to_json(right)},
                  {"conservative", !left.approachable && !right.approachable}};
        auto os = open("boundary_class.json");
        os << j.dump(2) << '\n';
    }

    void mosco()
    {
        const auto ff = assemble_family(sc_.family, sc_.domain, sc_.scale, sc_.speed, sc_.grid_N,
                                        sc_.boundary, sc_.base_point);
        const auto dict = standard_dictionary(ff.limit.grid());
        const auto report =
            mosco_certificate(ff.forms, ff.limit, dict, sc_.times, Scheme::CrankNicolson,
                              ff.n_values);
        for (const auto& a : report.distances)
            for (const auto& b : a)
                for (double d : b)
                    check_finite(d, "mosco distances");
        {
            auto os = open("mosco_report.csv");
            write_csv(os, report);
        }
        const bool ok = report.monotone_ok && report.final_max <= sc_.gates.mosco_final_max;
        summary("mosco", ok,
                "monotone_ok=" + std::to_string(report.monotone_ok) +
                    " final_max=" + fmt(report.final_max) +
                    " limit=" + fmt(sc_.gates.mosco_final_max));

        if (sc_.freeze_t)
            freeze(ff);
        if (sc_.bump)
            core(ff);
    }

    void freeze(const FormFamily& ff)
    {
        const auto u = hat_function(ff.limit.grid(), sc_.freeze_center, sc_.freeze_half_width);
        const auto d = freeze_check(ff, u, *sc_.freeze_t);
        bool strict = true;
        for (std::size_t k = 0; k < d.size(); ++k) {
            check_finite(d[k], "freeze distances");
            if (k > 0 && !(d[k] < d[k - 1]))
                strict = false;
        }
        const double ratio = d.front() > 0.0 ? d.back() / d.front() : 0.0;
        {
            auto os = open("freeze_check.csv");
            os.precision(17);
            os << "n,t,distance\n";
            for (std::size_t k = 0; k < d.size(); ++k)
                os << ff.n_values[k] << ',' << *sc_.freeze_t << ',' << d[k] << '\n';
            os << "summary,strictly_decreasing," << (strict ? 1 : 0) << ',' << ratio << '\n';
        }
        summary("freeze", strict && ratio <= sc_.gates.freeze_ratio,
                "strictly_decreasing=" + std::to_string(strict) + " final/initial=" + fmt(ratio) +
                    " limit=" + fmt(sc_.gates.freeze_ratio));
    }

    void core(const FormFamily& ff)
    {
        std::vector<CoreApproximation> rows;
        for (const auto& sn : ff.scales)
            rows.push_back(core_approximation_energy(*sc_.bump, sn, ff.limit_scale, sc_.scale,
                                                     sc_.speed));
        bool ok = true;
        auto gate = [&](auto get) {
            for (std::size_t k = 1; k < rows.size(); ++k)
                if (get(rows[k]) > get(rows[k - 1]))
                    ok = false;
            if (get(rows.back()) > sc_.gates.core_ratio * get(rows.front()))
                ok = false;
        };
        gate([](const CoreApproximation& c) { return c.l2_gap; });
        gate([](const CoreApproximation& c) { return c.Phi; });
        gate([](const CoreApproximation& c) { return c.Psi; });
        {
            auto os = open("core_energy.csv");
            os.precision(17);
            os << "n,l2_gap,Phi,Psi\n";
            for (std::size_t k = 0; k < rows.size(); ++k) {
                check_finite(rows[k].l2_gap + rows[k].Phi + rows[k].Psi, "core energies");
                os << ff.n_values[k] << ',' << rows[k].l2_gap << ',' << rows[k].Phi << ','
                   << rows[k].Psi << '\n';
            }
        }
        summary("core", ok, "nonincreasing with final <= " + fmt(sc_.gates.core_ratio) +
                                " x initial: " + (ok ? "yes" : "no"));
    }

    void paths()
    {
        const auto& mc = *sc_.mc;
        const auto ff = assemble_family(sc_.family, sc_.domain, sc_.scale, sc_.speed, mc.grid_N,
                                        sc_.boundary, sc_.base_point);
        const auto& grid = ff.limit.grid();
        const auto& s0 = transform_scale(ff);
        const auto laws = build_laws(sc_.initial_law, grid, ff.n_values);
        const double C = sup_phi(grid, s0);
        check_finite(C, "sup phi");

        MomentOracle oracle;
        for (double x : grid.points) {
            const double z = (x - sc_.domain.window_lo) / sc_.domain.width();
            oracle.f0.push_back(std::cos(std::numbers::pi * z));
            oracle.f1.push_back(z);
        }

        const bool weak = mode_ != RunMode::Paths;
        const bool qv = mode_ != RunMode::WeakConv;
        std::vector<double> bounds;
        if (weak)
            for (std::size_t k = 0; k < mc.delta_list.size(); ++k)
                bounds.push_back(brownian_modulus_bound(C, mc.T, mc.delta_list[k], mc.rho,
                                                        mc.n_mc, substream_seed(mc.seed, 1000 + k)));

        std::vector<ReportRow> modulus_rows, qv_rows;
        std::vector<FddSamples> samples;
        bool modulus_ok = true, qv_ok = true;
        FddSamples limit_samples;

        auto handle = [&](const DiscreteForm& form, const InitialLaw& law, std::uint64_t seed,
                          const std::string& label) {
            auto ens = simulate_ensemble(std::make_shared<DiscreteForm>(form), law, mc.T,
                                         mc.n_paths, seed, label);
            std::size_t trapped = 0;
            for (const auto& p : ens.paths)
                if (p.trapped && !form.pinned()[p.states.back()])
                    ++trapped;
            if (trapped > 0)
                summary("paths", true,
                        "warning: " + std::to_string(trapped) + " paths of " + label +
                            " sit in a state without exits");
            const auto tr = transform_ensemble(ens, s0, true);
            if (label == "limit" && mode_ == RunMode::Paths) {
                PathEnsemble head = tr;
                head.paths.resize(std::min<std::size_t>(head.paths.size(), 20));
                auto os = open("paths_limit.csv");
                write_csv(os, head);
                auto hs = open("paths_header.json");
                auto h = header_json(tr);
                h["n_paths_written"] = head.paths.size();
                hs << h.dump(2) << '\n';
            }
            if (qv) {
                const auto f = state_function(form, s0);
                const auto phi = phi_per_state(form, s0);
                double acc = 0.0;
                for (const auto& p : ens.paths) {
                    const auto r = quadratic_variation_report(p, f, phi, mc.T);
                    acc += r.rel_error;
                }
                const double mean = acc / static_cast<double>(ens.paths.size());
                check_finite(mean, "quadratic variation");
                const bool pass = mean <= sc_.gates.qv_rel_error;
                qv_ok = qv_ok && pass;
                qv_rows.push_back({label, "qv_mean_rel_error", "T=" + fmt(mc.T), mean,
                                   sc_.gates.qv_rel_error, pass});
            }
            if (weak) {
                const double n_paths = static_cast<double>(ens.paths.size());
                for (std::size_t k = 0; k < mc.delta_list.size(); ++k) {
                    const double p = modulus_statistic(tr, mc.T, mc.delta_list[k], mc.rho);
                    const double b = bounds[k];
                    const double se = std::sqrt(p * (1.0 - p) / n_paths +
                                                4.0 * b * (1.0 - b) / static_cast<double>(mc.n_mc));
                    const double threshold = 2.0 * b + 3.0 * se;
                    const bool pass = p <= threshold;
                    modulus_ok = modulus_ok && pass;
                    modulus_rows.push_back({label, "modulus",
                                            "delta=" + fmt(mc.delta_list[k]) + ";rho=" +
                                                fmt(mc.rho) + ";T=" + fmt(mc.T) + ";C=" + fmt(C) +
                                                ";brownian_bound=" + fmt(b),
                                            p, threshold, pass});
                }
                return sample_fdd(tr, mc.times, &oracle);
            }
            return FddSamples{};
        };

        limit_samples = handle(ff.limit, laws.limit, substream_seed(mc.seed, 0), "limit");
        for (std::size_t k = 0; k < ff.forms.size(); ++k)
            samples.push_back(handle(ff.forms[k], laws.members[k], substream_seed(mc.seed, k + 1),
                                     std::to_string(ff.n_values[k])));

        if (qv) {
            auto os = open("qv_report.csv");
            write_rows(os, qv_rows);
            summary("qv", qv_ok, "mean relative error <= " + fmt(sc_.gates.qv_rel_error));
        }
        if (!weak)
            return;
        {
            auto os = open("modulus_report.csv");
            write_rows(os, modulus_rows);
        }
        summary("modulus", modulus_ok, "modulus <= 2 x brownian bound + 3 standard errors");

        const auto fdd = fdd_convergence_suite(samples, limit_samples, ff.n_values);
        std::vector<ReportRow> rows;
        bool ks_ok = true, z_ok = true;
        for (std::size_t n = 0; n < fdd.ks.size(); ++n)
            for (std::size_t k = 0; k < fdd.times.size(); ++k) {
                const double th = sc_.gates.ks_slack * fdd.thresholds[n][k];
                const bool final = n + 1 == fdd.ks.size();
                const bool pass = fdd.ks[n][k] <= th;
                if (final)
                    ks_ok = ks_ok && pass;
                rows.push_back({std::to_string(fdd.n_values[n]), "ks",
                                "t=" + fmt(fdd.times[k]) + ";critical_5pct=" +
                                    fmt(fdd.thresholds[n][k]),
                                fdd.ks[n][k], th, pass});
            }
        for (std::size_t n = 0; n < fdd.moments.size(); ++n) {
            const std::string label =
                n < fdd.n_values.size() ? std::to_string(fdd.n_values[n]) : "limit";
            for (const auto& m : fdd.moments[n]) {
                const bool pass = std::abs(m.z) <= sc_.gates.z_max;
                z_ok = z_ok && pass;
                rows.push_back({label, "moment_" + m.kind,
                                "t0=" + fmt(m.t0) + ";t1=" + fmt(m.t1) + ";mc=" + fmt(m.mc) +
                                    ";exact=" + fmt(m.exact) + ";se=" + fmt(m.std_error),
                                std::abs(m.z), sc_.gates.z_max, pass});
            }
        }
        {
            auto os = open("fdd_report.csv");
            write_rows(os, rows);
        }
        summary("fdd", ks_ok && z_ok,
                "final-n KS <= " + fmt(sc_.gates.ks_slack) + " x critical: " +
                    (ks_ok ? "yes" : "no") + "; moment |z| <= " + fmt(sc_.gates.z_max) + ": " +
                    (z_ok ? "yes" : "no"));

        initial_laws(laws, grid, ff.n_values);
    }

    void initial_laws(const LawFamily& laws, const Grid& grid, const std::vector<int>& n_values)
    {
        std::vector<ReportRow> rows;
        double reach = 0.0;
        for (double x : grid.points)
            reach = std::max(reach, std::abs(x));
        const std::vector<double> A_grid{0.5 * reach, reach};
        const auto tight = initial_tightness(laws.members, A_grid);
        for (std::size_t l = 0; l < tight.mass.size(); ++l)
            for (std::size_t a = 0; a < A_grid.size(); ++a)
                rows.push_back({std::to_string(n_values[l]), "initial_mass",
                                "A=" + fmt(A_grid[a]), tight.mass[l][a], 0.0, true});
        const bool tight_ok = std::abs(tight.liminf_proxy - 1.0) <= 1e-9;
        rows.push_back({"all", "liminf_proxy", "A=" + fmt(reach), tight.liminf_proxy, 1.0, tight_ok});
        bool h2_ok = true;
        if (laws.limit.kind == InitialLaw::Kind::Density) {
            const auto h2 = h2_check(laws.members, laws.limit);
            for (std::size_t k = 0; k < h2.l1_gaps.size(); ++k) {
                const bool mono =
                    k == 0 || (h2.l1_gaps[k] <= h2.l1_gaps[k - 1] + 1e-15 &&
                               h2.l2_gaps[k] <= h2.l2_gaps[k - 1] + 1e-15);
                h2_ok = h2_ok && mono;
                const auto n = std::to_string(n_values[k]);
                rows.push_back({n, "h2_l1_gap", "", h2.l1_gaps[k], 0.0, mono});
                rows.push_back({n, "h2_l2_gap", "", h2.l2_gaps[k], 0.0, mono});
            }
        }
        auto os = open("initial_law_report.csv");
        write_rows(os, rows);
        summary("initial_law", tight_ok && h2_ok, "tightness proxy and nonincreasing H2 gaps");
    }

    void manifest()
    {
        json files = json::object();
        for (const auto& p : result_.artifacts)
            files[p.filename().string()] = sha256_file(p);
        json suites = json::array();
        for (const auto& s : result_.suites)
            suites.push_back({{"suite", s.suite}, {"pass", s.pass}, {"detail", s.detail}});
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::ostringstream ts;
        ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
        json j = {{"scenario", sc_.normalized},
                  {"seed", sc_.mc ? json(sc_.mc->seed) : json(nullptr)},
                  {"artifacts", files},
                  {"suites", suites},
                  {"generated_at", ts.str()}};
        const auto p = sc_.output_dir / "manifest.json";
        std::ofstream os(p, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write " + p.string());
        os << j.dump(2) << '\n';
        result_.artifacts.push_back(p);
    }

    const Scenario& sc_;
    RunMode mode_;
    RunResult result_;
};

}  // namespace

RunResult run_scenario(const Scenario& sc, RunMode mode)
{
    return Runner(sc, mode).run();
}

}  // namespace regsub
