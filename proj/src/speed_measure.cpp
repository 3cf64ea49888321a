#include "regsub/speed_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regsub {

SpeedMeasure SpeedMeasure::uniform(double density)
{
    return step({}, {density});
}

SpeedMeasure SpeedMeasure::step(std::vector<double> breaks, std::vector<double> values)
{
    if (values.size() != breaks.size() + 1)
        throw std::invalid_argument("speed measure: need one density value per cell");
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (!(breaks[i] < breaks[i + 1]))
            throw std::invalid_argument("speed measure: breakpoints must increase strictly");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("speed measure: density must be finite and nonnegative");
    SpeedMeasure m;
    m.breaks_ = std::move(breaks);
    m.values_ = std::move(values);
    return m;
}

SpeedMeasure SpeedMeasure::with_atoms(std::vector<Atom> atoms) const
{
    for (const auto& a : atoms)
        if (!(a.mass > 0.0) || !std::isfinite(a.mass) || !std::isfinite(a.x))
            throw std::invalid_argument("speed measure: atom masses must be finite and positive");
    SpeedMeasure m = *this;
    m.atoms_.insert(m.atoms_.end(), atoms.begin(), atoms.end());
    std::sort(m.atoms_.begin(), m.atoms_.end(),
              [](const Atom& p, const Atom& q) { return p.x < q.x; });
    return m;
}

double SpeedMeasure::density(double x) const
{
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double SpeedMeasure::density_mass(double a, double b) const
{
    if (!(a <= b))
        throw std::invalid_argument("speed measure: need a <= b");
    if (a == b)
        return 0.0;
    double total = 0.0;
    double cursor = a;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
    for (; it != breaks_.end() && *it < b; ++it) {
        const double v = values_[static_cast<std::size_t>(it - breaks_.begin())];
        if (v > 0.0)
            total += v * (*it - cursor);
        cursor = *it;
    }
    const double v = values_[static_cast<std::size_t>(it - breaks_.begin())];
    if (v > 0.0)
        total += v * (b - cursor);
    return total;
}

double SpeedMeasure::atom_mass_halfopen(double a, double b) const
{
    double total = 0.0;
    for (const auto& at : atoms_)
        if (at.x >= a && at.x < b)
            total += at.mass;
    return total;
}

double SpeedMeasure::atom_mass_open(double a, double b) const
{
    double total = 0.0;
    for (const auto& at : atoms_)
        if (at.x > a && at.x < b)
            total += at.mass;
    return total;
}

std::vector<double> SpeedMeasure::atom_positions() const
{
    std::vector<double> xs;
    for (const auto& a : atoms_)
        xs.push_back(a.x);
    return xs;
}

nlohmann::json to_json(const SpeedMeasure& m)
{
    auto atoms = nlohmann::json::array();
    for (const auto& a : m.atoms())
        atoms.push_back({a.x, a.mass});
    return {{"breaks", m.breaks()}, {"values", m.values()}, {"atoms", atoms}};
}

}  // namespace regsub
