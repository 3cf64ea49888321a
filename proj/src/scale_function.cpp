#include "regsub/scale_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regsub {

ScaleFunction ScaleFunction::from_knots(std::vector<Knot> knots, double base_point,
                                        ScaleTails tails)
{
    if (knots.size() < 2)
        throw std::invalid_argument("scale function: need at least two knots");
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        if (!(knots[i].x < knots[i + 1].x))
            throw std::invalid_argument("scale function: knot abscissae must increase strictly");
        if (!(knots[i].s <= knots[i + 1].s))
            throw std::invalid_argument("scale function: values must be nondecreasing");
    }
    for (const auto& k : knots)
        if (!std::isfinite(k.x) || !std::isfinite(k.s))
            throw std::invalid_argument("scale function: knots must be finite");
    if ((tails.left_slope && *tails.left_slope < 0) || (tails.right_slope && *tails.right_slope < 0))
        throw std::invalid_argument("scale function: tail slopes must be nonnegative");
    if (base_point < knots.front().x || base_point > knots.back().x)
        throw std::invalid_argument("scale function: base point outside the knot range");

    auto it = std::lower_bound(knots.begin(), knots.end(), base_point,
                               [](const Knot& k, double x) { return k.x < x; });
    if (it == knots.end() || it->x != base_point) {
        const Knot& left = *(it - 1);
        const Knot& right = *it;
        const double w = (base_point - left.x) / (right.x - left.x);
        const double value = left.s + w * (right.s - left.s);
        it = knots.insert(it, Knot{base_point, value});
    }
    const double shift = it->s;
    for (auto& k : knots)
        k.s -= shift;
    it->s = 0.0;

    ScaleFunction out;
    out.knots_ = std::move(knots);
    out.base_point_ = base_point;
    out.tails_ = tails;
    out.strict_ = true;
    for (std::size_t i = 0; i + 1 < out.knots_.size(); ++i)
        if (!(out.knots_[i].s < out.knots_[i + 1].s))
            out.strict_ = false;
    if ((tails.left_slope && *tails.left_slope == 0.0) ||
        (tails.right_slope && *tails.right_slope == 0.0))
        out.strict_ = false;
    return out;
}

ScaleFunction ScaleFunction::identity(double lo, double hi, double base_point)
{
    return from_knots({{lo, lo}, {hi, hi}}, base_point);
}

ScaleFunction ScaleFunction::identity(const DomainSpec& domain, double base_point)
{
    ScaleTails tails;
    if (std::isinf(domain.a))
        tails.left_slope = 1.0;
    if (std::isinf(domain.b))
        tails.right_slope = 1.0;
    return from_knots({{domain.window_lo, domain.window_lo}, {domain.window_hi, domain.window_hi}},
                      base_point, tails);
}

double ScaleFunction::lo() const
{
    return tails_.left_slope ? -kInf : knots_.front().x;
}

double ScaleFunction::hi() const
{
    return tails_.right_slope ? kInf : knots_.back().x;
}

std::vector<double> ScaleFunction::knot_positions() const
{
    std::vector<double> xs;
    xs.reserve(knots_.size());
    for (const auto& k : knots_)
        xs.push_back(k.x);
    return xs;
}

double ScaleFunction::operator()(double x) const
{
    if (std::isnan(x))
        throw std::invalid_argument("scale function: NaN argument");
    if (x < knots_.front().x) {
        if (!tails_.left_slope)
            throw std::out_of_range("scale function: argument left of the domain");
        return knots_.front().s - *tails_.left_slope * (knots_.front().x - x);
    }
    if (x > knots_.back().x) {
        if (!tails_.right_slope)
            throw std::out_of_range("scale function: argument right of the domain");
        return knots_.back().s + *tails_.right_slope * (x - knots_.back().x);
    }
    auto it = std::lower_bound(knots_.begin(), knots_.end(), x,
                               [](const Knot& k, double v) { return k.x < v; });
    if (it->x == x)
        return it->s;
    const Knot& left = *(it - 1);
    const Knot& right = *it;
    if (left.s == right.s)
        return left.s;
    return left.s + (right.s - left.s) * ((x - left.x) / (right.x - left.x));
}

double ScaleFunction::slope_at(double x) const
{
    if (x < knots_.front().x) {
        if (!tails_.left_slope)
            throw std::out_of_range("scale function: argument left of the domain");
        return *tails_.left_slope;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.x; });
    if (it == knots_.end()) {
        if (x == knots_.back().x && knots_.size() >= 2) {
            const Knot& a = knots_[knots_.size() - 2];
            const Knot& b = knots_.back();
            return tails_.right_slope ? *tails_.right_slope : (b.s - a.s) / (b.x - a.x);
        }
        if (!tails_.right_slope)
            throw std::out_of_range("scale function: argument right of the domain");
        return *tails_.right_slope;
    }
    const Knot& left = *(it - 1);
    return (it->s - left.s) / (it->x - left.x);
}

double ScaleFunction::inverse(double y) const
{
    if (std::isnan(y))
        throw std::invalid_argument("scale function: NaN argument");
    if (y < knots_.front().s) {
        if (!tails_.left_slope || *tails_.left_slope == 0.0)
            throw std::out_of_range("scale function: value below the range");
        return knots_.front().x - (knots_.front().s - y) / *tails_.left_slope;
    }
    if (y > knots_.back().s) {
        if (!tails_.right_slope || *tails_.right_slope == 0.0)
            throw std::out_of_range("scale function: value above the range");
        return knots_.back().x + (y - knots_.back().s) / *tails_.right_slope;
    }
    auto it = std::lower_bound(knots_.begin(), knots_.end(), y,
                               [](const Knot& k, double v) { return k.s < v; });
    if (it->s == y)
        return it->x;
    const Knot& left = *(it - 1);
    return left.x + (it->x - left.x) * ((y - left.s) / (it->s - left.s));
}

double stieltjes_measure(const ScaleFunction& s, const IntervalUnion& A)
{
    if (!A.within(s.lo(), s.hi()))
        throw std::invalid_argument("stieltjes_measure: set leaves the domain of the scale");
    double total = 0.0;
    for (const auto& iv : A.pieces())
        total += s(iv.hi) - s(iv.lo);
    return total;
}

ScaleFunction derive_subscale(const ScaleFunction& s, const IntervalUnion& G, double e)
{
    if (!s.in_domain(e) || !std::isfinite(e))
        throw std::invalid_argument("derive_subscale: base point outside the domain");
    const double lo = s.first_knot();
    const double hi = s.last_knot();
    const IntervalUnion g = G.clip(std::min(lo, e), std::max(hi, e));

    std::vector<double> xs = s.knot_positions();
    for (double p : g.endpoints())
        xs.push_back(p);
    xs.push_back(e);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    // Running integral of 1_G ds from the left-most knot; every boundary of G
    // is a knot, so the indicator is constant on each piece.
    std::vector<Knot> knots;
    knots.reserve(xs.size());
    double acc = 0.0;
    knots.push_back({xs.front(), 0.0});
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double mid = 0.5 * (xs[i] + xs[i + 1]);
        if (g.contains(mid))
            acc += s(xs[i + 1]) - s(xs[i]);
        knots.push_back({xs[i + 1], acc});
    }

    ScaleTails tails;
    if (s.tails().left_slope)
        tails.left_slope = (!g.empty() && g.pieces().front().lo <= lo) ? *s.tails().left_slope : 0.0;
    if (s.tails().right_slope)
        tails.right_slope = (!g.empty() && g.pieces().back().hi >= hi) ? *s.tails().right_slope : 0.0;
    return ScaleFunction::from_knots(std::move(knots), e, tails);
}

CharacteristicReport is_characteristic(const IntervalUnion& G, const ScaleFunction& s,
                                       double resolution)
{
    const double lo = s.first_knot();
    const double hi = s.last_knot();
    if (!(resolution > 0.0) || !(resolution < hi - lo))
        throw std::invalid_argument("is_characteristic: resolution must be in (0, window width)");
    const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / resolution));
    const IntervalUnion g = G.clip(lo, hi);

    CharacteristicReport report;
    report.worst_mass = kInf;
    for (std::size_t k = 0; k < cells; ++k) {
        const double a = lo + static_cast<double>(k) * resolution;
        const double b = (k + 1 == cells) ? hi : std::min(hi, a + resolution);
        const double mass = stieltjes_measure(s, set_intersect(g, IntervalUnion::single(a, b)));
        if (mass < report.worst_mass) {
            report.worst_mass = mass;
            report.worst_cell = {a, b};
        }
        if (!(mass > 0.0))
            report.ok = false;
    }
    return report;
}

nlohmann::json to_json(const ScaleFunction& s)
{
    auto knots = nlohmann::json::array();
    for (const auto& k : s.knots())
        knots.push_back({k.x, k.s});
    nlohmann::json j{{"knots", knots}, {"base_point", s.base_point()}, {"strict", s.strict()}};
    if (s.tails().left_slope)
        j["left_tail_slope"] = *s.tails().left_slope;
    if (s.tails().right_slope)
        j["right_tail_slope"] = *s.tails().right_slope;
    return j;
}

}  // namespace regsub
