#include "regsub/interval_union.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regsub {

DomainSpec DomainSpec::make(double a, double b, double window_lo, double window_hi)
{
    if (std::isnan(a) || std::isnan(b) || !std::isfinite(window_lo) || !std::isfinite(window_hi))
        throw std::invalid_argument("domain: window endpoints must be finite");
    if (!(a < b))
        throw std::invalid_argument("domain: need a < b");
    if (!(window_lo < window_hi))
        throw std::invalid_argument("domain: need window.lo < window.hi");
    if (window_lo < a || window_hi > b)
        throw std::invalid_argument("domain: window must lie inside (a, b)");
    if ((window_lo == a && !std::isfinite(a)) || (window_hi == b && !std::isfinite(b)))
        throw std::invalid_argument("domain: window must be finite");
    return DomainSpec{a, b, window_lo, window_hi};
}

namespace {

std::vector<Interval> normalize(std::vector<Interval> pieces)
{
    std::erase_if(pieces, [](const Interval& iv) { return !(iv.lo < iv.hi); });
    std::sort(pieces.begin(), pieces.end(),
              [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<Interval> out;
    out.reserve(pieces.size());
    for (const auto& iv : pieces) {
        // Touching pieces merge: the shared endpoint is a null set.
        if (!out.empty() && iv.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    return out;
}

}  // namespace

IntervalUnion::IntervalUnion(std::vector<Interval> pieces)
    : pieces_(normalize(std::move(pieces)))
{
    for (const auto& iv : pieces_)
        if (std::isnan(iv.lo) || std::isnan(iv.hi))
            throw std::invalid_argument("interval union: NaN endpoint");
}

double IntervalUnion::measure() const
{
    double total = 0.0;
    for (const auto& iv : pieces_)
        total += iv.length();
    return total;
}

bool IntervalUnion::contains(double x) const
{
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const Interval& iv) { return v < iv.hi; });
    return it != pieces_.end() && it->lo < x && x < it->hi;
}

bool IntervalUnion::within(double lo, double hi) const
{
    return pieces_.empty() || (pieces_.front().lo >= lo && pieces_.back().hi <= hi);
}

std::vector<double> IntervalUnion::endpoints() const
{
    std::vector<double> out;
    out.reserve(2 * pieces_.size());
    for (const auto& iv : pieces_) {
        out.push_back(iv.lo);
        out.push_back(iv.hi);
    }
    return out;
}

IntervalUnion IntervalUnion::clip(double lo, double hi) const
{
    return set_intersect(*this, single(lo, hi));
}

IntervalUnion IntervalUnion::complement_in(double lo, double hi) const
{
    return set_diff(single(lo, hi), *this);
}

IntervalUnion set_union(const IntervalUnion& lhs, const IntervalUnion& rhs)
{
    std::vector<Interval> all = lhs.pieces();
    all.insert(all.end(), rhs.pieces().begin(), rhs.pieces().end());
    return IntervalUnion(std::move(all));
}

IntervalUnion set_intersect(const IntervalUnion& lhs, const IntervalUnion& rhs)
{
    std::vector<Interval> out;
    const auto& a = lhs.pieces();
    const auto& b = rhs.pieces();
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].lo, b[j].lo);
        const double hi = std::min(a[i].hi, b[j].hi);
        if (lo < hi)
            out.push_back({lo, hi});
        if (a[i].hi < b[j].hi)
            ++i;
        else
            ++j;
    }
    return IntervalUnion(std::move(out));
}

IntervalUnion set_diff(const IntervalUnion& lhs, const IntervalUnion& rhs)
{
    std::vector<Interval> out;
    const auto& cut = rhs.pieces();
    std::size_t j = 0;
    for (const auto& iv : lhs.pieces()) {
        double cursor = iv.lo;
        while (j < cut.size() && cut[j].hi <= cursor)
            ++j;
        std::size_t k = j;
        while (k < cut.size() && cut[k].lo < iv.hi) {
            if (cut[k].lo > cursor)
                out.push_back({cursor, cut[k].lo});
            cursor = std::max(cursor, cut[k].hi);
            ++k;
        }
        if (cursor < iv.hi)
            out.push_back({cursor, iv.hi});
    }
    return IntervalUnion(std::move(out));
}

IntervalUnion set_op(const IntervalUnion& lhs, const IntervalUnion& rhs, SetOpKind kind,
                     const DomainSpec& domain)
{
    if (!lhs.within(domain.window_lo, domain.window_hi) ||
        !rhs.within(domain.window_lo, domain.window_hi))
        throw std::invalid_argument("set_op: operand outside the window");
    switch (kind) {
    case SetOpKind::Union:
        return set_union(lhs, rhs);
    case SetOpKind::Intersect:
        return set_intersect(lhs, rhs);
    case SetOpKind::Diff:
        return set_diff(lhs, rhs);
    }
    throw std::logic_error("set_op: unknown kind");
}

bool is_subset(const IntervalUnion& lhs, const IntervalUnion& rhs, double tol)
{
    return set_diff(lhs, rhs).measure() <= tol;
}

nlohmann::json to_json(const IntervalUnion& u)
{
    auto arr = nlohmann::json::array();
    for (const auto& iv : u.pieces())
        arr.push_back({iv.lo, iv.hi});
    return arr;
}

IntervalUnion interval_union_from_json(const nlohmann::json& j)
{
    if (!j.is_array())
        throw std::invalid_argument("interval union: expected an array of [lo, hi] pairs");
    std::vector<Interval> pieces;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw std::invalid_argument("interval union: expected [lo, hi] pairs");
        const double lo = p[0].get<double>();
        const double hi = p[1].get<double>();
        if (!(lo < hi))
            throw std::invalid_argument("interval union: need lo < hi in every pair");
        pieces.push_back({lo, hi});
    }
    return IntervalUnion(std::move(pieces));
}

nlohmann::json to_json(const DomainSpec& d)
{
    auto endpoint = [](double v) -> nlohmann::json {
        if (std::isinf(v))
            return v < 0 ? "-inf" : "inf";
        return v;
    };
    return {{"a", endpoint(d.a)}, {"b", endpoint(d.b)}, {"window", {d.window_lo, d.window_hi}}};
}

}  // namespace regsub
