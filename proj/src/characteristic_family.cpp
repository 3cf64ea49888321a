#include "regsub/characteristic_family.hpp"

#include <cmath>
#include <stdexcept>

namespace regsub {

std::string to_string(Direction d)
{
    return d == Direction::Decreasing ? "decreasing" : "increasing";
}

Direction direction_from_string(const std::string& s)
{
    if (s == "decreasing")
        return Direction::Decreasing;
    if (s == "increasing")
        return Direction::Increasing;
    throw std::invalid_argument("direction must be 'decreasing' or 'increasing'");
}

std::optional<std::size_t> first_nesting_violation(const std::vector<IntervalUnion>& sets,
                                                   Direction direction)
{
    for (std::size_t i = 0; i + 1 < sets.size(); ++i) {
        const bool nested = direction == Direction::Decreasing ? is_subset(sets[i + 1], sets[i])
                                                               : is_subset(sets[i], sets[i + 1]);
        if (!nested)
            return i + 1;
    }
    return std::nullopt;
}

namespace {

IntervalUnion fold_limit(const std::vector<IntervalUnion>& sets, Direction direction)
{
    IntervalUnion acc = sets.front();
    for (std::size_t i = 1; i < sets.size(); ++i)
        acc = direction == Direction::Decreasing ? set_intersect(acc, sets[i])
                                                 : set_union(acc, sets[i]);
    return acc;
}

void check_n_list(const std::vector<int>& n_list)
{
    if (n_list.empty())
        throw std::invalid_argument("family: n_list must not be empty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 1)
            throw std::invalid_argument("family: n_list entries must be positive");
        if (i > 0 && n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("family: n_list must be strictly increasing");
    }
}

}  // namespace

CharacteristicFamily explicit_family(std::vector<IntervalUnion> sets, Direction direction,
                                     std::vector<int> n_values)
{
    if (sets.empty())
        throw std::invalid_argument("family: need at least one set");
    if (auto bad = first_nesting_violation(sets, direction))
        throw std::invalid_argument("family: set " + std::to_string(*bad) + " breaks " +
                                    to_string(direction) + " nesting");
    if (n_values.empty())
        for (std::size_t i = 0; i < sets.size(); ++i)
            n_values.push_back(static_cast<int>(i) + 1);
    if (n_values.size() != sets.size())
        throw std::invalid_argument("family: one label per set required");

    CharacteristicFamily fam;
    fam.limit = fold_limit(sets, direction);
    fam.asymptotic_limit = fam.limit;
    fam.sets = std::move(sets);
    fam.n_values = std::move(n_values);
    fam.direction = direction;
    return fam;
}

std::vector<double> dyadic_enumeration(const DomainSpec& window, int count)
{
    if (count < 1)
        throw std::invalid_argument("dyadic enumeration: count must be positive");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int depth = 1; static_cast<int>(out.size()) < count; ++depth) {
        const double denom = std::ldexp(1.0, depth);
        for (long long num = 1; num < (1LL << depth) && static_cast<int>(out.size()) < count;
             num += 2)
            out.push_back(window.window_lo + window.width() * (static_cast<double>(num) / denom));
    }
    return out;
}

CharacteristicFamily example26_family(const DomainSpec& window, int K,
                                      const std::vector<int>& n_list)
{
    if (K < 1)
        throw std::invalid_argument("example26_family: K must be positive");
    check_n_list(n_list);
    const auto centers = dyadic_enumeration(window, K);

    std::vector<IntervalUnion> sets;
    for (int n : n_list) {
        std::vector<Interval> pieces;
        for (int k = 1; k <= K; ++k) {
            const double radius = std::ldexp(1.0, -(k + 1)) / static_cast<double>(n);
            const double r = centers[static_cast<std::size_t>(k - 1)];
            pieces.push_back({r - radius, r + radius});
        }
        sets.push_back(IntervalUnion(std::move(pieces)).clip(window.window_lo, window.window_hi));
    }
    auto fam = explicit_family(std::move(sets), Direction::Decreasing, n_list);
    // Intersection over all n >= 1 is the finite set of centres: ds-null.
    fam.asymptotic_limit = IntervalUnion{};
    return fam;
}

CharacteristicFamily single_removed_interval_family(const DomainSpec& window, double center,
                                                    double width, const std::vector<int>& n_list,
                                                    Direction direction)
{
    check_n_list(n_list);
    if (!(width > 0.0) || !(center >= window.window_lo) ||
        !(center + width <= window.window_hi))
        throw std::invalid_argument(
            "single_removed_interval: [center, center + width] must lie in the window");
    const IntervalUnion full = IntervalUnion::window(window);

    std::vector<IntervalUnion> sets;
    for (int n : n_list) {
        const double removed = direction == Direction::Increasing
                                   ? width / static_cast<double>(n)
                                   : width - width / static_cast<double>(n);
        sets.push_back(set_diff(full, IntervalUnion::single(center, center + removed)));
    }
    auto fam = explicit_family(std::move(sets), direction, n_list);
    fam.asymptotic_limit = direction == Direction::Increasing
                               ? full
                               : set_diff(full, IntervalUnion::single(center, center + width));
    return fam;
}

PointwiseLimit pointwise_scale_limit(const CharacteristicFamily& family, const ScaleFunction& s,
                                     double e, double x)
{
    if (family.direction != Direction::Increasing)
        throw std::invalid_argument("pointwise_scale_limit: family must be increasing");
    PointwiseLimit out;
    for (const auto& g : family.sets)
        out.values.push_back(derive_subscale(s, g, e)(x));
    out.limit = derive_subscale(s, family.asymptotic_limit, e)(x);
    return out;
}

}  // namespace regsub
