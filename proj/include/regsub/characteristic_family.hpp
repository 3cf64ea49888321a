#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regsub/interval_union.hpp"
#include "regsub/scale_function.hpp"

namespace regsub {

enum class Direction { Decreasing, Increasing };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

/// Monotone sequence of characteristic sets G_n together with its limit.
struct CharacteristicFamily {
    std::vector<IntervalUnion> sets;
    /// Index labels n for each set (n_list of the constructor).
    std::vector<int> n_values;
    Direction direction = Direction::Decreasing;
    /// Set-theoretic intersection (decreasing) or union (increasing) of `sets`.
    IntervalUnion limit;
    /// Limit of the whole n -> infinity sequence when the constructor knows
    /// it in closed form; defaults to `limit`.
    IntervalUnion asymptotic_limit;
};

/// Index of the first set violating the nesting required by `direction`,
/// or nullopt when the list is nested.
std::optional<std::size_t> first_nesting_violation(const std::vector<IntervalUnion>& sets,
                                                   Direction direction);

/// Family from an explicit list of sets. Throws std::invalid_argument when
/// the list is not nested in the stated direction.
CharacteristicFamily explicit_family(std::vector<IntervalUnion> sets, Direction direction,
                                     std::vector<int> n_values = {});

/// Dyadic points of the window in breadth-first order 1/2, 1/4, 3/4, 1/8, ...
std::vector<double> dyadic_enumeration(const DomainSpec& window, int count);

/// G_n = union over k <= K of (r_k - 1/(2^{k+1} n), r_k + 1/(2^{k+1} n)),
/// clipped to the window. Decreasing in n; the n -> infinity limit is null.
CharacteristicFamily example26_family(const DomainSpec& window, int K,
                                      const std::vector<int>& n_list);

/// One removed closed interval [center, center + w_n]:
///   increasing: w_n = width / n      (limit: the window, a.e.)
///   decreasing: w_n = width - width / n   (limit: window minus [center, center + width])
CharacteristicFamily single_removed_interval_family(const DomainSpec& window, double center,
                                                    double width, const std::vector<int>& n_list,
                                                    Direction direction);

struct PointwiseLimit {
    std::vector<double> values;
    double limit = 0.0;
};

/// s_n(x) along an increasing family, and s_inf(x) from the asymptotic limit.
PointwiseLimit pointwise_scale_limit(const CharacteristicFamily& family, const ScaleFunction& s,
                                     double e, double x);

}  // namespace regsub
