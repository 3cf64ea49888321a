#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "regsub/interval_union.hpp"

namespace regsub {

struct Knot {
    double x;
    double s;
};

/// Optional linear extensions beyond the outermost knots. An absent tail
/// means the function (and hence the state space) ends at that knot.
struct ScaleTails {
    std::optional<double> left_slope;
    std::optional<double> right_slope;
};

/// Continuous nondecreasing piecewise-linear function normalized by s(e) = 0.
///
/// Holds the base scale s, the subscales s_n and s_inf built from
/// characteristic sets, and the transform scale used for the spatial map.
class ScaleFunction {
public:
    /// Knot abscissae must be strictly increasing and values nondecreasing.
    /// A knot is inserted at the base point if missing; all values are then
    /// shifted so that the knot at `base_point` carries exactly 0.
    static ScaleFunction from_knots(std::vector<Knot> knots, double base_point,
                                    ScaleTails tails = {});
    /// s(x) = x - e on [lo, hi].
    static ScaleFunction identity(double lo, double hi, double base_point);
    /// s(x) = x - e on the window, extended with slope 1 towards infinite
    /// endpoints of the domain.
    static ScaleFunction identity(const DomainSpec& domain, double base_point);

    double operator()(double x) const;
    /// Left-most x with s(x) = y. Throws if y is outside the range.
    double inverse(double y) const;
    /// Slope of the piece containing x (right-hand derivative at knots).
    double slope_at(double x) const;

    const std::vector<Knot>& knots() const { return knots_; }
    std::vector<double> knot_positions() const;
    double base_point() const { return base_point_; }
    bool strict() const { return strict_; }
    const ScaleTails& tails() const { return tails_; }

    /// Domain of definition: outermost knots, or ±inf where a tail exists.
    double lo() const;
    double hi() const;
    double first_knot() const { return knots_.front().x; }
    double last_knot() const { return knots_.back().x; }
    bool in_domain(double x) const { return x >= lo() && x <= hi(); }

private:
    std::vector<Knot> knots_;
    double base_point_ = 0.0;
    bool strict_ = true;
    ScaleTails tails_;
};

/// ds(A) = sum over the pieces of A of s(hi) - s(lo).
/// Throws std::invalid_argument when A leaves the domain of s.
double stieltjes_measure(const ScaleFunction& s, const IntervalUnion& A);

/// s~(x) = integral from e to x of 1_G ds, with knots inserted at every
/// boundary of G. The strictness flag is set iff every inter-knot piece of
/// positive ds-mass meets G.
ScaleFunction derive_subscale(const ScaleFunction& s, const IntervalUnion& G, double e);

struct CharacteristicReport {
    bool ok = true;
    Interval worst_cell{0.0, 0.0};
    double worst_mass = 0.0;
};

/// Resolution-bounded surrogate for the characteristic-set condition:
/// ds(G ∩ cell) > 0 for every cell of width `resolution` tiling the knot
/// range of s.
CharacteristicReport is_characteristic(const IntervalUnion& G, const ScaleFunction& s,
                                       double resolution);

nlohmann::json to_json(const ScaleFunction& s);

}  // namespace regsub
