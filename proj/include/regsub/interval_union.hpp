#pragma once

#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace regsub {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// State space I = (a, b) together with the finite window used for
/// desk-scale truncation. Either endpoint may be infinite.
struct DomainSpec {
    double a = 0.0;
    double b = 1.0;
    double window_lo = 0.0;
    double window_hi = 1.0;

    /// Throws std::invalid_argument unless a < window_lo < window_hi < b
    /// (a window equal to a finite domain is allowed).
    static DomainSpec make(double a, double b, double window_lo, double window_hi);
    static DomainSpec unit_interval() { return make(0.0, 1.0, 0.0, 1.0); }

    double width() const { return window_hi - window_lo; }
    double midpoint() const { return 0.5 * (window_lo + window_hi); }
};

struct Interval {
    double lo;
    double hi;
    double length() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

enum class SetOpKind { Union, Intersect, Diff };

/// Finite union of disjoint open intervals, kept in canonical form: sorted,
/// no empty pieces, consecutive pieces separated by gaps of positive length.
/// Sets differing by finitely many points share one representative.
class IntervalUnion {
public:
    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<Interval> pieces);

    static IntervalUnion single(double lo, double hi) { return IntervalUnion({{lo, hi}}); }
    static IntervalUnion window(const DomainSpec& d) { return single(d.window_lo, d.window_hi); }

    const std::vector<Interval>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    std::size_t size() const { return pieces_.size(); }

    /// Lebesgue length.
    double measure() const;
    /// Membership in the open set.
    bool contains(double x) const;
    /// Every piece lies inside [lo, hi].
    bool within(double lo, double hi) const;
    /// Endpoints of all pieces, ascending.
    std::vector<double> endpoints() const;

    IntervalUnion clip(double lo, double hi) const;
    IntervalUnion complement_in(double lo, double hi) const;

    bool operator==(const IntervalUnion&) const = default;

private:
    std::vector<Interval> pieces_;
};

IntervalUnion set_union(const IntervalUnion& lhs, const IntervalUnion& rhs);
IntervalUnion set_intersect(const IntervalUnion& lhs, const IntervalUnion& rhs);
IntervalUnion set_diff(const IntervalUnion& lhs, const IntervalUnion& rhs);

/// Union / intersection / difference, clipped to the window of `domain`.
/// Throws std::invalid_argument if an operand leaves the window.
IntervalUnion set_op(const IntervalUnion& lhs, const IntervalUnion& rhs, SetOpKind kind,
                     const DomainSpec& domain);

/// lhs ⊆ rhs up to a set of Lebesgue measure at most `tol`.
bool is_subset(const IntervalUnion& lhs, const IntervalUnion& rhs, double tol = 0.0);

nlohmann::json to_json(const IntervalUnion& u);
IntervalUnion interval_union_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DomainSpec& d);

}  // namespace regsub
