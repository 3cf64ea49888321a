#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "regsub/characteristic_family.hpp"
#include "regsub/discrete_form.hpp"
#include "regsub/semigroup.hpp"

namespace regsub {

/// Discrete forms of a characteristic family on one common grid.
struct FormFamily {
    Direction direction = Direction::Decreasing;
    std::vector<int> n_values;
    std::vector<ScaleFunction> scales;
    std::vector<DiscreteForm> forms;
    ScaleFunction limit_scale;
    /// Wide-sense limit form built from the asymptotic limit set.
    DiscreteForm limit;
};

/// Builds s_n = derive_subscale(s, G_n, e) for every member and for the
/// asymptotic limit, on a grid containing the knots of all of them.
FormFamily assemble_family(const CharacteristicFamily& family, const DomainSpec& domain,
                           const ScaleFunction& s, const SpeedMeasure& m, int N,
                           BoundaryFlags boundary, double e);

struct TestFunction {
    std::string id;
    /// Values on the grid points.
    std::vector<double> values;
};

/// Eight hats, three sine modes and two indicators smoothed at grid scale.
std::vector<TestFunction> standard_dictionary(const Grid& grid);

/// Hat of height 1 with the given centre and half-width, on grid points.
std::vector<double> hat_function(const Grid& grid, double center, double half_width);

inline const std::vector<double> kStandardTimes{0.05, 0.1, 0.5, 1.0};

struct MoscoReport {
    std::vector<int> n_values;
    std::vector<std::string> test_ids;
    std::vector<double> times;
    /// distances[n][f][t] = ‖T_t^n f - T_t f‖ in L²(m).
    std::vector<std::vector<std::vector<double>>> distances;
    bool monotone_ok = true;
    double final_max = 0.0;
};

/// Semigroup characterization of Mosco convergence over a finite dictionary.
/// Functions are moved onto each form by cell-mass averaging over merged
/// groups and compared on the common grid. Each (f, t) slice must be
/// nonincreasing in n from the second index on.
/// Throws std::invalid_argument when the forms do not share grid points.
MoscoReport mosco_certificate(const std::vector<DiscreteForm>& family, const DiscreteForm& limit,
                              const std::vector<TestFunction>& dictionary,
                              const std::vector<double>& times,
                              Scheme scheme = Scheme::CrankNicolson,
                              std::vector<int> n_values = {});

void write_csv(std::ostream& os, const MoscoReport& report);

/// d_n = ‖T_t^n u - u‖ in L²(m) along a decreasing family.
std::vector<double> freeze_check(const FormFamily& family, const std::vector<double>& u, double t);

/// C_c^∞ bump exp(1 - 1/(1 - r²)), r = (y - center)/radius, peak 1.
struct BumpSpec {
    double center = 0.0;
    double radius = 1.0;

    double value(double y) const;
    double derivative(double y) const;
    double lo() const { return center - radius; }
    double hi() const { return center + radius; }
};

struct CoreApproximation {
    double l2_gap = 0.0;
    double Phi = 0.0;
    double Psi = 0.0;
};

/// For u = φ∘s_inf and u_n = φ∘s_n:
///   l2_gap = ∫ (φ∘s_n - φ∘s_inf)² dm
///   Phi    = ∫ (φ'∘s_n)² (1_{G_n} - 1_G)² ds
///   Psi    = ∫ (φ'∘s_n - φ'∘s_inf)² ds_inf
/// by composite Gauss–Legendre quadrature on the merged knot partition.
/// The bump support must lie inside both images s_n(I) and s_inf(I).
CoreApproximation core_approximation_energy(const BumpSpec& phi, const ScaleFunction& s_n,
                                            const ScaleFunction& s_inf, const ScaleFunction& s,
                                            const SpeedMeasure& m);

}  // namespace regsub
