#pragma once

#include <vector>

#include <nlohmann/json.hpp>

namespace regsub {

struct Atom {
    double x;
    double mass;
};

/// Radon measure m = step density + finitely many atoms.
///
/// The density is constant on the cells (-inf, b_0), (b_0, b_1), ...,
/// (b_{K-1}, +inf) cut by the sorted breakpoints b_k. Masses of bounded
/// intervals are evaluated in closed form.
class SpeedMeasure {
public:
    static SpeedMeasure uniform(double density);
    /// values.size() must equal breaks.size() + 1.
    static SpeedMeasure step(std::vector<double> breaks, std::vector<double> values);

    SpeedMeasure with_atoms(std::vector<Atom> atoms) const;

    double density(double x) const;
    /// Integral of the density over (a, b); a <= b, either may be infinite.
    double density_mass(double a, double b) const;
    /// Atoms located in the half-open cell [a, b).
    double atom_mass_halfopen(double a, double b) const;
    /// Atoms strictly inside (a, b).
    double atom_mass_open(double a, double b) const;
    /// m((a, b)) including atoms strictly inside.
    double mass(double a, double b) const { return density_mass(a, b) + atom_mass_open(a, b); }
    /// Cell bookkeeping: density over (a, b) plus atoms in [a, b).
    double cell_mass(double a, double b) const
    {
        return density_mass(a, b) + atom_mass_halfopen(a, b);
    }

    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::vector<double> atom_positions() const;

private:
    std::vector<double> breaks_;
    std::vector<double> values_{1.0};
    std::vector<Atom> atoms_;
};

nlohmann::json to_json(const SpeedMeasure& m);

}  // namespace regsub
