#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "regsub/path.hpp"
#include "regsub/semigroup.hpp"

namespace regsub {

struct KsResult {
    double stat = 0.0;
    double critical_5pct = 0.0;
};

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic 5% critical
/// value 1.358 sqrt((nx + ny) / (nx ny)). Throws on an empty sample.
KsResult ks_two_sample(std::vector<double> x, std::vector<double> y);

/// Test functions on grid points for the moment cross-check.
struct MomentOracle {
    std::vector<double> f0;
    std::vector<double> f1;
    Scheme scheme = Scheme::CrankNicolson;
};

struct MomentCheck {
    /// "single" for E f0(Z_t0), "product" for E f0(Z_t0) f1(Z_t1).
    std::string kind;
    double t0 = 0.0;
    double t1 = 0.0;
    double mc = 0.0;
    double exact = 0.0;
    double std_error = 0.0;
    double z = 0.0;
};

/// Observations of an ensemble at fixed times. A merged state reports one
/// of its grid points, drawn with probability proportional to cell mass.
struct FddSamples {
    std::vector<double> times;
    /// values[k][p] = reported value of path p at times[k].
    std::vector<std::vector<double>> values;
    /// Moment checks against the semigroup of the ensemble's own form.
    std::vector<MomentCheck> moments;
};

/// Throws when a time exceeds the horizon.
FddSamples sample_fdd(const PathEnsemble& ens, const std::vector<double>& times,
                      const MomentOracle* oracle = nullptr);

struct FddReport {
    std::vector<double> times;
    std::vector<int> n_values;
    /// ks[n][k] and threshold[n][k] for times[k].
    std::vector<std::vector<double>> ks;
    std::vector<std::vector<double>> thresholds;
    /// Final-n statistics all below their critical values.
    bool pass = false;
    /// moments[n] for each family member, then the limit as the last entry.
    std::vector<std::vector<MomentCheck>> moments;
    double max_abs_z = 0.0;
};

FddReport fdd_convergence_suite(const std::vector<FddSamples>& family, const FddSamples& limit,
                                std::vector<int> n_values = {});

/// Convenience form: samples every ensemble at `times` first.
FddReport fdd_convergence_suite(const std::vector<const PathEnsemble*>& family,
                                const PathEnsemble& limit, const std::vector<double>& times,
                                const MomentOracle* oracle = nullptr,
                                std::vector<int> n_values = {});

/// Whether sup{|Z_t - Z_s| : 0 <= s < t <= T, t - s < delta} >= rho for the
/// path with per-state values. Sliding-window sweep over jump times.
bool modulus_reaches(const Path& path, std::span<const double> state_values, double T,
                     double delta, double rho);
/// Quadratic double loop over jump pairs; reference for modulus_reaches.
bool modulus_reaches_bruteforce(const Path& path, std::span<const double> state_values, double T,
                                double delta, double rho);

/// Fraction of paths whose delta-modulus on [0, T] reaches rho.
double modulus_statistic(const PathEnsemble& ens, double T, double delta, double rho);
double modulus_statistic_bruteforce(const PathEnsemble& ens, double T, double delta, double rho);

/// Monte-Carlo P(sup{|B_t - B_s| : 0 <= s < t <= C T, t - s < C delta} >= rho)
/// for standard Brownian motion sampled with step C delta / 64.
double brownian_modulus_bound(double C, double T, double delta, double rho, std::size_t n_mc,
                              std::uint64_t seed);

/// sup over grid cells of Δs0 / m_density(cell); atoms are ignored.
/// Infinite when s0 grows on a cell without density.
double sup_phi(const Grid& grid, const ScaleFunction& s0);

struct TightnessReport {
    std::vector<double> A_grid;
    /// mass[l][a] = P(|Z_0| <= A_grid[a]) under laws[l].
    std::vector<std::vector<double>> mass;
    /// min over laws at the largest A.
    double liminf_proxy = 0.0;
};

TightnessReport initial_tightness(const std::vector<InitialLaw>& laws,
                                  const std::vector<double>& A_grid);

struct H2Report {
    std::vector<double> l1_gaps;
    std::vector<double> l2_gaps;
};

/// L¹(m) and L²(m) distances of each density to the limit density.
/// Point-mass laws are rejected.
H2Report h2_check(const std::vector<InitialLaw>& laws, const InitialLaw& limit);

/// One CSV row: n,statistic,parameters,value,threshold,pass.
struct ReportRow {
    std::string n;
    std::string statistic;
    std::string parameters;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

void write_rows(std::ostream& os, const std::vector<ReportRow>& rows);

}  // namespace regsub
