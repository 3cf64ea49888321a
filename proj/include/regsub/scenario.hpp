#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regsub/characteristic_family.hpp"
#include "regsub/discrete_form.hpp"
#include "regsub/mosco.hpp"
#include "regsub/path.hpp"

namespace regsub {

/// Rejected configuration; `path` names the offending field, e.g.
/// "family.sets[3]".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path))
    {
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum ExitCode : int { kExitPass = 0, kExitGateFailed = 2, kExitConfigInvalid = 3, kExitNumerical = 4 };

struct InitialLawSpec {
    enum class Kind { Hat, Point };
    Kind kind = Kind::Hat;
    double center = 0.0;
    double half_width = 0.0;
    /// g_n = g + (perturbation / n) b with ∫|b| dm = 1 and ∫ b dm = 0.
    double perturbation = 0.0;
    double x0 = 0.0;
};

struct McSpec {
    std::size_t n_paths = 1000;
    double T = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> delta_list{0.01, 0.02, 0.05};
    double rho = 0.4;
    std::vector<double> times{0.25, 0.5};
    int grid_N = 100;
    std::size_t n_mc = 4000;
};

struct Gates {
    double mosco_final_max = 1e-2;
    double freeze_ratio = 0.2;
    double core_ratio = 0.05;
    double ks_slack = 1.5;
    double z_max = 3.0;
    double qv_rel_error = 0.05;
};

struct Scenario {
    std::string name;
    DomainSpec domain;
    ScaleFunction scale;
    SpeedMeasure speed;
    CharacteristicFamily family;
    BoundaryFlags boundary;
    int grid_N = 400;
    double base_point = 0.0;
    std::vector<double> times;
    std::string dictionary = "standard";
    std::optional<double> freeze_t;
    /// Test function of the freeze check: hat with (center, half_width).
    double freeze_center = 0.0;
    double freeze_half_width = 0.0;
    std::optional<BumpSpec> bump;
    std::optional<McSpec> mc;
    InitialLawSpec initial_law;
    Gates gates;
    std::filesystem::path output_dir = "out";
    /// Input with defaults filled in, echoed into the manifest.
    nlohmann::json normalized;
};

/// Parses and checks a configuration, filling defaults. Throws ConfigError.
Scenario validate_config(const nlohmann::json& raw);

enum class RunMode { All, Mosco, Paths, WeakConv };

struct SuiteSummary {
    std::string suite;
    bool pass = true;
    std::string detail;
};

struct RunResult {
    int exit_code = kExitPass;
    std::vector<SuiteSummary> suites;
    std::vector<std::filesystem::path> artifacts;
};

/// Runs the suites of `mode`, writes CSV/JSON artifacts and manifest.json
/// into sc.output_dir. Numerical failures are reported as kExitNumerical.
RunResult run_scenario(const Scenario& sc, RunMode mode = RunMode::All);

/// Initial laws of the family members and of the limit on one grid.
struct LawFamily {
    InitialLaw limit;
    std::vector<InitialLaw> members;
};

/// Hat law g (or a point mass) and g_n = g + (perturbation / n) b.
/// Throws ConfigError when some g_n would be negative.
LawFamily build_laws(const InitialLawSpec& spec, const Grid& grid, const std::vector<int>& n_values);

/// Transform scale of the path statistics: s_inf for a decreasing family,
/// s_1 for an increasing one.
const ScaleFunction& transform_scale(const FormFamily& family);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& file);

}  // namespace regsub
