// Command-line harness: validate and run scenario configurations.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "regsub/scenario.hpp"

namespace {

nlohmann::json load(const std::string& file)
{
    std::ifstream in(file);
    if (!in)
        throw regsub::ConfigError("$", "cannot open " + file);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw regsub::ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
}

regsub::Scenario prepare(const std::string& file, std::optional<std::uint64_t> seed)
{
    auto raw = load(file);
    if (seed) {
        if (!raw.contains("mc"))
            throw regsub::ConfigError("mc", "--seed given but the scenario has no mc section");
        raw["mc"]["seed"] = *seed;
    }
    if (const char* dir = std::getenv("REGSUB_OUTPUT_DIR"); dir && *dir)
        raw["output_dir"] = dir;
    return regsub::validate_config(raw);
}

int run(const std::string& file, std::optional<std::uint64_t> seed, regsub::RunMode mode)
{
    const auto sc = prepare(file, seed);
    const auto result = regsub::run_scenario(sc, mode);
    for (const auto& s : result.suites)
        std::cout << (s.pass ? "PASS " : "FAIL ") << s.suite << ": " << s.detail << '\n';
    std::cout << "artifacts: " << sc.output_dir.string() << "  exit " << result.exit_code << '\n';
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dirichlet subspace laboratory"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;

    auto* validate = app.add_subcommand("validate", "check a scenario and print it with defaults");
    validate->add_option("config", config, "scenario JSON")->required();

    struct Mode {
        const char* name;
        const char* help;
        regsub::RunMode mode;
    };
    const Mode modes[] = {
        {"run", "all suites", regsub::RunMode::All},
        {"mosco", "semigroup certificate, freeze and core energies", regsub::RunMode::Mosco},
        {"paths", "path ensembles and quadratic variation", regsub::RunMode::Paths},
        {"weakconv", "fdd, modulus and initial-law checks", regsub::RunMode::WeakConv},
    };
    std::vector<std::pair<CLI::App*, regsub::RunMode>> runners;
    for (const auto& m : modes) {
        auto* sub = app.add_subcommand(m.name, m.help);
        sub->add_option("config", config, "scenario JSON")->required();
        sub->add_option("--seed", seed, "override mc.seed");
        runners.emplace_back(sub, m.mode);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*validate) {
            const auto sc = prepare(config, std::nullopt);
            std::cout << sc.normalized.dump(2) << '\n';
            return regsub::kExitPass;
        }
        for (const auto& [sub, mode] : runners)
            if (*sub)
                return run(config, seed, mode);
    } catch (const regsub::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return regsub::kExitConfigInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
