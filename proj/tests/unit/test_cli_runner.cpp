#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "regsub/scenario.hpp"

using namespace regsub;
namespace fs = std::filesystem;

namespace {

nlohmann::json load(const std::string& name)
{
    std::ifstream in(std::string(REGSUB_TEST_DATA) + "/" + name);
    return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string config_error_path(const nlohmann::json& raw)
{
    try {
        validate_config(raw);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "";
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("regsub_test_" + name);
    fs::remove_all(p);
    return p;
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(REGSUB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal config gets defaults")
{
    std::ifstream in(std::string(REGSUB_SCENARIOS) + "/minimal.json");
    const auto sc = validate_config(nlohmann::json::parse(in));
    CHECK(sc.grid_N == 400);
    CHECK(sc.dictionary == "standard");
    CHECK(sc.base_point == 0.5);
    CHECK(sc.family.sets.size() == 4);
    CHECK(sc.family.direction == Direction::Decreasing);
    CHECK(sc.times == kStandardTimes);
    CHECK_FALSE(sc.mc.has_value());
    CHECK(sc.normalized["grid_N"] == 400);
}

TEST_CASE("rejected configs name the offending field")
{
    CHECK(config_error_path(load("non_nested.json")) == "family.sets[2]");
    CHECK(config_error_path(load("grid_too_small.json")) == "grid_N");
    CHECK(config_error_path(load("missing_seed.json")) == "mc.seed");

    auto raw = load("small_decreasing.json");
    raw["direction"] = "sideways";
    CHECK(config_error_path(raw) == "direction");
    raw = load("small_decreasing.json");
    raw.erase("direction");
    CHECK(config_error_path(raw) == "direction");
    raw = load("small_decreasing.json");
    raw["mc"]["times"] = {0.5, 0.25};
    CHECK(config_error_path(raw) == "mc.times");
    raw = load("small_decreasing.json");
    raw["family"]["center"] = 1.5;
    CHECK(config_error_path(raw) == "family.center");
    CHECK(config_error_path(nlohmann::json::array()) == "$");
}

TEST_CASE("same config and seed give byte-identical artifacts")
{
    auto raw = load("small_decreasing.json");
    const auto a = scratch("det_a"), b = scratch("det_b");
    raw["output_dir"] = a.string();
    const auto ra = run_scenario(validate_config(raw));
    raw["output_dir"] = b.string();
    const auto rb = run_scenario(validate_config(raw));
    CHECK(ra.exit_code == rb.exit_code);
    REQUIRE(ra.artifacts.size() == rb.artifacts.size());
    int compared = 0;
    for (const auto& p : ra.artifacts) {
        if (p.filename() == "manifest.json")
            continue;
        CHECK_MESSAGE(slurp(p) == slurp(b / p.filename()), p.filename().string());
        ++compared;
    }
    for (const char* name : {"mosco_report.csv", "fdd_report.csv", "modulus_report.csv", "qv_report.csv",
                             "boundary_class.json", "initial_law_report.csv"})
        CHECK_MESSAGE(fs::exists(a / name), name);
    CHECK(compared >= 6);

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["seed"] == 5);
    for (const auto& [name, hash] : manifest["artifacts"].items())
        CHECK(hash == sha256_file(a / name));
    CHECK(manifest.contains("generated_at"));

    // every CSV starts with a header row
    for (const auto& p : ra.artifacts)
        if (p.extension() == ".csv") {
            const auto text = slurp(p);
            CHECK(text.substr(0, text.find('\n')).find(',') != std::string::npos);
            CHECK(std::isalpha(static_cast<unsigned char>(text[0])));
        }
}

TEST_CASE("increasing golden scenario has a monotone certificate")
{
    std::ifstream in(std::string(REGSUB_SCENARIOS) + "/increasing_removed.json");
    auto raw = nlohmann::json::parse(in);
    const auto dir = scratch("increasing");
    raw["output_dir"] = dir.string();
    const auto r = run_scenario(validate_config(raw), RunMode::Mosco);
    const auto text = slurp(dir / "mosco_report.csv");
    CHECK(text.find("summary,monotone_ok,1,") != std::string::npos);
    for (const auto& s : r.suites)
        CHECK_MESSAGE(s.pass, s.suite << ": " << s.detail);
    CHECK(r.exit_code == kExitPass);
    CHECK(fs::exists(dir / "core_energy.csv"));
}

TEST_CASE("dyadic scenario writes the freeze table")
{
    auto raw = load("small_decreasing.json");
    raw["family"] = {{"kind", "example26"}, {"K", 8}, {"n_list", {1, 2, 4}}};
    raw.erase("mc");
    raw["freeze"] = {{"t", 0.1}, {"hat", {0.5, 0.25}}};
    const auto dir = scratch("freeze");
    raw["output_dir"] = dir.string();
    const auto r = run_scenario(validate_config(raw), RunMode::Mosco);
    const auto text = slurp(dir / "freeze_check.csv");
    CHECK(text.rfind("n,t,distance\n", 0) == 0);
    CHECK(text.find("summary,strictly_decreasing,") != std::string::npos);
    bool found = false;
    for (const auto& s : r.suites)
        found = found || s.suite == "freeze";
    CHECK(found);
    CHECK((r.exit_code == kExitPass || r.exit_code == kExitGateFailed));
}

TEST_CASE("sha256 of a known file")
{
    const auto p = fs::temp_directory_path() / "regsub_abc.txt";
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("command-line exit codes")
{
    const std::string data = REGSUB_TEST_DATA;
    CHECK(cli("validate " + std::string(REGSUB_SCENARIOS) + "/minimal.json") == 0);
    CHECK(cli("validate " + data + "/non_nested.json") == 3);
    CHECK(cli("validate " + data + "/malformed.json") == 3);
    CHECK(cli("run " + data + "/missing_seed.json") == 3);
    CHECK(cli("validate " + data + "/does_not_exist.json") == 3);
    CHECK(cli("frobnicate") != 0);

    const auto a = scratch("cli_a"), b = scratch("cli_b");
    const std::string cfg = data + "/small_decreasing.json";
    const int ea = std::system(("REGSUB_OUTPUT_DIR=" + a.string() + " " + REGSUB_CLI_PATH + " paths " + cfg +
                                " --seed 11 > /dev/null 2>&1").c_str());
    const int eb = std::system(("REGSUB_OUTPUT_DIR=" + b.string() + " " + REGSUB_CLI_PATH + " paths " + cfg +
                                " --seed 11 > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(ea) == WEXITSTATUS(eb));
    CHECK(fs::exists(a / "paths_limit.csv"));
    CHECK(slurp(a / "paths_limit.csv") == slurp(b / "paths_limit.csv"));
    CHECK(slurp(a / "qv_report.csv") == slurp(b / "qv_report.csv"));
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["seed"] == 11);
    CHECK_FALSE(fs::exists(a / "mosco_report.csv"));
}
