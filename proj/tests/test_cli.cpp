#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qlab/cli.hpp"

using namespace qlab;

TEST_CASE("parse_config defaults and overrides") {
    SUBCASE("empty argv gives the full default config") {
        const RunConfig cfg = parse_config({});
        CHECK(cfg.command.empty());
        CHECK(cfg.grid_n == 33);
        CHECK(cfg.eps == doctest::Approx(1e-3));
        CHECK(cfg.tol == doctest::Approx(1e-10));
        CHECK(cfg.seed == 7);
        CHECK(cfg.tau_list.size() == 3);
    }
    SUBCASE("flags set commands and values") {
        const RunConfig cfg = parse_config({"verify", "--grid-n", "17", "--preset", "manufactured"});
        CHECK(cfg.command == "verify");
        CHECK(cfg.grid_n == 17);
    }
    SUBCASE("eps outside the documented range is rejected") {
        CHECK_THROWS_AS(parse_config({"dn", "--eps", "0.5"}), usage_error);
        CHECK_THROWS_AS(parse_config({"dn", "--eps", "1e-6"}), usage_error);
    }
    SUBCASE("unknown command is a usage error") {
        CHECK_THROWS_AS(parse_config({"frobnicate"}), usage_error);
    }
    SUBCASE("type mismatch is a usage error") {
        CHECK_THROWS_AS(parse_config({"dn", "--grid-n", "many"}), usage_error);
    }
    SUBCASE("flags override the config file") {
        const auto path = std::filesystem::temp_directory_path() / "qlab_cfg_test.ini";
        {
            std::ofstream os(path);
            os << "# comment\n";
            os << "[run]\n";  // section headers are decorative
            os << "grid_n = 65\n";
            os << "eps = 0.01\n";
        }
        const RunConfig cfg =
            parse_config({"forward", "--config", path.string(), "--grid-n", "33"});
        CHECK(cfg.grid_n == 33);          // flag wins
        CHECK(cfg.eps == doctest::Approx(0.01));  // file value survives
        std::filesystem::remove(path);
    }
    SUBCASE("unknown config keys are usage errors naming the key") {
        const auto path = std::filesystem::temp_directory_path() / "qlab_cfg_bad.ini";
        {
            std::ofstream os(path);
            os << "grid_m = 65\n";
        }
        CHECK_THROWS_WITH_AS(parse_config({"forward", "--config", path.string()}),
                             doctest::Contains("grid_m"), usage_error);
        std::filesystem::remove(path);
    }
}

TEST_CASE("run: forward command produces a report and artifacts") {
    RunConfig cfg;
    cfg.command = "forward";
    cfg.grid_n = 17;
    cfg.preset = "manufactured";
    const auto dir = std::filesystem::temp_directory_path() / "qlab_cli_fwd";
    cfg.output_dir = dir.string();
    const Report rep = run(cfg);
    CHECK(!rep.any_fail());
    CHECK(std::filesystem::exists(dir / "report.txt"));
    CHECK(std::filesystem::exists(dir / "u0.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("run: determinism of metrics") {
    RunConfig cfg;
    cfg.command = "forward";
    cfg.grid_n = 17;
    const auto dir = std::filesystem::temp_directory_path() / "qlab_cli_det";
    cfg.output_dir = dir.string();
    const Report a = run(cfg);
    const Report b = run(cfg);
    REQUIRE(a.metrics.size() == b.metrics.size());
    for (size_t k = 0; k < a.metrics.size(); ++k) {
        CHECK(a.metrics[k].first == b.metrics[k].first);
        CHECK(a.metrics[k].second == b.metrics[k].second);  // bit-identical
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_main exit codes") {
    CHECK(run_main({"frobnicate"}) == 2);
    CHECK(run_main({}) == 2);  // no command
}
