#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pinnhs/cli.hpp"

using namespace pinnhs;
namespace fs = std::filesystem;

namespace {

std::string data_path(const std::string& rel) { return std::string(PINNHS_DATA_DIR) + "/" + rel; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunManifest tiny_train_manifest(const std::string& out) {
    RunManifest m;
    m.command = "train-case";
    m.case_path = data_path("cases/A13_4.json");
    m.out_dir = out;
    m.trials = 1;
    m.seed = 3;
    m.epochs = 4;
    m.schedule = "joint";
    m.count_divisor = 250.0;
    m.widths = {2, 4, 1};
    m.field_nx = 31;
    m.field_ny = 21;
    return m;
}

}  // namespace

TEST_CASE("manifest validation") {
    RunManifest m;
    m.command = "bogus";
    CHECK_THROWS_AS(validate_manifest(m), ConfigError);
    m.command = "validate";
    m.study = "nope";
    CHECK_THROWS_AS(validate_manifest(m), ConfigError);
    m.study = "intro1d";
    CHECK_NOTHROW(validate_manifest(m));
    m.command = "train-case";
    CHECK_THROWS_AS(validate_manifest(m), ConfigError);  // needs --case
}

TEST_CASE("missing case file produces a diagnostic and error record") {
    RunManifest m;
    m.command = "train-case";
    m.case_path = "does_not_exist.json";
    m.out_dir = "cli_err_out";
    CHECK(run(m) != 0);
    CHECK(fs::exists("cli_err_out/error.json"));
    fs::remove_all("cli_err_out");
}

TEST_CASE("fd-check writes field and summary artifacts") {
    RunManifest m;
    m.command = "fd-check";
    m.case_path = data_path("cases/A13_4.json");
    m.out_dir = "cli_fd_out";
    m.fd_h = 2900.0;
    m.fd_nx = 64;
    m.fd_ny = 32;
    CHECK(run(m) == 0);
    CHECK(fs::exists("cli_fd_out/fd_field.csv"));
    CHECK(fs::exists("cli_fd_out/fd_summary.json"));
    CHECK(fs::exists("cli_fd_out/manifest.json"));
    fs::remove_all("cli_fd_out");
}

TEST_CASE("train-case writes the full artifact set") {
    const RunManifest m = tiny_train_manifest("cli_tc_out");
    CHECK(run(m) == 0);
    for (const char* f : {"manifest.json", "report.json", "summary.csv",
                          "train_log_trial1.csv", "ensemble_trial1.json", "field_trial1.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(fs::path("cli_tc_out") / f));
    }
    // training log has the documented schema and one row per epoch
    const std::string log = slurp("cli_tc_out/train_log_trial1.csv");
    CHECK(log.find("epoch,L_PDE,L_BC,L_IC,L_CB,L_h,L_Q,L_Data,") == 0);
    int lines = 0;
    for (char ch : log) lines += ch == '\n';
    CHECK(lines == 1 + 4);  // header + epochs
    fs::remove_all("cli_tc_out");
}

TEST_CASE("deterministic mode reproduces artifacts byte for byte") {
    RunManifest a = tiny_train_manifest("cli_det_a");
    RunManifest b = tiny_train_manifest("cli_det_b");
    CHECK(run(a) == 0);
    CHECK(run(b) == 0);
    for (const char* f : {"report.json", "summary.csv", "train_log_trial1.csv",
                          "ensemble_trial1.json", "field_trial1.csv"}) {
        CAPTURE(f);
        CHECK(slurp(fs::path("cli_det_a") / f) == slurp(fs::path("cli_det_b") / f));
    }
    fs::remove_all("cli_det_a");
    fs::remove_all("cli_det_b");
}

TEST_CASE("compare-modes isolates the data term and emits the paired table") {
    RunManifest m = tiny_train_manifest("cli_cmp_out");
    m.command = "compare-modes";
    CHECK(run(m) == 0);
    CHECK(fs::exists("cli_cmp_out/with_probes/report.json"));
    CHECK(fs::exists("cli_cmp_out/no_probes/report.json"));
    const std::string cmp = slurp("cli_cmp_out/compare.csv");
    CHECK(cmp.find("mode,case_id") == 0);
    CHECK(cmp.find("no_probes,") != std::string::npos);
    CHECK(cmp.find("with_probes,") != std::string::npos);

    // the no-probes run must never see probe readings: its L_Data is zero
    const std::string log = slurp("cli_cmp_out/no_probes/train_log_trial1.csv");
    std::istringstream ss(log);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
        std::istringstream row(line);
        std::string cell;
        for (int i = 0; i <= 7 && std::getline(row, cell, ','); ++i) {
        }
        CHECK(cell == "0");  // L_Data column
    }
    fs::remove_all("cli_cmp_out");
}

TEST_CASE("validate intro1d smoke run") {
    RunManifest m;
    m.command = "validate";
    m.study = "intro1d";
    m.out_dir = "cli_intro_out";
    m.epochs = 5;
    m.widths = {2, 6, 1};
    CHECK(run(m) == 0);
    CHECK(fs::exists("cli_intro_out/intro1d.csv"));
    fs::remove_all("cli_intro_out");
}
