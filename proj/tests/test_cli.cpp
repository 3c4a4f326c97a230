#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    json report;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(PFEIG_BINARY) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    int status = pclose(pipe);
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = out;
    r.report = json::value_t::discarded;
    if (!out.empty() && out[0] == '{')
        r.report = json::parse(out, nullptr, false);
    return r;
}

std::string write_tmp(const std::string& name, const std::string& content) {
    std::string path = "/tmp/pfeig_test_" + name;
    std::ofstream(path) << content;
    return path;
}

const char* kAsym = "2\n0 0 0.2\n0 1 0.4\n1 0 0.3\n1 1 0.1\n";

} // namespace

TEST_CASE("solve: report and exit code") {
    auto f = write_tmp("asym.txt", kAsym);
    auto r = run("solve " + f);
    CHECK(r.exit_code == 0);
    REQUIRE_FALSE(r.report.is_discarded());
    CHECK(r.report["schema_version"] == 1);
    CHECK(r.report["command"] == "solve");
    CHECK(r.report.contains("config"));
    CHECK(r.report.contains("diagnostics"));
    auto res = r.report["result"];
    CHECK(double(res["lambda_star"]) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(double(res["u_star"][1]) == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(double(res["eta_star"][1]) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(double(res["twist"]["pi_star"][0]) ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-10));
}

TEST_CASE("solve: reducible matrix is a model error (exit 2)") {
    auto f = write_tmp("red.txt", "2\n0 0 0.5\n0 1 0.5\n1 1 0.5\n");
    auto r = run("solve " + f);
    CHECK(r.exit_code == 2);
    REQUIRE_FALSE(r.report.is_discarded());
    CHECK(r.report["error"]["kind"] == "reducible");
    CHECK(std::string(r.report["error"]["message"]).find("state") !=
          std::string::npos);
}

TEST_CASE("solve: missing file is a usage error (exit 1)") {
    auto r = run("solve /tmp/pfeig_no_such_file.txt");
    CHECK(r.exit_code == 1);
}

TEST_CASE("solve: malformed matrix is a usage error (exit 1)") {
    auto f = write_tmp("bad.txt", "2\n0 0 -3\n");
    auto r = run("solve " + f);
    CHECK(r.exit_code == 1);
    CHECK(r.report["error"]["kind"] == "parse");
}

TEST_CASE("mc: estimate brackets the exact value") {
    auto f = write_tmp("asym.txt", kAsym);
    auto r = run("mc " + f + " --seed 42 --cycles 100000");
    CHECK(r.exit_code == 0);
    auto res = r.report["result"];
    CHECK(double(res["ci"]["lambda_lo"]) <= 0.5);
    CHECK(double(res["ci"]["lambda_hi"]) >= 0.5);
    CHECK(std::abs(double(res["lambda_star"]) - 0.5) < 0.01);
    CHECK(r.report["config"]["seed"] == 42);
    CHECK(r.report["config"]["seed_source"] == "flag");
}

TEST_CASE("mc: zero cycles is a usage error") {
    auto f = write_tmp("asym.txt", kAsym);
    auto r = run("mc " + f + " --cycles 0 --seed 1");
    CHECK(r.exit_code == 1);
}

TEST_CASE("mc: repeated seed reproduces the report byte for byte") {
    auto f = write_tmp("asym.txt", kAsym);
    auto a = run("mc " + f + " --seed 9 --cycles 5000");
    auto b = run("mc " + f + " --seed 9 --cycles 5000");
    REQUIRE(a.exit_code == 0);
    // timings differ; everything else must match exactly
    a.report["diagnostics"].erase("elapsed_ms");
    b.report["diagnostics"].erase("elapsed_ms");
    CHECK(a.report.dump() == b.report.dump());
}

TEST_CASE("mc: entropy seed is echoed when no flag is given") {
    auto f = write_tmp("asym.txt", kAsym);
    auto r = run("mc " + f + " --cycles 100");
    CHECK(r.exit_code == 0);
    CHECK(r.report["config"]["seed_source"] == "entropy");
    CHECK(r.report["config"]["seed"].is_number());
}

TEST_CASE("conditions: A3 certificate on the 2x2 benchmark") {
    auto f = write_tmp("asym.txt", kAsym);
    auto r = run("conditions " + f);
    CHECK(r.exit_code == 0);
    auto cert = r.report["result"]["a3prime"]["certificate"];
    CHECK(double(cert["c1"]) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(double(cert["c2"]) == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(double(cert["delta"]) == doctest::Approx(0.15).epsilon(1e-10));
}

TEST_CASE("conditions: period-2 matrix fails certification") {
    auto f = write_tmp("per2.txt", "2\n0 1 0.5\n1 0 0.5\n");
    auto r = run("conditions " + f + " --m-max 4");
    CHECK(r.exit_code == 0);
    CHECK(r.report["result"]["period"] == 2);
    CHECK(r.report["result"]["a3prime"]["found"] == false);
    CHECK(r.report["result"]["a3prime"]["diagnostics"].size() == 4);
}

TEST_CASE("conditions: stochastic irreducible reports theta1 = 0") {
    auto f = write_tmp("stoch.txt", "2\n0 0 0.5\n0 1 0.5\n1 0 0.5\n1 1 0.5\n");
    auto r = run("conditions " + f);
    CHECK(r.exit_code == 0);
    CHECK(std::abs(double(r.report["result"]["theta1"])) <= 1e-8);
}

TEST_CASE("example bd: comparison report") {
    auto r = run("example bd --p 0.3 --L 200");
    CHECK(r.exit_code == 0);
    auto res = r.report["result"];
    CHECK(double(res["closed_form_lambda"]) ==
          doctest::Approx(0.9165151).epsilon(1e-6));
    CHECK(double(res["lambda_gap"]) < 1e-3);
    CHECK(res["period"] == 2);
    CHECK(double(res["u_rel_err_max"]) < 0.02);
}

TEST_CASE("example bd: bad p is a usage error") {
    auto r = run("example bd --p 1.5");
    CHECK(r.exit_code == 1);
    CHECK(r.report["error"]["kind"] == "domain");
}

TEST_CASE("example kernel: uniform kernel hits the closed form") {
    auto r = run("example kernel --kind uniform --cycles 20000 --seed 7");
    CHECK(r.exit_code == 0);
    auto res = r.report["result"];
    CHECK(res["within_3_halfwidths"] == true);
    CHECK(std::abs(double(res["lambda_hat"]) - 0.8) < 0.02);
    CHECK(double(res["closed_form_lambda"]) == doctest::Approx(0.8));
}

TEST_CASE("unknown flags and missing subcommands exit 1") {
    CHECK(run("").exit_code == 1);
    CHECK(run("frobnicate").exit_code == 1);
    auto f = write_tmp("asym.txt", kAsym);
    CHECK(run("solve " + f + " --no-such-flag").exit_code == 1);
}

TEST_CASE("--output writes the report to a file") {
    auto f = write_tmp("asym.txt", kAsym);
    std::string out = "/tmp/pfeig_test_report.json";
    std::remove(out.c_str());
    auto r = run("solve " + f + " --output " + out);
    CHECK(r.exit_code == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    json rep = json::parse(in);
    CHECK(double(rep["result"]["lambda_star"]) ==
          doctest::Approx(0.5).epsilon(1e-10));
}
