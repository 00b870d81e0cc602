#include "greencrit/cli.hpp"
#include "greencrit/config.hpp"
#include "greencrit/error.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace greencrit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const char* env = std::getenv("GREENCRIT_TMP");
    const fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "greencrit_cli_test";
    const fs::path dir = root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig config_from(const std::string& text, const fs::path& dir)
{
    RawConfig raw = parse_config_text(text);
    apply_override(raw, "output.dir=" + dir.string());
    return build_run_config(raw);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int line_of(const std::string& text)
{
    try {
        build_run_config(parse_config_text(text));
    } catch (const ConfigError& e) {
        return e.line;
    }
    return -1;
}

} // namespace

TEST_CASE("config parsing")
{
    const auto raw = parse_config_text("seed = 7\n# comment\n[task]\nq = 2.5  # inline\ncriterion = cond-1\n");
    CHECK(raw.at("seed").value == "7");
    CHECK(raw.at("task.q").value == "2.5");
    CHECK(raw.at("task.q").line == 4);
    const auto c = build_run_config(raw);
    CHECK(c.seed == 7);
    CHECK(c.q == 2.5);
    CHECK(c.criterion == "cond-1");

    const auto blank = parse_config_text("[verify]\ncorrupt =     # nothing\n");
    CHECK(blank.at("verify.corrupt").value.empty());

    CHECK(line_of("[task]\nq = 3\nbogus = 1\n") == 3);
    CHECK(line_of("[task]\nq 3\n") == 2);
    CHECK(line_of("[task\n") == 1);
    CHECK(line_of("[task]\nq = 3\nq = 4\n") == 3);
    CHECK(line_of("[grid]\nn = 2.5\n") == 2);
    CHECK(line_of("[task]\nq = abc\n") == 2);
    CHECK_THROWS_AS(build_run_config(parse_config_text("[task]\nq = 1\n")), ConfigError);
    CHECK_THROWS_AS(build_run_config(parse_config_text("[grid]\nr_min = 10\nr_max = 1\n")), ConfigError);
    CHECK_THROWS_AS(build_run_config(parse_config_text("[grid]\nn = 4\n")), ConfigError);
    CHECK_THROWS_AS(build_run_config(parse_config_text("[task]\ncriterion = cond-9\n")), Error);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/greencrit.ini"), ConfigError);
}

TEST_CASE("overrides and round trip")
{
    RawConfig raw = parse_config_text("[task]\nq = 2\n");
    apply_override(raw, "task.q=4");
    apply_override(raw, "profile.spec = powerlog:1,4,1");
    const auto c = build_run_config(raw);
    CHECK(c.q == 4.0);
    CHECK(c.profile == "powerlog:1,4,1");
    CHECK_THROWS_AS(apply_override(raw, "task.q"), ConfigError);
    CHECK_THROWS_AS(apply_override(raw, "=3"), ConfigError);

    // to_text emits flat keys that parse back to the same config.
    const auto again = build_run_config(parse_config_text(c.to_text()));
    CHECK(again.to_text() == c.to_text());
}

TEST_CASE("exit codes are a function of the verdict")
{
    CHECK(exit_code(Verdict::Finite) == 0);
    CHECK(exit_code(Verdict::Bounded) == 0);
    CHECK(exit_code(Verdict::Divergent) == 1);
    CHECK(exit_code(Verdict::Unbounded) == 1);
    CHECK(exit_code(Verdict::Inconclusive) == 2);
}

TEST_CASE("report")
{
    const auto dir = scratch("report");
    std::ostringstream out, err;
    CHECK(run_command("report", config_from("[task]\ncriterion = cond-int1b\nq = 4\n", dir), out, err) == 0);
    const auto text = slurp(dir / "greencrit_report.txt");
    CHECK(text.find("verdict = Finite") != std::string::npos);
    CHECK(slurp(dir / "greencrit_integrand.csv").rfind("criterion,r,value\n", 0) == 0);

    CHECK(run_command("report", config_from("[task]\ncriterion = cond-int1b\nq = 2\n", dir), out, err) == 1);

    std::ostringstream log;
    CHECK(run_command("report",
                      config_from("[profile]\nspec = powerlog:1,4,1\n[task]\ncriterion = cond-int1b\nq = 2\n", dir),
                      log, err) == 1);
    const auto pl = slurp(dir / "greencrit_report.txt");
    const auto at = pl.find("tail_slope = ");
    REQUIRE(at != std::string::npos);
    const double slope = std::stod(pl.substr(at + 13));
    CHECK(slope >= -1.05);
    CHECK(slope <= -0.95);
}

TEST_CASE("scan")
{
    const auto dir = scratch("scan");
    std::ostringstream out, err;
    CHECK(run_command("scan", config_from("[task]\ncriterion = cond-int1b\n[scan]\nq_lo = 2\nq_hi = 5\n", dir), out,
                      err) == 0);
    CHECK(slurp(dir / "greencrit_scan.csv").rfind("q,verdict\n", 0) == 0);
    CHECK(slurp(dir / "greencrit_scan.txt").find("q_critical = ") != std::string::npos);

    CHECK(run_command("scan", config_from("[task]\ncriterion = cond-int1b\n[scan]\nq_lo = 4\nq_hi = 5\n", dir), out,
                      err) == kExitBracket);
}

TEST_CASE("solve")
{
    const auto dir = scratch("solve");
    std::ostringstream out, err;
    CHECK(run_command("solve", config_from("[task]\nq = 4\na = 1\n", dir), out, err) == 0);
    CHECK(slurp(dir / "greencrit_solution.csv").rfind("rho,u,u_epsilon\n", 0) == 0);
    CHECK(slurp(dir / "greencrit_trace.csv").rfind("iter,sup_change,max_u\n", 0) == 0);
    CHECK(run_command("solve", config_from("[task]\nq = 2\na = 1\n", dir), out, err) == 1);
    CHECK(run_command("solve", config_from("[measure]\nspec = radial_power:0,0\n[task]\nq = 2\na = 1\n", dir), out,
                      err) == 0);
}

TEST_CASE("verify")
{
    const auto dir = scratch("verify");
    std::ostringstream out, err;
    CHECK(run_command("verify", config_from("[task]\nq = 4\na = 1\n", dir), out, err) == 0);
    CHECK(out.str().find("FAIL") == std::string::npos);
    CHECK(out.str().find("PASS moser q=2") != std::string::npos);

    std::ostringstream bad;
    CHECK(run_command("verify", config_from("[task]\nq = 4\na = 1\n[verify]\nsuite = kernel\ncorrupt = symmetry\n", dir),
                      bad, err) == 1);
    CHECK(bad.str().find("FAIL symmetry") != std::string::npos);
}

TEST_CASE("determinism")
{
    const std::string text = "seed = 3\n[task]\nq = 4\na = 1\n[verify]\nsuite = weighted-norm,hardy\ntrials = 50\n";
    const auto d1 = scratch("det1");
    const auto d2 = scratch("det2");
    std::ostringstream out, err;
    auto c1 = config_from(text, d1);
    auto c2 = config_from(text, d2);
    c1.output_dir = d1.string();
    c2.output_dir = d2.string();
    REQUIRE(run_command("verify", c1, out, err) == 0);
    REQUIRE(run_command("verify", c2, out, err) == 0);
    REQUIRE(run_command("report", c1, out, err) == 0);
    REQUIRE(run_command("report", c2, out, err) == 0);
    // The config echo differs only in output.dir; compare everything above it.
    for (const char* name : {"greencrit_verify.txt", "greencrit_report.txt"}) {
        const auto a = slurp(d1 / name), b = slurp(d2 / name);
        CHECK(a.substr(0, a.find("output.dir")) == b.substr(0, b.find("output.dir")));
    }
    CHECK(slurp(d1 / "greencrit_integrand.csv") == slurp(d2 / "greencrit_integrand.csv"));
}
