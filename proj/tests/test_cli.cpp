#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "catcomp/io.hpp"

using namespace catcomp;
namespace fs = std::filesystem;

#ifndef CATCOMP_CLI_PATH
#define CATCOMP_CLI_PATH "catcomp_cli"
#endif

namespace {

fs::path run_root() { return fs::current_path() / "cli_runs"; }

int cli(const std::string& args) {
    const std::string cmd = std::string(CATCOMP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
    fs::path p = run_root() / name;
    fs::remove_all(p);
    return p;
}

fs::path write_config(const std::string& name, const io::Json& j) {
    fs::path p = run_root() / (name + ".json");
    io::write_json(p, j);
    return p;
}

}  // namespace

TEST(Cli, BudgetWritesStandardFiles) {
    fs::path out = fresh("budget");
    ASSERT_EQ(cli("budget --out " + out.string()), 0);
    for (const char* f : {"config.json", "series.csv", "summary.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
    io::Json s = io::read_json(out / "summary.json");
    EXPECT_EQ(s["command"], "budget");
    EXPECT_FALSE(s["fit_failed"].get<bool>());
    EXPECT_EQ(s["rows"].size(), 7u);
    io::Json c = io::read_json(out / "config.json");
    EXPECT_EQ(c["u"], 1.0);
    EXPECT_EQ(c["device"]["t1_cavity"], 260e-6);
}

TEST(Cli, IdenticalInputsGiveIdenticalBytes) {
    fs::path a = fresh("charfun_a"), b = fresh("charfun_b");
    const std::string args = "charfun --grid -4:4:41 --seed 5 --mode lindblad";
    fs::path cfg = write_config("charfun_cfg", {{"time_us", 30.0}, {"cavity_dim", 40}});
    ASSERT_EQ(cli(args + " --config " + cfg.string() + " --out " + a.string()), 0);
    ASSERT_EQ(cli(args + " --config " + cfg.string() + " --out " + b.string()), 0);
    std::vector<std::string> files = io::read_json(a / "summary.json")["files"];
    EXPECT_EQ(files.size(), 5u);
    io::Json s = io::read_json(a / "summary.json");
    // a -4:4 window truncates the cat, so the grid parity is withheld
    EXPECT_TRUE(s["parity_char"].is_null());
    EXPECT_FALSE(s["warnings"].empty());
    for (const auto& f : files) EXPECT_EQ(io::read_text(a / f), io::read_text(b / f)) << f;
}

TEST(Cli, GridCsvMatchesEnvelope) {
    fs::path out = fresh("cat");
    ASSERT_EQ(cli("cat --grid -6:6:61 --out " + out.string()), 0);
    io::Json env = io::read_json(out / "charfun.json");
    CharGrid g = io::char_grid_from_table(io::read_csv(out / env["csv"].get<std::string>()));
    EXPECT_EQ(g.re_axis.size(), env["n_re"].get<std::size_t>());
    EXPECT_EQ(g.re_axis, env["re_axis"].get<std::vector<double>>());
    io::Json s = io::read_json(out / "summary.json");
    EXPECT_LT(s["parity_fock"].get<double>(), -0.95);
    EXPECT_NEAR(s["outcome_probability"].get<double>(), 0.5, 0.05);
}

TEST(Cli, ScheduleFromConfigIsUsed) {
    fs::path out = fresh("compress_zero");
    io::Json sch = {{"target_db", 0.0}, {"variant", "compress-then-displace"}, {"steps", {{{"u", 0.0}, {"v", 0.0}}}}};
    fs::path cfg = write_config("zero_schedule", {{"schedule", sch}, {"cavity_dim", 30}});
    ASSERT_EQ(cli("compress --config " + cfg.string() + " --out " + out.string()), 0);
    io::Json s = io::read_json(out / "summary.json");
    EXPECT_NEAR(s["variance_db"]["x"].get<double>(), 0.0, 1e-9);
    EXPECT_NEAR(s["fidelity_to_squeezed_vacuum"].get<double>(), 1.0, 1e-9);
}

TEST(Cli, OptimizerFailureExitsTwo) {
    fs::path out = fresh("optimize_fail");
    fs::path cfg = write_config("optimize_fail", {{"target_db", -7.0}, {"restarts", 1}, {"max_evals", 5}, {"cavity_dim", 30}});
    EXPECT_EQ(cli("optimize --config " + cfg.string() + " --out " + out.string()), 2);
    io::Json s = io::read_json(out / "summary.json");
    EXPECT_TRUE(s["fit_failed"].get<bool>());
    EXPECT_FALSE(s["failures"].empty());
    EXPECT_TRUE(fs::exists(out / "schedule.json"));
}

TEST(Cli, BadInputsAreRejected) {
    fs::path cfg = write_config("unknown_key", {{"restart", 3}});
    EXPECT_EQ(cli("optimize --config " + cfg.string() + " --out " + fresh("bad1").string()), 1);
    EXPECT_FALSE(fs::exists(run_root() / "bad1" / "summary.json"));
    EXPECT_NE(cli("charfun --mode kraus --out " + fresh("bad2").string()), 0);
    EXPECT_EQ(cli("charfun --grid 3:1:10 --out " + fresh("bad3").string()), 1);
    EXPECT_NE(cli("teleport"), 0);
}

TEST(Cli, DecayRunsForOneClass) {
    fs::path out = fresh("decay");
    fs::path cfg =
        write_config("decay_small", {{"classes", {"uncompressed"}}, {"t_max_us", 150.0}, {"n_times", 11}, {"bootstrap", 10}});
    ASSERT_EQ(cli("decay --config " + cfg.string() + " --out " + out.string()), 0);
    io::Json s = io::read_json(out / "summary.json");
    ASSERT_EQ(s["classes"].size(), 1u);
    EXPECT_NEAR(s["classes"][0]["tau_us"].get<double>(), 42.0, 0.15 * 42.0);
    io::Table t = io::read_csv(out / "series.csv");
    EXPECT_EQ(t.rows.size(), 11u);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"xi_db", "t", "amplitude", "signed_amplitude", "center"}));
}
