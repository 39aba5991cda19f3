#include <gtest/gtest.h>

#include <random>

#include "catcomp/io.hpp"
#include "catcomp/tomography.hpp"

using namespace catcomp;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::current_path() / "io_scratch" / name;
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST(Numbers, ShortestRoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng) * std::pow(10.0, i % 13 - 6);
        EXPECT_EQ(io::parse_double(io::format_double(x)), x);
    }
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_EQ(io::format_double(-2.0), "-2");
    EXPECT_TRUE(std::isnan(io::parse_double(io::format_double(std::nan("")))));
    EXPECT_EQ(io::parse_double("-inf"), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(io::parse_double("1.5x"), std::runtime_error);
    EXPECT_THROW(io::parse_double(""), std::runtime_error);
}

TEST(Csv, RoundTrip) {
    io::Table t{{"t", "amplitude"}, {}};
    t.add_row({0.0, 0.5});
    t.add_row({1.5e-5, 0.123456789012345});
    std::string text = io::to_csv(t);
    EXPECT_EQ(text, "t,amplitude\n0,0.5\n1.5e-05,0.123456789012345\n");
    io::Table back = io::parse_csv(text);
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(back.column("amplitude")[1], 0.123456789012345);
    EXPECT_THROW(back.column("tau"), std::runtime_error);
    EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
}

TEST(Csv, MalformedInput) {
    EXPECT_THROW(io::parse_csv(""), std::runtime_error);
    EXPECT_THROW(io::parse_csv("a,b\n1,2\n3\n"), std::runtime_error);
    EXPECT_THROW(io::parse_csv("a\nfoo\n"), std::runtime_error);
    io::Table crlf = io::parse_csv("a,b\r\n1,2\r\n");
    EXPECT_EQ(crlf.columns[1], "b");
    EXPECT_EQ(crlf.rows[0][1], 2.0);
}

TEST(Device, RoundTripAndUnknownKeys) {
    DeviceParams d;
    d.chi = 2 * PI * 41e3;
    d.t1_cavity = 300e-6;
    d.kerr_enabled = true;
    DeviceParams back = io::device_from_json(io::to_json(d));
    EXPECT_EQ(back.chi, d.chi);
    EXPECT_EQ(back.t1_cavity, d.t1_cavity);
    EXPECT_TRUE(back.kerr_enabled);
    EXPECT_EQ(back.lever(), d.lever());
    EXPECT_EQ(io::device_from_json(io::Json::object()).t1_qubit, DeviceParams{}.t1_qubit);
    EXPECT_THROW(io::device_from_json({{"t1_cav", 1e-4}}), std::runtime_error);
    EXPECT_THROW(io::device_from_json({{"t1_cavity", -1.0}}), std::invalid_argument);
    EXPECT_THROW(io::device_from_json(io::Json::array()), std::runtime_error);
}

TEST(Schedule, RoundTripAndValidation) {
    io::ScheduleDocument doc{reference_schedule(-5), 17, 0.993};
    doc.schedule.final_v = 3.1;
    io::ScheduleDocument back = io::schedule_from_json(io::to_json(doc));
    ASSERT_EQ(back.schedule.steps.size(), 3u);
    EXPECT_EQ(back.schedule.steps[1].u, -1.85);
    EXPECT_EQ(*back.schedule.final_v, 3.1);
    EXPECT_EQ(back.seed, 17u);
    EXPECT_EQ(*back.achieved_overlap, 0.993);
    EXPECT_EQ(back.schedule.variant, Variant::compress_then_displace);

    io::Json j = io::to_json(doc);
    j["final_v"] = nullptr;
    EXPECT_FALSE(io::schedule_from_json(j).schedule.final_v.has_value());
    j["extra"] = 1;
    EXPECT_THROW(io::schedule_from_json(j), std::runtime_error);
    io::Json missing = io::to_json(doc);
    missing.erase("steps");
    EXPECT_THROW(io::schedule_from_json(missing), std::runtime_error);
    io::Json bad_variant = io::to_json(doc);
    bad_variant["variant"] = "sideways";
    EXPECT_THROW(io::schedule_from_json(bad_variant), std::invalid_argument);
}

TEST(Grids, CharGridTableRoundTrip) {
    CharGrid g = char_function(make_cat(cplx(1.2, 0.4), -1, SpaceSpec(40)), GridAxes{linspace(-3, 3, 13), linspace(-2, 2, 9)});
    io::Table t = io::to_table(g);
    ASSERT_EQ(t.rows.size(), 13u * 9u);
    // Im index outer, Re index inner
    EXPECT_EQ(t.rows[1][0], g.re_axis[1]);
    EXPECT_EQ(t.rows[1][1], g.im_axis[0]);
    CharGrid back = io::char_grid_from_table(io::parse_csv(io::to_csv(t)));
    EXPECT_EQ(back.re_axis, g.re_axis);
    EXPECT_EQ(back.im_axis, g.im_axis);
    EXPECT_EQ((back.values - g.values).cwiseAbs().maxCoeff(), 0.0);
    io::Json env = io::envelope(g, "charfun.csv");
    EXPECT_EQ(env["n_re"], 13);
    EXPECT_EQ(env["n_im"], 9);
    EXPECT_EQ(env["kind"], "char_grid");
}

TEST(Grids, WignerTableRoundTripAndRectangleCheck) {
    WignerGrid w = wigner_from_char(vacuum_char(GridAxes::square(-6, 6, 61)), 2);
    WignerGrid back = io::wigner_grid_from_table(io::to_table(w));
    EXPECT_EQ(back.re_axis, w.re_axis);
    EXPECT_EQ((back.values - w.values).cwiseAbs().maxCoeff(), 0.0);
    io::Table t = io::to_table(w);
    t.rows.pop_back();
    EXPECT_THROW(io::wigner_grid_from_table(t), std::runtime_error);
    EXPECT_EQ(io::envelope(w, "w.csv")["pad_factor"], 2);
}

TEST(RunDirectory, WritesAllFilesAndListsThem) {
    auto root = scratch("run");
    io::RunDirectory dir(root);
    io::Table t{{"x"}, {}};
    t.add_row({1.0});
    dir.csv("series.csv", t);
    dir.json("config.json", {{"seed", 1}});
    dir.grid("charfun", vacuum_char(GridAxes::square(-1, 1, 3)));
    dir.flush({{"ok", true}});
    io::Json s = io::read_json(root / "summary.json");
    std::vector<std::string> files = s["files"];
    EXPECT_EQ(files, (std::vector<std::string>{"charfun.csv", "charfun.json", "config.json", "series.csv", "summary.json"}));
    for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(root / f)) << f;
    EXPECT_EQ(io::read_csv(root / "series.csv").rows[0][0], 1.0);
    EXPECT_EQ(io::read_json(root / "charfun.json")["csv"], "charfun.csv");
    EXPECT_THROW(io::read_text(root / "absent.txt"), std::runtime_error);
}
