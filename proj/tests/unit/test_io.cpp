#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fpi/field_io.hpp"
#include "fpi/random_mdp.hpp"
#include "fpi/run_config.hpp"

namespace fpi {
namespace {

TEST(FormatReal, RoundTripsExactly) {
    for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 0.970299, -1e-300, 6.02e23}) {
        EXPECT_EQ(parse_real(format_real(v)), v);
    }
    EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_TRUE(std::isnan(parse_real("nan")));
    EXPECT_EQ(parse_real("-inf"), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(parse_real("1.0x"), std::invalid_argument);
}

TEST(FieldCsv, WriteReadRoundTrip) {
    const std::vector<double> values{0.0, 0.5, -std::numeric_limits<double>::infinity(), 1.0 / 7.0};
    std::stringstream ss;
    write_field_csv(ss, values, {{"field", "cdf"}, {"grid.dims", "2 2"}});
    EXPECT_EQ(ss.str().substr(0, 14), "# field: cdf\n#");
    const FieldFile f = read_field_csv(ss);
    EXPECT_EQ(f.values, values);
    EXPECT_EQ(f.find("field").value(), "cdf");
    EXPECT_FALSE(f.find("missing").has_value());
}

TEST(FieldCsv, GridHeaderRoundTrip) {
    const GridSpec g({Axis{-15.0, 15.0, 201}, Axis{-6.0, 6.0, 101}}, {{0.0}, {1.0}});
    const ArtifactHeader h = grid_header(g);
    EXPECT_EQ(grid_dims_from_header(h), (std::vector<std::size_t>{201, 101}));
}

TEST(Pgm, GoldenCdfImage) {
    const std::vector<std::size_t> dims{3, 2};
    const std::vector<double> f{0.0, 1.0, 0.5, 0.25, 1.0, 0.0};
    std::stringstream ss;
    write_pgm(ss, layout_image(dims, cdf_gray(f)), {{"field", "cdf"}});
    EXPECT_EQ(ss.str(), "P2\n# field: cdf\n3 2\n255\n0 191 255\n255 128 0\n");
}

TEST(Pgm, BoundaryMarkingAndOverlay) {
    const std::vector<std::size_t> dims{3, 3};
    RegionMask m = RegionMask::empty(9);
    for (std::size_t s = 0; s < 9; ++s) m.members[s] = 1;
    m.members[0] = 0;
    const auto g = mask_gray(dims, m, true);
    EXPECT_EQ(g[1], 128);  // neighbour of the missing corner
    EXPECT_EQ(g[3], 128);
    EXPECT_EQ(g[8], 255);
    EXPECT_EQ(g[0], 0);
    const RegionMask a{{1, 1, 0, 0}}, b{{1, 0, 1, 0}};
    EXPECT_EQ(overlay_gray(a, b), (std::vector<std::uint8_t>{255, 170, 85, 0}));
}

TEST(Pgm, ValueGrayMapsExtremes) {
    const std::vector<double> v{-2.0, 0.0, -1.0, -std::numeric_limits<double>::infinity()};
    EXPECT_EQ(value_gray(v), (std::vector<std::uint8_t>{0, 255, 128, 0}));
}

TEST(MdpJson, RoundTrip) {
    const FiniteMdp mdp = random_mdp(42);
    EXPECT_TRUE(mdp_from_json(mdp_to_json(mdp)) == mdp);
}

TEST(RunConfig, DefaultsAndRoundTrip) {
    const RunConfig d = parse_run_config("");
    EXPECT_DOUBLE_EQ(d.gamma, 0.99);
    EXPECT_DOUBLE_EQ(d.p, 0.1);
    EXPECT_DOUBLE_EQ(d.t0, 1.0);
    EXPECT_DOUBLE_EQ(d.t_factor, 1.1);
    RunConfig c = parse_run_config("env: acc\ngrid: [51, 41]\nparams: {dt: 0.05}\nmode: barrier\n");
    EXPECT_EQ(c.grid, (std::vector<std::size_t>{51, 41}));
    EXPECT_EQ(c.mode, ImprovementMode::Barrier);
    const RunConfig again = parse_run_config(c.to_yaml());
    EXPECT_EQ(again.to_yaml(), c.to_yaml());
    EXPECT_EQ(again.params.at("dt"), 0.05);
}

TEST(RunConfig, ErrorsNameFieldAndLine) {
    try {
        parse_run_config("env: acc\ngamma: 1.5\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("gamma"), std::string::npos);
    }
    try {
        parse_run_config("env: acc\n\nbogus: 3\n");
        FAIL();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("bogus"), std::string::npos);
        EXPECT_NE(what.find("line 3"), std::string::npos);
    }
    try {
        parse_run_config("grid: [51, x]\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
    EXPECT_THROW(parse_run_config("grid: [1, 5]\n"), ConfigError);
    EXPECT_THROW(parse_run_config("eps_fp: 0\n"), ConfigError);
    EXPECT_THROW(parse_run_config("schema_version: 2\n"), ConfigError);
    EXPECT_THROW(parse_run_config("mode: fancy\n"), ConfigError);
}

}  // namespace
}  // namespace fpi
