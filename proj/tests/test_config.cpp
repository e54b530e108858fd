#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "convexiwave/config.hpp"
#include "convexiwave/fixtures.hpp"

using namespace convexiwave;

namespace {

RunConfig round_trip(const RunConfig& c) { return parse_config(Json::parse(Json(c).dump())); }

ErrorKind kind_of(const Json& j) {
    try {
        parse_config(j);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) { EXPECT_EQ(round_trip(RunConfig{}), RunConfig{}); }

TEST(Config, FixtureConfigsRoundTrip) {
    for (const auto& fx : simulated_fixtures()) EXPECT_EQ(round_trip(fx.config), fx.config) << fx.name;
    RunConfig c;
    c.forward.medium.pieces.push_back(TablePiece{{0.0, 1.0, 2.0}, {1.0, 3.0, 1.0}});
    c.preprocess.envelope_method = EnvelopeMethod::CumulativeExtremum;
    c.c_bckgr = {2.0, 4.0};
    EXPECT_EQ(round_trip(c), c);
}

TEST(Config, MissingKeysKeepDefaults) {
    const RunConfig c = parse_config(Json::parse(R"({"transform": {"nx": 40}, "convex": {"lambda": 3}})"));
    EXPECT_EQ(c.transform.nx, 40u);
    EXPECT_EQ(c.transform.nt, TransformConfig{}.nt);
    EXPECT_DOUBLE_EQ(c.convex.lambda, 3.0);
    EXPECT_DOUBLE_EQ(c.convex.alpha, ConvexParams{}.alpha);
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_EQ(kind_of(Json::parse(R"({"bogus": 1})")), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of(Json::parse(R"({"convex": {"lamda": 2}})")), ErrorKind::InvalidArgument);
}

TEST(Config, InvalidValuesAreRejected) {
    EXPECT_EQ(kind_of(Json::parse(R"({"convex": {"beta": 0}})")), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of(Json::parse(R"({"transform": {"M": -1}})")), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of(Json::parse(R"({"forward": {"noise": {"delta": 2}}})")), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of(Json::parse(R"({"transform": {"nx": "many"}})")), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of(Json::parse(R"({"c_bckgr": [1]})")), ErrorKind::InvalidArgument);
}

TEST(Config, FilesRoundTripAndMissingFilesAreIoErrors) {
    const auto path = std::filesystem::temp_directory_path() / "convexiwave_config_test.json";
    const RunConfig c = simulated_fixtures()[1].config;
    save_config(path.string(), c);
    EXPECT_EQ(load_config(path.string()), c);
    std::filesystem::remove(path);
    try {
        load_config(path.string());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

TEST(Config, ShippedConfigsLoad) {
    std::size_t n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(CONVEXIWAVE_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
        ++n;
    }
    EXPECT_GT(n, 0u);
}
