#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "til/config.hpp"

using namespace til;

TEST_CASE("parse, trim and comments") {
    const auto cfg = Config::from_string(
        "# comment\n"
        "vehicle.total_mass = 1612\n"
        "\n"
        "scenario.ref.steps=1.5:0.08,3.0:0.11\n"
        "plant.noise=1\n");
    CHECK(cfg.get_double("vehicle.total_mass") == doctest::Approx(1612.0));
    CHECK(cfg.get_string("scenario.ref.steps") == "1.5:0.08,3.0:0.11");
    CHECK(cfg.get_bool("plant.noise", false));
    CHECK(cfg.get_double("missing.key", 7.0) == doctest::Approx(7.0));
}

TEST_CASE("parse errors carry line numbers") {
    try {
        Config::from_string("a=1\nbroken line\n", "test.cfg");
        FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
    }
}

TEST_CASE("type errors are reported") {
    const auto cfg = Config::from_string("x=abc\ny=1.5\n");
    CHECK_THROWS(cfg.get_double("x"));
    CHECK_THROWS(cfg.get_int("y"));
    CHECK_THROWS(cfg.get_double("nope"));
}

TEST_CASE("overrides and merge layering") {
    auto cfg = Config::from_string("a=1\nb=2\n");
    cfg.apply_override("b=3");
    CHECK(cfg.get_int("b") == 3);
    auto overlay = Config::from_string("c=4\na=9\n");
    cfg.merge(overlay);
    CHECK(cfg.get_int("a") == 9);
    CHECK(cfg.get_int("c") == 4);
    CHECK_THROWS(cfg.apply_override("no_equals"));
}

TEST_CASE("content hash is stable and order-independent") {
    const auto a = Config::from_string("x=1\ny=2\n");
    const auto b = Config::from_string("y=2\nx=1\n");
    const auto c = Config::from_string("x=1\ny=3\n");
    CHECK(a.content_hash() == b.content_hash());
    CHECK(a.content_hash() != c.content_hash());
}
