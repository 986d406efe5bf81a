#include "fixtures.hpp"

#include "gridagg/geo.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace gridagg;

TEST_CASE("validate_event accepts an in-range event unchanged") {
    Event e = fixture::event(43.37, -8.40);
    e.payload = {{"route", "R7"}};
    CHECK(validate_event(e) == e);
}

TEST_CASE("validate_event names each violation") {
    auto error_of = [](const Event& e) {
        try {
            validate_event(e);
        } catch (const ValidationError& err) {
            return std::string(err.what());
        }
        return std::string("accepted");
    };

    Event e = fixture::event(43.37, -8.40);
    e.pos.lat = 91.0;
    CHECK(error_of(e) == "latitude out of range");

    e = fixture::event(43.37, -181.0);
    CHECK(error_of(e) == "longitude out of range");

    e = fixture::event(43.37, -8.40, 0);
    CHECK(error_of(e) == "non-positive timestamp");

    e = fixture::event(43.37, -8.40);
    e.speed = -0.1;
    CHECK(error_of(e) == "negative speed");

    e = fixture::event(43.37, -8.40);
    e.accuracy = -1.0;
    CHECK(error_of(e) == "negative accuracy");

    e = fixture::event(43.37, -8.40);
    e.bearing = 360.0;
    CHECK(error_of(e) == "bearing out of range");

    e = fixture::event(std::nan(""), -8.40);
    CHECK(error_of(e) == "latitude out of range");
}

TEST_CASE("validate_event boundary values are inclusive") {
    CHECK_NOTHROW(validate_event(fixture::event(90.0, 180.0)));
    CHECK_NOTHROW(validate_event(fixture::event(-90.0, -180.0, 1)));
    Event e = fixture::event(0.0, 0.0);
    e.speed = 0.0;
    e.accuracy = 0.0;
    e.bearing = 0.0;
    CHECK_NOTHROW(validate_event(e));
}

TEST_CASE("accepted events satisfy every field invariant") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(-100.0, 100.0);
    std::uniform_real_distribution<double> lon(-200.0, 200.0);
    std::uniform_real_distribution<double> signed_small(-5.0, 50.0);
    std::uniform_real_distribution<double> bearing(-10.0, 370.0);
    std::uniform_int_distribution<Timestamp> ts(-1000, 1000);
    int accepted = 0;
    for (int k = 0; k < 20000; ++k) {
        Event e = fixture::event(lat(rng), lon(rng), ts(rng));
        e.speed = signed_small(rng);
        e.accuracy = signed_small(rng);
        e.bearing = bearing(rng);
        if (!check_event(e)) {
            ++accepted;
            REQUIRE(e.pos.lat >= -90.0);
            REQUIRE(e.pos.lat <= 90.0);
            REQUIRE(e.pos.lon >= -180.0);
            REQUIRE(e.pos.lon <= 180.0);
            REQUIRE(e.ts > 0);
            REQUIRE(e.speed >= 0.0);
            REQUIRE(e.accuracy >= 0.0);
            REQUIRE(e.bearing >= 0.0);
            REQUIRE(e.bearing < 360.0);
        } else {
            CHECK_THROWS_AS(validate_event(e), ValidationError);
        }
    }
    CHECK(accepted > 0);
}

TEST_CASE("BoundingBox rejects inverted axes and invalid corners") {
    CHECK_NOTHROW(BoundingBox::make({0, 0}, {0, 0}));
    CHECK_THROWS_AS(BoundingBox::make({1, 0}, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(BoundingBox::make({0, 1}, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(BoundingBox::make({-91, 0}, {0, 1}), std::invalid_argument);
    // An antimeridian-crossing view (170 -> -170) cannot be expressed.
    CHECK_THROWS_AS(BoundingBox::make({0, 170}, {10, -170}), std::invalid_argument);
}

TEST_CASE("TimeRange and ZoomLevel bounds") {
    CHECK_NOTHROW(TimeRange::make(5, 5));
    CHECK_THROWS_AS(TimeRange::make(6, 5), std::invalid_argument);
    CHECK_NOTHROW(ZoomLevel(0));
    CHECK_NOTHROW(ZoomLevel(17));
    CHECK_THROWS_AS(ZoomLevel(18), std::out_of_range);
    CHECK_THROWS_AS(ZoomLevel(-1), std::out_of_range);
}
