#include "fixtures.hpp"
#include "oracles.hpp"

#include "gridagg/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace gridagg;

TEST_CASE("separation halves from 90 degrees") {
    CHECK(separation(ZoomLevel(0)) == 90.0);
    CHECK(separation(ZoomLevel(1)) == 45.0);
    CHECK(separation(ZoomLevel(11)) == 0.0439453125);
    double halved = 90.0;
    for (int z = 0; z < kZoomLevels; ++z) {
        CHECK(separation(ZoomLevel(z)) == halved);
        CHECK(separation(ZoomLevel(z)) == std::ldexp(90.0, -z));
        halved /= 2.0;
    }
    // The commonly quoted 0.043945312 is this value cut after nine decimals.
    CHECK(std::trunc(separation(ZoomLevel(11)) * 1e9) == 43945312.0);
    CHECK_THROWS_AS(separation(ZoomLevel(18)), std::out_of_range);
}

TEST_CASE("snap examples") {
    for (int z = 0; z < kZoomLevels; ++z) {
        CHECK(snap({0.0, 0.0}, ZoomLevel(z)) == GridCell{z, 0, 0});
    }
    CHECK(snap({43.37, -8.40}, ZoomLevel(11)) == GridCell{11, 987, -191});
    CHECK(cell_center(snap({43.37, -8.40}, ZoomLevel(11))) == GeoPoint{43.3740234375, -8.3935546875});
    // exactly half a cell: ties go up
    CHECK(snap({0.02197265625, 0.0}, ZoomLevel(11)) == GridCell{11, 1, 0});
    CHECK(snap({-0.02197265625, 0.0}, ZoomLevel(11)) == GridCell{11, 0, 0});
    CHECK(snap({90.0, 180.0}, ZoomLevel(0)) == GridCell{0, 1, 2});
    CHECK(snap({-90.0, -180.0}, ZoomLevel(17)) == GridCell{17, -131072, -262144});
}

TEST_CASE("snap matches the exact nearest-multiple oracle") {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 20000; ++k) {
        const int z = static_cast<int>(rng() % kZoomLevels);
        const GeoPoint p{fixture::tricky_coord(rng, z, 90.0), fixture::tricky_coord(rng, z, 180.0)};
        const GridCell c = snap(p, ZoomLevel(z));
        REQUIRE(c.i == oracle::nearest_multiple(p.lat, z));
        REQUIRE(c.j == oracle::nearest_multiple(p.lon, z));
    }
}

TEST_CASE("cell_center examples") {
    CHECK(cell_center({0, 0, 0}) == GeoPoint{0.0, 0.0});
    CHECK(cell_center({11, 987, -191}) == GeoPoint{43.3740234375, -8.3935546875});
    CHECK(cell_center({5, 4, 4}) == GeoPoint{11.25, 11.25});
    CHECK_THROWS_AS(cell_center({18, 0, 0}), std::out_of_range);
}

TEST_CASE("snapped centers stay within half a separation and are fixed points") {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 50000; ++k) {
        const int z = static_cast<int>(rng() % kZoomLevels);
        const ZoomLevel zoom(z);
        const GeoPoint p{fixture::tricky_coord(rng, z, 90.0), fixture::tricky_coord(rng, z, 180.0)};
        const GridCell c = snap(p, zoom);
        const GeoPoint center = cell_center(c);
        const double half = separation(zoom) / 2.0;
        REQUIRE(std::abs(p.lat - center.lat) <= half);
        REQUIRE(std::abs(p.lon - center.lon) <= half);
        REQUIRE(snap(center, zoom) == c);
        REQUIRE(std::abs(c.i) <= static_cast<std::int32_t>(std::ceil(90.0 / separation(zoom))));
        REQUIRE(std::abs(c.j) <= static_cast<std::int32_t>(std::ceil(180.0 / separation(zoom))));
    }
}

TEST_CASE("precompute stores one snap per zoom") {
    const MultiResPoint origin = precompute({0.0, 0.0});
    for (int z = 0; z < kZoomLevels; ++z) CHECK(origin.cells[z] == GridCell{z, 0, 0});

    // Frozen from an exact rational nearest-multiple computation.
    constexpr std::int32_t lat_idx[] = {0,    1,    2,    4,    8,     15,    31,    62,    123,
                                        247,  493,  987,  1974, 3948,  7895,  15791, 31581, 63162};
    constexpr std::int32_t lon_idx[] = {0,   0,   0,   -1,   -1,   -3,    -6,    -12,   -24,
                                        -48, -96, -191, -382, -765, -1529, -3058, -6117, -12233};
    const MultiResPoint m = precompute({43.37, -8.40});
    for (int z = 0; z < kZoomLevels; ++z) {
        CHECK(m.cells[z] == GridCell{z, lat_idx[z], lon_idx[z]});
    }
}

TEST_CASE("cells of the next zoom nest within one index of the coarser grid") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int k = 0; k < 20000; ++k) {
        const int z = static_cast<int>(rng() % (kZoomLevels - 1));
        const ZoomLevel fine(z + 1);
        const ZoomLevel coarse(z);
        const GeoPoint seed{unit(rng) * 89.0, unit(rng) * 179.0};
        const GeoPoint center = cell_center(snap(seed, fine));
        const double half = separation(fine) / 2.0;
        const GeoPoint a{center.lat + unit(rng) * half, center.lon + unit(rng) * half};
        const GeoPoint b{center.lat + unit(rng) * half, center.lon + unit(rng) * half};
        if (!(snap(a, fine) == snap(b, fine))) continue;
        const GridCell ca = snap(a, coarse);
        const GridCell cb = snap(b, coarse);
        REQUIRE(std::abs(ca.i - cb.i) <= 1);
        REQUIRE(std::abs(ca.j - cb.j) <= 1);
    }
}

TEST_CASE("center_index_range agrees with a linear scan") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 5000; ++k) {
        const int z = static_cast<int>(rng() % 8);
        const ZoomLevel zoom(z);
        const double sep = separation(zoom);
        double lo = fixture::tricky_coord(rng, z, 90.0);
        double hi = fixture::tricky_coord(rng, z, 90.0);
        if (lo > hi) std::swap(lo, hi);
        const IndexRange r = center_index_range(lo, hi, zoom);
        const auto limit = static_cast<std::int32_t>(90.0 / sep) + 1;
        for (std::int32_t idx = -limit; idx <= limit; ++idx) {
            const double c = idx * sep;
            REQUIRE(r.contains(idx) == (c >= lo && c <= hi));
        }
    }
}

TEST_CASE("decimal_snap truncates toward zero") {
    CHECK(decimal_snap({43.376912, -8.401234}, DecimalPrecision(2)) == GeoPoint{43.37, -8.40});
    CHECK(decimal_snap({43.37, -8.40}, DecimalPrecision(8)) == GeoPoint{43.37, -8.40});
    CHECK(decimal_snap({-0.019, 0.019}, DecimalPrecision(2)) == GeoPoint{-0.01, 0.01});
    const GeoPoint z = decimal_snap({-0.001, 0.0}, DecimalPrecision(2));
    CHECK(z.lat == 0.0);
    CHECK_FALSE(std::signbit(z.lat));
    CHECK(decimal_snap({12.345678912, -0.000000019}, DecimalPrecision(8)) ==
          GeoPoint{12.34567891, -0.00000001});
    CHECK_THROWS_AS(DecimalPrecision(1), std::out_of_range);
    CHECK_THROWS_AS(DecimalPrecision(9), std::out_of_range);
}

TEST_CASE("one two-decimal value absorbs ten three-decimal values per axis") {
    std::map<double, std::set<double>> groups;
    for (int k = -999; k < 1000; ++k) {
        const double v = truncate_decimals(k / 1000.0, 3);
        groups[truncate_decimals(v, 2)].insert(v);
    }
    // Truncation toward zero folds -0.009..0.009 onto 0.00, so 0 collects both signs.
    for (const auto& [key, members] : groups) {
        CHECK(members.size() == (key == 0.0 ? 19u : 10u));
    }
}
