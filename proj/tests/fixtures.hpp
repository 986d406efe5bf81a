#pragma once

#include "gridagg/geo.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gridagg::fixture {

inline Event event(double lat, double lon, Timestamp ts = 1'514'764'800'000, std::string driver = "d1") {
    Event e;
    e.driver_id = std::move(driver);
    e.pos = {lat, lon};
    e.ts = ts;
    e.speed = 13.9;
    e.bearing = 90.0;
    e.accuracy = 5.0;
    return e;
}

/// (10, 10), (10.5, 10.5) and (20, 20), one second apart.
inline std::vector<Event> three_events() {
    return {event(10.0, 10.0, 1'514'764'800'000, "d1"), event(10.5, 10.5, 1'514'764'801'000, "d2"),
            event(20.0, 20.0, 1'514'764'802'000, "d3")};
}

/// Valid random events inside `region`, timestamps spread over one hour.
inline std::vector<Event> random_events(std::mt19937_64& rng, std::size_t n, const BoundingBox& region) {
    std::uniform_real_distribution<double> lat(region.min.lat, region.max.lat);
    std::uniform_real_distribution<double> lon(region.min.lon, region.max.lon);
    std::uniform_int_distribution<Timestamp> ts(1'514'764'800'000, 1'514'768'400'000);
    std::uniform_int_distribution<int> driver(0, 49);
    std::vector<Event> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(event(lat(rng), lon(rng), ts(rng), "d" + std::to_string(driver(rng))));
    }
    return out;
}

// Coordinates biased toward the interesting places: multiples, exact midpoints
// and their floating-point neighbours, tiny magnitudes and the domain edges.
inline double tricky_coord(std::mt19937_64& rng, int zoom, double limit) {
    const double sep = 90.0 / std::ldexp(1.0, zoom);
    std::uniform_real_distribution<double> any(-limit, limit);
    const auto max_k = static_cast<std::int64_t>(limit / sep);
    std::uniform_int_distribution<std::int64_t> k(-max_k, max_k - 1);
    switch (rng() % 8) {
    case 0: return static_cast<double>(k(rng)) * sep;
    case 1: return (static_cast<double>(k(rng)) + 0.5) * sep;
    case 2: return std::nextafter((static_cast<double>(k(rng)) + 0.5) * sep, 1e9);
    case 3: return std::nextafter((static_cast<double>(k(rng)) + 0.5) * sep, -1e9);
    case 4: return std::ldexp(any(rng), -static_cast<int>(rng() % 60));
    case 5: return (rng() % 2 ? 1.0 : -1.0) * limit;
    default: return any(rng);
    }
}

} // namespace gridagg::fixture
