#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridagg {

/// Number of discrete zoom levels, 0 (whole world) through 17.
inline constexpr int kZoomLevels = 18;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool valid() const noexcept {
        return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
    }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline std::ostream& operator<<(std::ostream& o, const GeoPoint& p) {
    return o << "(" << p.lat << ", " << p.lon << ")";
}

class ZoomLevel {
public:
    /// Throws std::out_of_range unless 0 <= z <= 17.
    explicit ZoomLevel(int z) : z_(z) {
        if (z < 0 || z >= kZoomLevels) {
            throw std::out_of_range("zoom out of range: " + std::to_string(z));
        }
    }

    int value() const noexcept { return z_; }

    friend bool operator==(ZoomLevel, ZoomLevel) = default;
    friend auto operator<=>(ZoomLevel, ZoomLevel) = default;

private:
    int z_;
};

using Timestamp = std::int64_t; // epoch milliseconds, UTC

struct Event {
    std::string driver_id;
    GeoPoint pos;
    std::optional<double> alt; // carried, never used by aggregation
    Timestamp ts = 0;
    double speed = 0.0;
    double bearing = 0.0;
    double accuracy = 0.0;
    nlohmann::json payload = nlohmann::json::object();

    friend bool operator==(const Event&, const Event&) = default;
};

enum class EventError {
    latitude_out_of_range,
    longitude_out_of_range,
    non_positive_timestamp,
    negative_speed,
    negative_accuracy,
    bearing_out_of_range,
};

std::string_view describe(EventError e) noexcept;

class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(EventError code)
        : std::invalid_argument(std::string(describe(code))), code_(code) {}

    EventError code() const noexcept { return code_; }

private:
    EventError code_;
};

/// First violated invariant of `e`, if any. Checks run in field order.
std::optional<EventError> check_event(const Event& e) noexcept;

/// Returns `raw` unchanged when every invariant holds, throws ValidationError otherwise.
Event validate_event(Event raw);

struct BoundingBox {
    GeoPoint min;
    GeoPoint max;

    /// Throws std::invalid_argument on invalid corners or min > max on either axis.
    /// Boxes crossing the antimeridian cannot be expressed and must be split by the caller.
    static BoundingBox make(GeoPoint min, GeoPoint max);

    double lat_extent() const noexcept { return max.lat - min.lat; }
    double lon_extent() const noexcept { return max.lon - min.lon; }

    bool contains(const GeoPoint& p) const noexcept {
        return p.lat >= min.lat && p.lat <= max.lat && p.lon >= min.lon && p.lon <= max.lon;
    }

    bool intersects(const BoundingBox& o) const noexcept {
        return min.lat <= o.max.lat && o.min.lat <= max.lat && min.lon <= o.max.lon &&
               o.min.lon <= max.lon;
    }

    static BoundingBox world() noexcept { return {{-90.0, -180.0}, {90.0, 180.0}}; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct TimeRange {
    Timestamp tmin = 0;
    Timestamp tmax = 0;

    /// Throws std::invalid_argument when tmin > tmax.
    static TimeRange make(Timestamp tmin, Timestamp tmax);

    bool contains(Timestamp t) const noexcept { return t >= tmin && t <= tmax; }

    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

/// A grid cell at one zoom level; its center is (i, j) times the level's separation.
struct GridCell {
    int zoom = 0;
    std::int32_t i = 0; // latitude multiple
    std::int32_t j = 0; // longitude multiple

    friend bool operator==(const GridCell&, const GridCell&) = default;
    friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

inline std::ostream& operator<<(std::ostream& o, const GridCell& c) {
    return o << "{z:" << c.zoom << ", i:" << c.i << ", j:" << c.j << "}";
}

struct ClusterResult {
    GeoPoint pos;
    std::uint64_t count = 0;

    friend bool operator==(const ClusterResult&, const ClusterResult&) = default;
};

} // namespace gridagg
