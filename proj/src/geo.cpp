#include "gridagg/geo.hpp"

namespace gridagg {

std::string_view describe(EventError e) noexcept {
    switch (e) {
    case EventError::latitude_out_of_range: return "latitude out of range";
    case EventError::longitude_out_of_range: return "longitude out of range";
    case EventError::non_positive_timestamp: return "non-positive timestamp";
    case EventError::negative_speed: return "negative speed";
    case EventError::negative_accuracy: return "negative accuracy";
    case EventError::bearing_out_of_range: return "bearing out of range";
    }
    return "invalid event";
}

std::optional<EventError> check_event(const Event& e) noexcept {
    // Comparisons are written so that NaN fails them.
    if (!(e.pos.lat >= -90.0 && e.pos.lat <= 90.0)) return EventError::latitude_out_of_range;
    if (!(e.pos.lon >= -180.0 && e.pos.lon <= 180.0)) return EventError::longitude_out_of_range;
    if (e.ts <= 0) return EventError::non_positive_timestamp;
    if (!(e.speed >= 0.0)) return EventError::negative_speed;
    if (!(e.accuracy >= 0.0)) return EventError::negative_accuracy;
    if (!(e.bearing >= 0.0 && e.bearing < 360.0)) return EventError::bearing_out_of_range;
    return std::nullopt;
}

Event validate_event(Event raw) {
    if (auto err = check_event(raw)) {
        throw ValidationError(*err);
    }
    return raw;
}

BoundingBox BoundingBox::make(GeoPoint min, GeoPoint max) {
    if (!min.valid() || !max.valid()) {
        throw std::invalid_argument("bounding box corner out of range");
    }
    if (min.lat > max.lat) {
        throw std::invalid_argument("bounding box min latitude exceeds max latitude");
    }
    if (min.lon > max.lon) {
        throw std::invalid_argument("bounding box min longitude exceeds max longitude");
    }
    return {min, max};
}

TimeRange TimeRange::make(Timestamp tmin, Timestamp tmax) {
    if (tmin > tmax) {
        throw std::invalid_argument("time range tmin exceeds tmax");
    }
    return {tmin, tmax};
}

} // namespace gridagg
