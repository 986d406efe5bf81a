#include "gridagg/grid.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>

namespace gridagg {

namespace {

// Half of separation(zoom). (2k - 1) * half is the boundary between cells k-1 and k;
// it is an odd multiple of 45 * 2^-zoom and therefore exact for every index we use.
double half_separation(int zoom) noexcept { return detail::kSeparation[zoom] / 2.0; }

} // namespace

std::int32_t snap_index(double coord, ZoomLevel zoom) noexcept {
    const int z = zoom.value();
    const double sep = detail::kSeparation[z];
    const double half = half_separation(z);
    // coord / sep is rounded (sep is not a power of two), so fix up the estimate
    // against the exact cell boundaries.
    auto k = static_cast<std::int64_t>(std::floor(coord / sep + 0.5));
    while (coord < static_cast<double>(2 * k - 1) * half) --k;
    while (coord >= static_cast<double>(2 * k + 1) * half) ++k;
    return static_cast<std::int32_t>(k);
}

GridCell snap(const GeoPoint& p, ZoomLevel zoom) noexcept {
    return {zoom.value(), snap_index(p.lat, zoom), snap_index(p.lon, zoom)};
}

GeoPoint cell_center(const GridCell& c) {
    const double sep = separation(ZoomLevel(c.zoom));
    return {static_cast<double>(c.i) * sep, static_cast<double>(c.j) * sep};
}

MultiResPoint precompute(const GeoPoint& p) noexcept {
    MultiResPoint m;
    for (int z = 0; z < kZoomLevels; ++z) {
        m.cells[z] = snap(p, ZoomLevel(z));
    }
    return m;
}

IndexRange center_index_range(double lo, double hi, ZoomLevel zoom) noexcept {
    const double sep = separation(zoom);
    auto first = static_cast<std::int64_t>(std::ceil(lo / sep));
    while (static_cast<double>(first - 1) * sep >= lo) --first;
    while (static_cast<double>(first) * sep < lo) ++first;
    auto last = static_cast<std::int64_t>(std::floor(hi / sep));
    while (static_cast<double>(last + 1) * sep <= hi) ++last;
    while (static_cast<double>(last) * sep > hi) --last;
    if (first > last) return {};
    return {static_cast<std::int32_t>(first), static_cast<std::int32_t>(last)};
}

double truncate_decimals(double v, int decimals) {
    // Shortest round-trip fixed notation, then cut the digit string.
    char buf[512];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
    if (ec != std::errc{}) {
        return std::trunc(v * std::pow(10.0, decimals)) / std::pow(10.0, decimals);
    }
    std::string_view s(buf, static_cast<std::size_t>(end - buf));
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        s = s.substr(0, std::min(s.size(), dot + 1 + static_cast<std::size_t>(decimals)));
    }
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out == 0.0 ? 0.0 : out; // no negative zero
}

GeoPoint decimal_snap(const GeoPoint& p, DecimalPrecision d) {
    return {truncate_decimals(p.lat, d.value()), truncate_decimals(p.lon, d.value())};
}

} // namespace gridagg
