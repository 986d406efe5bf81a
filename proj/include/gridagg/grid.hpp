#pragma once

#include "gridagg/geo.hpp"

#include <array>
#include <cstdint>

namespace gridagg {

namespace detail {

constexpr std::array<double, kZoomLevels> make_separations() {
    std::array<double, kZoomLevels> s{};
    s[0] = 90.0;
    for (int z = 1; z < kZoomLevels; ++z) {
        s[z] = s[z - 1] / 2.0;
    }
    return s;
}

inline constexpr std::array<double, kZoomLevels> kSeparation = make_separations();

} // namespace detail

/// Grid spacing in degrees at `zoom`: 90 at zoom 0, halved per level.
/// Every value is exactly representable, so cell centers i * separation are exact.
inline double separation(ZoomLevel zoom) noexcept {
    return detail::kSeparation[static_cast<std::size_t>(zoom.value())];
}

/// Index of the multiple of separation(zoom) closest to `coord`.
/// Ties (coord exactly halfway between two multiples) go to the larger index.
std::int32_t snap_index(double coord, ZoomLevel zoom) noexcept;

/// Snaps both coordinates of `p` to the nearest multiple of separation(zoom).
GridCell snap(const GeoPoint& p, ZoomLevel zoom) noexcept;

/// Center of `c`, i.e. (i * separation, j * separation). Exact.
GeoPoint cell_center(const GridCell& c);

/// The 18 cells of one point, cells[z] = snap(p, z).
struct MultiResPoint {
    std::array<GridCell, kZoomLevels> cells;

    friend bool operator==(const MultiResPoint&, const MultiResPoint&) = default;
};

MultiResPoint precompute(const GeoPoint& p) noexcept;

/// Inclusive range of cell indices; empty when lo > hi.
struct IndexRange {
    std::int32_t lo = 0;
    std::int32_t hi = -1;

    bool empty() const noexcept { return lo > hi; }
    bool contains(std::int32_t k) const noexcept { return k >= lo && k <= hi; }
    std::int64_t size() const noexcept {
        return empty() ? 0 : static_cast<std::int64_t>(hi) - lo + 1;
    }
};

/// All k with lo <= k * separation(zoom) <= hi, computed exactly.
IndexRange center_index_range(double lo, double hi, ZoomLevel zoom) noexcept;

/// Number of decimals kept by the decimal-truncation discretizer, 2 through 8.
class DecimalPrecision {
public:
    explicit DecimalPrecision(int d) : d_(d) {
        if (d < 2 || d > 8) {
            throw std::out_of_range("decimal precision out of range: " + std::to_string(d));
        }
    }

    int value() const noexcept { return d_; }

private:
    int d_;
};

/// Truncates each coordinate toward zero to `d` decimals.
///
/// Truncation operates on the shortest decimal representation of the double
/// (the one that round-trips), so 43.37 stays 43.37 at any precision instead of
/// collapsing to 43.36999999 through its binary expansion.
GeoPoint decimal_snap(const GeoPoint& p, DecimalPrecision d);

/// Single-coordinate form of decimal_snap.
double truncate_decimals(double v, int decimals);

} // namespace gridagg
