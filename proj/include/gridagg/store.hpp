#pragma once

#include "gridagg/geo.hpp"
#include "gridagg/grid.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridagg {

struct AggregateQuery {
    BoundingBox bbox;
    ZoomLevel zoom{0};
    std::optional<TimeRange> time;
};

struct IngestReport {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    /// Set when the store filled up; events after the failure point were not applied.
    bool capacity_exhausted = false;

    IngestReport& operator+=(const IngestReport& o) {
        accepted += o.accepted;
        rejected += o.rejected;
        capacity_exhausted = capacity_exhausted || o.capacity_exhausted;
        return *this;
    }
};

struct StoreStats {
    std::uint64_t events = 0;
    std::optional<BoundingBox> extent; // over raw positions, empty store -> nullopt
    std::optional<TimeRange> time;
};

/// Per-call limits for aggregate().
struct AggregateLimits {
    std::optional<std::size_t> max_cells;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

class ResultTooLarge : public std::runtime_error {
public:
    explicit ResultTooLarge(std::size_t limit)
        : std::runtime_error("aggregation result exceeds " + std::to_string(limit) + " cells"),
          limit_(limit) {}
    std::size_t limit() const noexcept { return limit_; }

private:
    std::size_t limit_;
};

class QueryTimeout : public std::runtime_error {
public:
    QueryTimeout() : std::runtime_error("aggregation query timed out") {}
};

/// Storage-access contract behind which every storage engine sits.
///
/// aggregate() groups the rows whose cell center at q.zoom lies inside q.bbox
/// (closed bounds) and, when q.time is set, whose timestamp lies in it (closed),
/// returning one ClusterResult per distinct cell. Implementations must be safe
/// for many concurrent readers; ingest_batch is exclusive and readers never see
/// a partially applied batch.
class Retriever {
public:
    virtual ~Retriever() = default;

    virtual IngestReport ingest_batch(std::span<const Event> events) = 0;
    virtual std::vector<ClusterResult> aggregate(const AggregateQuery& q,
                                                 const AggregateLimits& limits = {}) const = 0;
    /// Rows whose raw position lies in bbox (closed) and timestamp in time.
    virtual std::uint64_t scan_count(const BoundingBox& bbox,
                                     const std::optional<TimeRange>& time = std::nullopt) const = 0;
    virtual StoreStats stats() const = 0;
};

/// Column-per-field event storage plus the 18 precomputed cell-index columns.
struct EventColumns {
    std::vector<std::uint32_t> driver; // code into the store's driver dictionary
    std::vector<Timestamp> ts;
    std::vector<double> lat;
    std::vector<double> lon;
    std::vector<double> alt; // NaN when absent
    std::vector<double> speed;
    std::vector<double> bearing;
    std::vector<double> accuracy;
    std::array<std::vector<std::int32_t>, kZoomLevels> cell_i;
    std::array<std::vector<std::int32_t>, kZoomLevels> cell_j;
    /// Sparse (row, serialized JSON object) for rows with a non-empty payload, ascending rows.
    std::vector<std::pair<std::uint32_t, std::string>> payload;

    std::size_t size() const noexcept { return ts.size(); }
    void append(const Event& e, std::uint32_t driver_code);
};

struct StoreConfig {
    /// Rows are clustered into partitions keyed by their cell at this zoom.
    int partition_zoom = 12;
    std::uint64_t capacity = std::numeric_limits<std::uint64_t>::max();
};

/// In-memory, append-only, columnar reference Retriever.
///
/// Each event is stored once; its cell indices for all zoom levels are computed at
/// ingest. Rows are physically grouped by their partition_zoom cell so a query only
/// scans partitions near its bounding box; within a partition the scan reads the
/// query zoom's two cell columns and counts per (i, j).
class MemoryStore final : public Retriever {
public:
    explicit MemoryStore(StoreConfig config = {});

    IngestReport ingest_batch(std::span<const Event> events) override;
    std::vector<ClusterResult> aggregate(const AggregateQuery& q,
                                         const AggregateLimits& limits = {}) const override;
    std::uint64_t scan_count(const BoundingBox& bbox,
                             const std::optional<TimeRange>& time = std::nullopt) const override;
    StoreStats stats() const override;

    std::uint64_t size() const;
    std::size_t partition_count() const;

    /// Visits every stored event (partition order, then insertion order within a partition).
    void for_each_event(const std::function<void(const Event&)>& fn) const;

    /// Binary dump of all columns. See snapshot.cpp for the layout.
    void save_snapshot(std::ostream& out) const;
    /// Appends the contents of a snapshot to this store. Throws std::runtime_error on
    /// a bad magic header, unsupported version or truncated input.
    IngestReport load_snapshot(std::istream& in);

    const StoreConfig& config() const noexcept { return config_; }

private:
    struct Partition {
        std::int32_t key_i = 0;
        std::int32_t key_j = 0;
        EventColumns cols;
    };

    std::uint32_t driver_code(const std::string& id);
    Partition& partition_for(const GeoPoint& p);
    void append_unlocked(const Event& e);
    template <typename Fn>
    void for_candidate_partitions(const AggregateQuery& q, Fn&& fn) const;

    StoreConfig config_;
    mutable std::shared_mutex mutex_;
    std::vector<Partition> partitions_;
    std::unordered_map<std::uint64_t, std::uint32_t> partition_index_;
    std::vector<std::string> drivers_;
    std::unordered_map<std::string, std::uint32_t> driver_codes_;
    std::uint64_t rows_ = 0;
    StoreStats stats_;
};

} // namespace gridagg
