#pragma once

#include "gridagg/geo.hpp"
#include "gridagg/store.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gridagg {

struct Viewport {
    int width = 600;  // px
    int height = 400; // px
};

/// Degrees per pixel on a 256 px world tile: 360 / (256 * 2^zoom).
double degrees_per_pixel(ZoomLevel zoom) noexcept;

/// Box seen by a `viewport` centered on `center` at `zoom`, clamped to valid coordinates.
BoundingBox viewport_bbox(const GeoPoint& center, ZoomLevel zoom, const Viewport& viewport);

struct BenchPlan {
    std::vector<int> zooms{10, 11, 12, 13, 14, 15};
    std::size_t queries_per_level = 100;
    Viewport viewport;
    std::uint64_t seed = 1;
    std::optional<BoundingBox> extent; // query centers are drawn from here

    /// Throws std::invalid_argument when any invariant fails.
    void validate() const;

    static BenchPlan from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct PlannedQuery {
    std::size_t index = 0; // within its zoom level
    AggregateQuery query;
};

/// Per zoom, `queries_per_level` centers drawn uniformly from the extent. No time filter.
/// Throws std::invalid_argument when the plan has no extent.
std::vector<PlannedQuery> generate_queries(const BenchPlan& plan);

/// Upper bound on the number of clusters one query can return.
std::uint64_t result_size_bound(const AggregateQuery& q);

struct QueryMeasurement {
    int zoom = 0;
    std::size_t query_index = 0;
    double seconds = 0.0;
    std::uint64_t clusters = 0;
    std::uint64_t total_count = 0;
    bool within_bound = true;
};

struct ZoomStats {
    int zoom = 0;
    std::size_t queries = 0;
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double mean_clusters = 0.0;
    double mean_total = 0.0;
};

struct BenchReport {
    std::vector<QueryMeasurement> measurements; // execution order
    std::vector<ZoomStats> per_zoom;            // plan order
    std::size_t bound_violations = 0;
};

/// Summary statistics over a set of latencies. p95 uses the nearest-rank method,
/// the median averages the two middle values for even counts.
ZoomStats summarize(int zoom, const std::vector<QueryMeasurement>& rows);

/// Executes a query and returns its clusters; lets the bench drive any backend.
using QueryExecutor = std::function<std::vector<ClusterResult>(const AggregateQuery&)>;

/// Runs every planned query exactly once, sequentially, timing each call to `exec`.
BenchReport run(const BenchPlan& plan, const QueryExecutor& exec);

/// run() against a retriever directly.
BenchReport run(const BenchPlan& plan, const Retriever& retriever);

/// Columns: zoom,query_index,seconds,clusters,total_count
void write_csv(std::ostream& out, const BenchReport& report);
std::vector<QueryMeasurement> read_csv(std::istream& in);

void write_summary(std::ostream& out, const BenchReport& report);

} // namespace gridagg
