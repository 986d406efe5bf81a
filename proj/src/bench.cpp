#include "gridagg/bench.hpp"
#include "gridagg/grid.hpp"
#include "gridagg/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace gridagg {

double degrees_per_pixel(ZoomLevel zoom) noexcept {
    return 360.0 / (256.0 * std::ldexp(1.0, zoom.value()));
}

BoundingBox viewport_bbox(const GeoPoint& center, ZoomLevel zoom, const Viewport& viewport) {
    const double dpp = degrees_per_pixel(zoom);
    const double half_lat = viewport.height * dpp / 2.0;
    const double half_lon = viewport.width * dpp / 2.0;
    return BoundingBox::make({std::max(-90.0, center.lat - half_lat), std::max(-180.0, center.lon - half_lon)},
                             {std::min(90.0, center.lat + half_lat), std::min(180.0, center.lon + half_lon)});
}

void BenchPlan::validate() const {
    if (zooms.empty()) throw std::invalid_argument("bench plan has no zoom levels");
    for (int z : zooms) ZoomLevel{z};
    if (queries_per_level < 1) throw std::invalid_argument("bench plan needs at least one query per level");
    if (viewport.width <= 0 || viewport.height <= 0) {
        throw std::invalid_argument("viewport dimensions must be positive");
    }
}

BenchPlan BenchPlan::from_json(const nlohmann::json& doc) {
    BenchPlan plan;
    if (doc.contains("zooms")) plan.zooms = doc.at("zooms").get<std::vector<int>>();
    if (doc.contains("queries_per_level")) plan.queries_per_level = doc.at("queries_per_level").get<std::size_t>();
    if (doc.contains("width")) plan.viewport.width = doc.at("width").get<int>();
    if (doc.contains("height")) plan.viewport.height = doc.at("height").get<int>();
    if (doc.contains("seed")) plan.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("extent")) {
        const auto& e = doc.at("extent");
        plan.extent = BoundingBox::make({e.at("minLat").get<double>(), e.at("minLon").get<double>()},
                                        {e.at("maxLat").get<double>(), e.at("maxLon").get<double>()});
    }
    plan.validate();
    return plan;
}

nlohmann::json BenchPlan::to_json() const {
    nlohmann::json doc = {{"zooms", zooms},
                          {"queries_per_level", queries_per_level},
                          {"width", viewport.width},
                          {"height", viewport.height},
                          {"seed", seed}};
    if (extent) {
        doc["extent"] = {{"minLat", extent->min.lat},
                         {"minLon", extent->min.lon},
                         {"maxLat", extent->max.lat},
                         {"maxLon", extent->max.lon}};
    }
    return doc;
}

std::vector<PlannedQuery> generate_queries(const BenchPlan& plan) {
    plan.validate();
    if (!plan.extent) throw std::invalid_argument("bench plan has an empty data extent");
    const BoundingBox& ext = *plan.extent;
    std::vector<PlannedQuery> out;
    out.reserve(plan.zooms.size() * plan.queries_per_level);
    for (std::size_t level = 0; level < plan.zooms.size(); ++level) {
        const ZoomLevel zoom(plan.zooms[level]);
        // One stream per level, so adding a level does not shift the others.
        StreamRng rng(plan.seed, level);
        for (std::size_t k = 0; k < plan.queries_per_level; ++k) {
            const GeoPoint center{rng.uniform(ext.min.lat, ext.max.lat),
                                  rng.uniform(ext.min.lon, ext.max.lon)};
            out.push_back({k, AggregateQuery{viewport_bbox(center, zoom, plan.viewport), zoom, std::nullopt}});
        }
    }
    return out;
}

std::uint64_t result_size_bound(const AggregateQuery& q) {
    const double sep = separation(q.zoom);
    const auto rows = static_cast<std::uint64_t>(std::floor(q.bbox.lat_extent() / sep)) + 2;
    const auto cols = static_cast<std::uint64_t>(std::floor(q.bbox.lon_extent() / sep)) + 2;
    return rows * cols;
}

ZoomStats summarize(int zoom, const std::vector<QueryMeasurement>& rows) {
    ZoomStats s;
    s.zoom = zoom;
    s.queries = rows.size();
    if (rows.empty()) return s;
    std::vector<double> t;
    t.reserve(rows.size());
    double clusters = 0.0;
    double total = 0.0;
    for (const auto& r : rows) {
        t.push_back(r.seconds);
        clusters += static_cast<double>(r.clusters);
        total += static_cast<double>(r.total_count);
    }
    std::sort(t.begin(), t.end());
    const std::size_t n = t.size();
    s.mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    s.median = n % 2 ? t[n / 2] : (t[n / 2 - 1] + t[n / 2]) / 2.0;
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    s.p95 = t[std::max<std::size_t>(rank, 1) - 1];
    s.min = t.front();
    s.max = t.back();
    s.mean_clusters = clusters / static_cast<double>(n);
    s.mean_total = total / static_cast<double>(n);
    return s;
}

BenchReport run(const BenchPlan& plan, const QueryExecutor& exec) {
    BenchReport report;
    for (const PlannedQuery& pq : generate_queries(plan)) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<ClusterResult> clusters = exec(pq.query);
        const auto finished = std::chrono::steady_clock::now();

        QueryMeasurement m;
        m.zoom = pq.query.zoom.value();
        m.query_index = pq.index;
        m.seconds = std::chrono::duration<double>(finished - started).count();
        m.clusters = clusters.size();
        for (const auto& c : clusters) m.total_count += c.count;
        m.within_bound = m.clusters <= result_size_bound(pq.query);
        if (!m.within_bound) ++report.bound_violations;
        report.measurements.push_back(m);
    }
    for (int z : plan.zooms) {
        std::vector<QueryMeasurement> rows;
        for (const auto& m : report.measurements) {
            if (m.zoom == z) rows.push_back(m);
        }
        report.per_zoom.push_back(summarize(z, rows));
    }
    return report;
}

BenchReport run(const BenchPlan& plan, const Retriever& retriever) {
    return run(plan, [&](const AggregateQuery& q) { return retriever.aggregate(q); });
}

void write_csv(std::ostream& out, const BenchReport& report) {
    out << "zoom,query_index,seconds,clusters,total_count\n";
    for (const auto& m : report.measurements) {
        out << m.zoom << ',' << m.query_index << ',' << std::setprecision(9) << m.seconds << ','
            << m.clusters << ',' << m.total_count << '\n';
    }
}

std::vector<QueryMeasurement> read_csv(std::istream& in) {
    std::vector<QueryMeasurement> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        QueryMeasurement m;
        char comma = 0;
        fields >> m.zoom >> comma >> m.query_index >> comma >> m.seconds >> comma >> m.clusters >>
            comma >> m.total_count;
        if (!fields) throw std::runtime_error("malformed bench CSV row: " + line);
        rows.push_back(m);
    }
    return rows;
}

void write_summary(std::ostream& out, const BenchReport& report) {
    out << "zoom  queries      mean(s)    median(s)       p95(s)       min(s)       max(s)  clusters      events\n";
    for (const auto& s : report.per_zoom) {
        out << std::setw(4) << s.zoom << std::setw(9) << s.queries << std::fixed << std::setprecision(6)
            << std::setw(13) << s.mean << std::setw(13) << s.median << std::setw(13) << s.p95
            << std::setw(13) << s.min << std::setw(13) << s.max << std::setprecision(1)
            << std::setw(10) << s.mean_clusters << std::setw(12) << s.mean_total << '\n';
        out.unsetf(std::ios::fixed);
    }
    if (report.bound_violations) {
        out << "result-size bound violations: " << report.bound_violations << '\n';
    }
}

} // namespace gridagg
