#include "fixtures.hpp"

#include "gridagg/bench.hpp"
#include "gridagg/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace gridagg;

namespace {

double km_east_west(const BoundingBox& b) {
    const double mid = (b.min.lat + b.max.lat) / 2.0 * std::numbers::pi / 180.0;
    return b.lon_extent() * std::numbers::pi / 180.0 * 6371.0088 * std::cos(mid);
}

void add_sample(MemoryStore& store, std::size_t n) {
    std::mt19937_64 rng(3);
    const auto events = fixture::random_events(rng, n, BoundingBox::make({42.0, -9.0}, {43.5, -7.5}));
    store.ingest_batch(events);
}

} // namespace

TEST_CASE("viewport box at zoom 11") {
    const BoundingBox b = viewport_bbox({42.5, -8.3}, ZoomLevel(11), {});
    CHECK(b.lon_extent() == doctest::Approx(0.4119873046875).epsilon(1e-12));
    CHECK(b.lat_extent() == doctest::Approx(0.274658203125).epsilon(1e-12));
    // Roughly city scale: a few tens of kilometers across.
    CHECK(km_east_west(b) > 30.0);
    CHECK(km_east_west(b) < 40.0);
}

TEST_CASE("viewport box halves with each zoom level") {
    for (int z = 0; z + 1 < kZoomLevels; ++z) {
        const BoundingBox a = viewport_bbox({0.0, 0.0}, ZoomLevel(z), {10, 10});
        const BoundingBox b = viewport_bbox({0.0, 0.0}, ZoomLevel(z + 1), {10, 10});
        CHECK(b.lat_extent() * 2.0 == a.lat_extent());
        CHECK(b.lon_extent() * 2.0 == a.lon_extent());
    }
    const BoundingBox world = viewport_bbox({0.0, 0.0}, ZoomLevel(0), {256, 256});
    CHECK(world.min == GeoPoint{-90.0, -180.0});
    CHECK(world.max == GeoPoint{90.0, 180.0});
}

TEST_CASE("viewport box is clamped to valid coordinates") {
    const BoundingBox b = viewport_bbox({89.9, 179.9}, ZoomLevel(2), {});
    CHECK(b.max.lat == 90.0);
    CHECK(b.max.lon == 180.0);
    CHECK(b.min.lat < 89.9);
}

TEST_CASE("generate_queries") {
    BenchPlan plan;
    plan.extent = BoundingBox::make({42.0, -9.0}, {43.5, -7.5});
    const auto qs = generate_queries(plan);
    REQUIRE(qs.size() == 600);
    for (std::size_t k = 0; k < qs.size(); ++k) {
        const auto& q = qs[k].query;
        CHECK(q.zoom.value() == plan.zooms[k / 100]);
        CHECK(qs[k].index == k % 100);
        CHECK(q.bbox.intersects(*plan.extent));
        CHECK_FALSE(q.time.has_value());
    }

    const auto again = generate_queries(plan);
    for (std::size_t k = 0; k < qs.size(); ++k) CHECK(again[k].query.bbox == qs[k].query.bbox);

    BenchPlan other = plan;
    other.seed = 2;
    CHECK_FALSE(generate_queries(other)[0].query.bbox == qs[0].query.bbox);

    BenchPlan fewer = plan;
    fewer.zooms = {10};
    const auto single = generate_queries(fewer);
    for (std::size_t k = 0; k < single.size(); ++k) CHECK(single[k].query.bbox == qs[k].query.bbox);

    BenchPlan empty = plan;
    empty.extent.reset();
    CHECK_THROWS_AS(generate_queries(empty), std::invalid_argument);
}

TEST_CASE("plan validation and JSON") {
    BenchPlan plan;
    plan.zooms = {};
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
    plan.zooms = {18};
    CHECK_THROWS_AS(plan.validate(), std::out_of_range);
    plan.zooms = {3};
    plan.queries_per_level = 0;
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);

    BenchPlan full;
    full.zooms = {4, 9};
    full.queries_per_level = 7;
    full.viewport = {800, 600};
    full.seed = 99;
    full.extent = BoundingBox::make({1, 2}, {3, 4});
    const BenchPlan back = BenchPlan::from_json(full.to_json());
    CHECK(back.zooms == full.zooms);
    CHECK(back.queries_per_level == 7);
    CHECK(back.viewport.width == 800);
    CHECK(back.viewport.height == 600);
    CHECK(back.seed == 99);
    CHECK(back.extent == full.extent);
}

TEST_CASE("result size bound holds for random queries") {
    MemoryStore store;
    add_sample(store, 20000);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> lat(41.5, 44.0);
    std::uniform_real_distribution<double> lon(-9.5, -7.0);
    std::uniform_real_distribution<double> span(0.0, 0.5);
    std::uniform_int_distribution<int> zoom(0, kZoomLevels - 1);
    for (int k = 0; k < 500; ++k) {
        const double a = lat(rng);
        const double b = lon(rng);
        const AggregateQuery q{BoundingBox::make({a, b}, {std::min(90.0, a + span(rng)), b + span(rng)}),
                               ZoomLevel(zoom(rng)), std::nullopt};
        CHECK(store.aggregate(q).size() <= result_size_bound(q));
    }
}

TEST_CASE("summary statistics") {
    std::vector<QueryMeasurement> rows;
    for (double s : {0.4, 0.1, 0.3, 0.2}) rows.push_back({10, rows.size(), s, 2, 5, true});
    const ZoomStats st = summarize(10, rows);
    CHECK(st.queries == 4);
    CHECK(st.mean == doctest::Approx(0.25));
    CHECK(st.median == doctest::Approx(0.25));
    CHECK(st.p95 == 0.4);
    CHECK(st.min == 0.1);
    CHECK(st.max == 0.4);
    CHECK(st.mean_clusters == 2.0);
    CHECK(st.mean_total == 5.0);

    std::vector<QueryMeasurement> twenty;
    for (int k = 1; k <= 20; ++k) twenty.push_back({10, twenty.size(), k / 100.0, 0, 0, true});
    CHECK(summarize(10, twenty).p95 == 0.19);
    CHECK(summarize(10, {}).queries == 0);
}

TEST_CASE("run executes every planned query once") {
    MemoryStore store;
    add_sample(store, 5000);
    BenchPlan plan;
    plan.zooms = {10, 12, 14};
    plan.queries_per_level = 20;
    plan.extent = store.stats().extent;

    std::size_t calls = 0;
    const BenchReport rep = run(plan, [&](const AggregateQuery& q) {
        ++calls;
        return store.aggregate(q);
    });
    CHECK(calls == 60);
    CHECK(rep.measurements.size() == 60);
    CHECK(rep.bound_violations == 0);
    REQUIRE(rep.per_zoom.size() == 3);
    CHECK(rep.per_zoom[1].zoom == 12);
    CHECK(rep.per_zoom[1].queries == 20);

    const auto queries = generate_queries(plan);
    for (std::size_t k = 0; k < queries.size(); ++k) {
        std::uint64_t total = 0;
        for (const auto& c : store.aggregate(queries[k].query)) total += c.count;
        CHECK(rep.measurements[k].total_count == total);
    }
}

TEST_CASE("run flags results over the bound") {
    BenchPlan plan;
    plan.zooms = {15};
    plan.queries_per_level = 3;
    plan.extent = BoundingBox::make({0, 0}, {1, 1});
    const BenchReport rep = run(plan, [](const AggregateQuery& q) {
        return std::vector<ClusterResult>(result_size_bound(q) + 1, ClusterResult{{0, 0}, 1});
    });
    CHECK(rep.bound_violations == 3);
}

TEST_CASE("run on an empty store") {
    const MemoryStore store;
    BenchPlan plan;
    plan.queries_per_level = 5;
    CHECK_THROWS_AS(run(plan, store), std::invalid_argument);

    plan.extent = BoundingBox::make({42, -9}, {43, -8});
    const BenchReport rep = run(plan, store);
    CHECK(rep.measurements.size() == 30);
    for (const auto& m : rep.measurements) {
        CHECK(m.clusters == 0);
        CHECK(m.total_count == 0);
    }
}

TEST_CASE("CSV round trip reproduces the statistics") {
    MemoryStore store;
    add_sample(store, 3000);
    BenchPlan plan;
    plan.zooms = {10, 11};
    plan.queries_per_level = 15;
    plan.extent = store.stats().extent;
    const BenchReport rep = run(plan, store);

    std::stringstream csv;
    write_csv(csv, rep);
    CHECK(csv.str().starts_with("zoom,query_index,seconds,clusters,total_count\n"));
    const auto rows = read_csv(csv);
    REQUIRE(rows.size() == rep.measurements.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].zoom == rep.measurements[k].zoom);
        CHECK(rows[k].query_index == rep.measurements[k].query_index);
        CHECK(rows[k].clusters == rep.measurements[k].clusters);
        CHECK(rows[k].total_count == rep.measurements[k].total_count);
        CHECK(rows[k].seconds == doctest::Approx(rep.measurements[k].seconds).epsilon(1e-8));
    }
    for (const ZoomStats& s : rep.per_zoom) {
        std::vector<QueryMeasurement> level;
        for (const auto& r : rows) {
            if (r.zoom == s.zoom) level.push_back(r);
        }
        const ZoomStats again = summarize(s.zoom, level);
        CHECK(again.mean == doctest::Approx(s.mean).epsilon(1e-6));
        CHECK(again.p95 == doctest::Approx(s.p95).epsilon(1e-6));
    }

    std::istringstream bad("zoom,query_index,seconds,clusters,total_count\n10,x\n");
    CHECK_THROWS_AS(read_csv(bad), std::runtime_error);
}
