#pragma once

#include "gridagg/geo.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridagg {

using NodeId = std::int64_t;

/// Mean Earth radius used for segment lengths.
inline constexpr double kEarthRadiusM = 6'371'008.8;

/// Equirectangular distance in meters, longitude scaled by cos(mean latitude).
double segment_length_m(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Compass bearing in degrees [0, 360) from a to b on the same local projection.
double segment_bearing(const GeoPoint& a, const GeoPoint& b) noexcept;

class NetworkError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnreachableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SegmentSpec {
    NodeId from = 0;
    NodeId to = 0;
    double max_speed = 0.0; // m/s
};

struct Segment {
    NodeId from = 0;
    NodeId to = 0;
    double max_speed = 0.0; // m/s
    double length = 0.0;    // m
};

/// Road graph. Segments are two-way.
class RoadNetwork {
public:
    struct Node {
        NodeId id;
        GeoPoint pos;
    };

    /// Validates and indexes the network; throws NetworkError.
    static RoadNetwork make(std::vector<Node> nodes, const std::vector<SegmentSpec>& segments);

    static RoadNetwork from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    static RoadNetwork load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; } // ascending id
    const std::vector<Segment>& segments() const noexcept { return segments_; }

    bool has_node(NodeId id) const { return index_.count(id) != 0; }
    const GeoPoint& position(NodeId id) const;
    /// Dense index of `id` into nodes(); throws NetworkError for unknown ids.
    std::size_t index_of(NodeId id) const;

    /// (neighbor index, segment index) pairs of the node at `index`.
    const std::vector<std::pair<std::size_t, std::size_t>>& adjacent(std::size_t index) const {
        return adjacency_[index];
    }

    /// Connected-component label per node index. Labels are the smallest node index in the component.
    const std::vector<std::size_t>& components() const noexcept { return component_; }

    /// Shortest segment joining two adjacent nodes; throws NetworkError if none.
    const Segment& link(NodeId a, NodeId b) const;

    BoundingBox extent() const;

private:
    std::vector<Node> nodes_;
    std::vector<Segment> segments_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
    std::vector<std::size_t> component_;
};

struct GridNetworkSpec {
    GeoPoint south_west{42.0, -9.0};
    int rows = 10;
    int cols = 10;
    double spacing_m = 1000.0;
    double local_speed = 13.89;    // 50 km/h
    double arterial_speed = 27.78; // 100 km/h
    int arterial_every = 5;        // every n-th row/column is an arterial
};

/// Rectangular street grid; node ids are row * cols + col.
RoadNetwork make_grid_network(const GridNetworkSpec& spec);

/// Shortest path by segment length. Among equally short paths the one reached
/// through the lowest predecessor id wins. Throws UnreachableError.
std::vector<NodeId> plan_route(const RoadNetwork& net, NodeId origin, NodeId dest);

/// Deterministic random stream keyed by (seed, stream index); one stream per driver.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

struct SpeedRange {
    double min = 0.8;
    double max = 1.1;
};

/// One traversal step of a route: a single segment in travel direction.
struct Leg {
    GeoPoint from;
    GeoPoint to;
    double length = 0.0;
    double max_speed = 0.0;
    double bearing = 0.0;
};

std::vector<Leg> route_legs(const RoadNetwork& net, const std::vector<NodeId>& route);

struct DriverState {
    std::string driver_id;
    std::shared_ptr<const std::vector<Leg>> legs;
    std::size_t leg = 0;        // index of the current leg
    double offset = 0.0;        // meters along the current leg, within [0, length]
    double speed_factor = 1.0;  // applies to the current leg
    Timestamp ts = 0;           // timestamp of the last emitted event (start time before the first)
    bool finished = false;
};

struct StepResult {
    DriverState state;
    Event event;
};

inline constexpr double kSimAccuracyM = 5.0;

/// Advances a driver by one second: speed_factor * max_speed meters along its
/// route, carrying leftover distance into following legs (a new factor is drawn
/// for each leg entered). Reaching the end of the final leg finishes the driver.
StepResult step(const DriverState& state, StreamRng& rng, const SpeedRange& speed);

struct SimConfig {
    std::size_t drivers = 1;
    std::uint64_t seed = 0;
    SpeedRange speed;
    Timestamp start_ts = 1'514'764'800'000; // 2018-01-01T00:00:00Z
};

/// Throws std::invalid_argument for zero drivers or a bad speed range.
void validate(const SimConfig& cfg);

/// Zero-padded id of the driver at `index`, so lexical order equals numeric order.
std::string driver_name(std::size_t index, std::size_t drivers);

/// Initial state of one driver: random origin among nodes with at least one
/// segment, random destination in the same component, shortest route, first
/// speed factor. nullopt when origin and destination coincide.
std::optional<DriverState> start_driver(const RoadNetwork& net, const SimConfig& cfg,
                                        std::size_t index, StreamRng& rng);

struct SimSummary {
    std::uint64_t events = 0;
    std::size_t degenerate = 0;
    std::vector<std::uint64_t> events_per_driver;
    /// Drivers still emitting at each tick, ticks start at start_ts + 1 s.
    std::vector<std::size_t> active_per_tick;
};

using EventSink = std::function<void(const Event&)>;

/// Runs all drivers from cfg.start_ts at 1 Hz until every one has arrived.
/// Events reach `sink` ordered by timestamp, then driver id.
SimSummary simulate(const RoadNetwork& net, const SimConfig& cfg, const EventSink& sink);

/// simulate() writing NDJSON to `path`.
SimSummary simulate_to_file(const RoadNetwork& net, const SimConfig& cfg,
                            const std::filesystem::path& path);

} // namespace gridagg
