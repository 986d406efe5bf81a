#include "gridagg/ingest.hpp"
#include "gridagg/simulator.hpp"

#include <algorithm>
#include <fstream>

namespace gridagg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

GeoPoint interpolate(const Leg& leg, double offset) noexcept {
    const double t = offset / leg.length;
    return {leg.from.lat + t * (leg.to.lat - leg.from.lat),
            leg.from.lon + t * (leg.to.lon - leg.from.lon)};
}

} // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed ^ splitmix64(stream))) {}

std::vector<Leg> route_legs(const RoadNetwork& net, const std::vector<NodeId>& route) {
    std::vector<Leg> legs;
    for (std::size_t k = 0; k + 1 < route.size(); ++k) {
        const Segment& seg = net.link(route[k], route[k + 1]);
        const GeoPoint& a = net.position(route[k]);
        const GeoPoint& b = net.position(route[k + 1]);
        legs.push_back({a, b, seg.length, seg.max_speed, segment_bearing(a, b)});
    }
    return legs;
}

StepResult step(const DriverState& state, StreamRng& rng, const SpeedRange& speed) {
    DriverState next = state;
    const auto& legs = *next.legs;
    next.offset += next.speed_factor * legs[next.leg].max_speed; // dt = 1 s
    while (next.offset > legs[next.leg].length && next.leg + 1 < legs.size()) {
        next.offset -= legs[next.leg].length;
        ++next.leg;
        next.speed_factor = rng.uniform(speed.min, speed.max);
    }
    const Leg& leg = legs[next.leg];
    if (next.leg + 1 == legs.size() && next.offset >= leg.length) {
        next.offset = leg.length;
        next.finished = true;
    }
    next.offset = std::min(next.offset, leg.length);
    next.ts += 1000;

    Event e;
    e.driver_id = next.driver_id;
    e.pos = interpolate(leg, next.offset);
    e.ts = next.ts;
    e.speed = next.speed_factor * leg.max_speed;
    e.bearing = leg.bearing;
    e.accuracy = kSimAccuracyM;
    return {std::move(next), std::move(e)};
}

void validate(const SimConfig& cfg) {
    if (cfg.drivers < 1) throw std::invalid_argument("simulation needs at least one driver");
    if (!(cfg.speed.min > 0.0 && cfg.speed.min <= cfg.speed.max && cfg.speed.max <= 2.0)) {
        throw std::invalid_argument("speed factor range must lie within (0, 2] and be non-empty");
    }
    if (cfg.start_ts <= 0) throw std::invalid_argument("start timestamp must be positive");
}

std::string driver_name(std::size_t index, std::size_t drivers) {
    const std::size_t width = std::max<std::size_t>(4, std::to_string(drivers).size());
    std::string digits = std::to_string(index);
    return "driver-" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::optional<DriverState> start_driver(const RoadNetwork& net, const SimConfig& cfg,
                                        std::size_t index, StreamRng& rng) {
    const auto& nodes = net.nodes();
    std::vector<std::size_t> origins;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (!net.adjacent(n).empty()) origins.push_back(n);
    }
    const std::size_t origin = origins[rng.index(origins.size())];
    std::vector<std::size_t> reachable;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (net.components()[n] == net.components()[origin]) reachable.push_back(n);
    }
    const std::size_t dest = reachable[rng.index(reachable.size())];
    if (dest == origin) return std::nullopt;

    auto legs = std::make_shared<const std::vector<Leg>>(
        route_legs(net, plan_route(net, nodes[origin].id, nodes[dest].id)));
    DriverState s;
    s.driver_id = driver_name(index, cfg.drivers);
    s.legs = std::move(legs);
    s.speed_factor = rng.uniform(cfg.speed.min, cfg.speed.max);
    s.ts = cfg.start_ts;
    return s;
}

SimSummary simulate(const RoadNetwork& net, const SimConfig& cfg, const EventSink& sink) {
    validate(cfg);
    SimSummary summary;
    summary.events_per_driver.assign(cfg.drivers, 0);

    struct Active {
        std::size_t index;
        DriverState state;
        StreamRng rng;
    };
    std::vector<Active> active;
    for (std::size_t d = 0; d < cfg.drivers; ++d) {
        StreamRng rng(cfg.seed, d);
        if (auto s = start_driver(net, cfg, d, rng)) {
            active.push_back({d, std::move(*s), rng});
        } else {
            ++summary.degenerate;
        }
    }

    while (!active.empty()) {
        summary.active_per_tick.push_back(active.size());
        for (Active& a : active) {
            StepResult r = step(a.state, a.rng, cfg.speed);
            a.state = std::move(r.state);
            sink(r.event);
            ++summary.events;
            ++summary.events_per_driver[a.index];
        }
        std::erase_if(active, [](const Active& a) { return a.state.finished; });
    }
    return summary;
}

SimSummary simulate_to_file(const RoadNetwork& net, const SimConfig& cfg,
                            const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path.string());
    SimSummary summary = simulate(net, cfg, [&](const Event& e) {
        out << serialize_event(e) << '\n';
    });
    out.flush();
    if (!out) throw std::runtime_error("failed writing dataset file: " + path.string());
    return summary;
}

} // namespace gridagg
