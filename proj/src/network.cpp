#include "gridagg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>

namespace gridagg {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

} // namespace

double segment_length_m(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double mean_lat = (a.lat + b.lat) / 2.0 * kDegToRad;
    const double dy = (b.lat - a.lat) * kDegToRad;
    const double dx = (b.lon - a.lon) * kDegToRad * std::cos(mean_lat);
    return kEarthRadiusM * std::sqrt(dx * dx + dy * dy);
}

double segment_bearing(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double mean_lat = (a.lat + b.lat) / 2.0 * kDegToRad;
    const double dy = b.lat - a.lat;
    const double dx = (b.lon - a.lon) * std::cos(mean_lat);
    double deg = std::atan2(dx, dy) / kDegToRad;
    if (deg < 0.0) deg += 360.0;
    return deg >= 360.0 ? 0.0 : deg;
}

RoadNetwork RoadNetwork::make(std::vector<Node> nodes, const std::vector<SegmentSpec>& segments) {
    RoadNetwork net;
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (!nodes[k].pos.valid()) {
            throw NetworkError("node " + std::to_string(nodes[k].id) + " has invalid coordinates");
        }
        if (!net.index_.emplace(nodes[k].id, k).second) {
            throw NetworkError("duplicate node id " + std::to_string(nodes[k].id));
        }
    }
    net.nodes_ = std::move(nodes);
    net.adjacency_.resize(net.nodes_.size());

    for (const SegmentSpec& s : segments) {
        auto from = net.index_.find(s.from);
        auto to = net.index_.find(s.to);
        if (from == net.index_.end() || to == net.index_.end()) {
            throw NetworkError("segment " + std::to_string(s.from) + "-" + std::to_string(s.to) +
                               " references a missing node");
        }
        if (!(s.max_speed > 0.0)) {
            throw NetworkError("segment " + std::to_string(s.from) + "-" + std::to_string(s.to) +
                               " has non-positive max speed");
        }
        const double length =
            segment_length_m(net.nodes_[from->second].pos, net.nodes_[to->second].pos);
        if (!(length > 0.0)) {
            throw NetworkError("segment " + std::to_string(s.from) + "-" + std::to_string(s.to) +
                               " has zero length");
        }
        const std::size_t seg = net.segments_.size();
        net.segments_.push_back({s.from, s.to, s.max_speed, length});
        net.adjacency_[from->second].emplace_back(to->second, seg);
        net.adjacency_[to->second].emplace_back(from->second, seg);
    }
    for (auto& adj : net.adjacency_) std::sort(adj.begin(), adj.end());

    // Component labels by BFS from each unlabeled node in index order.
    constexpr auto unset = static_cast<std::size_t>(-1);
    net.component_.assign(net.nodes_.size(), unset);
    bool has_edge_component = false;
    for (std::size_t root = 0; root < net.nodes_.size(); ++root) {
        if (net.component_[root] != unset) continue;
        net.component_[root] = root;
        std::vector<std::size_t> frontier{root};
        while (!frontier.empty()) {
            const std::size_t n = frontier.back();
            frontier.pop_back();
            for (auto [next, seg] : net.adjacency_[n]) {
                if (net.component_[next] == unset) {
                    net.component_[next] = root;
                    frontier.push_back(next);
                }
            }
        }
        if (!net.adjacency_[root].empty()) has_edge_component = true;
    }
    if (!has_edge_component) {
        throw NetworkError("network has no connected component with two or more nodes");
    }
    return net;
}

RoadNetwork RoadNetwork::from_json(const nlohmann::json& doc) {
    try {
        std::vector<Node> nodes;
        for (const auto& n : doc.at("nodes")) {
            nodes.push_back({n.at("id").get<NodeId>(), {n.at("lat").get<double>(), n.at("lon").get<double>()}});
        }
        std::vector<SegmentSpec> segments;
        for (const auto& s : doc.at("segments")) {
            segments.push_back(
                {s.at("from").get<NodeId>(), s.at("to").get<NodeId>(), s.at("max_speed_ms").get<double>()});
        }
        return make(std::move(nodes), segments);
    } catch (const nlohmann::json::exception& e) {
        throw NetworkError(std::string("malformed network document: ") + e.what());
    }
}

nlohmann::json RoadNetwork::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : nodes_) {
        nodes.push_back({{"id", n.id}, {"lat", n.pos.lat}, {"lon", n.pos.lon}});
    }
    nlohmann::json segments = nlohmann::json::array();
    for (const Segment& s : segments_) {
        segments.push_back({{"from", s.from}, {"to", s.to}, {"max_speed_ms", s.max_speed}});
    }
    return {{"nodes", std::move(nodes)}, {"segments", std::move(segments)}};
}

RoadNetwork RoadNetwork::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NetworkError("cannot open network file: " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw NetworkError("network file is not valid JSON: " + path.string());
    return from_json(doc);
}

void RoadNetwork::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write network file: " + path.string());
    out << to_json().dump() << '\n';
}

std::size_t RoadNetwork::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw NetworkError("unknown node " + std::to_string(id));
    return it->second;
}

const GeoPoint& RoadNetwork::position(NodeId id) const { return nodes_[index_of(id)].pos; }

const Segment& RoadNetwork::link(NodeId a, NodeId b) const {
    const std::size_t ia = index_of(a);
    const std::size_t ib = index_of(b);
    const Segment* best = nullptr;
    for (auto [next, seg] : adjacency_[ia]) {
        if (next == ib && (!best || segments_[seg].length < best->length)) best = &segments_[seg];
    }
    if (!best) {
        throw NetworkError("no segment between " + std::to_string(a) + " and " + std::to_string(b));
    }
    return *best;
}

BoundingBox RoadNetwork::extent() const {
    BoundingBox box{nodes_.front().pos, nodes_.front().pos};
    for (const Node& n : nodes_) {
        box.min.lat = std::min(box.min.lat, n.pos.lat);
        box.min.lon = std::min(box.min.lon, n.pos.lon);
        box.max.lat = std::max(box.max.lat, n.pos.lat);
        box.max.lon = std::max(box.max.lon, n.pos.lon);
    }
    return box;
}

RoadNetwork make_grid_network(const GridNetworkSpec& spec) {
    if (spec.rows < 1 || spec.cols < 1 || spec.rows * spec.cols < 2) {
        throw NetworkError("grid network needs at least two nodes");
    }
    const double dlat = spec.spacing_m / (kEarthRadiusM * kDegToRad);
    const double dlon = dlat / std::cos(spec.south_west.lat * kDegToRad);
    std::vector<RoadNetwork::Node> nodes;
    std::vector<SegmentSpec> segments;
    auto id = [&](int r, int c) { return static_cast<NodeId>(r) * spec.cols + c; };
    auto speed_of = [&](int line) {
        return spec.arterial_every > 0 && line % spec.arterial_every == 0 ? spec.arterial_speed
                                                                          : spec.local_speed;
    };
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            nodes.push_back({id(r, c), {spec.south_west.lat + r * dlat, spec.south_west.lon + c * dlon}});
            if (c + 1 < spec.cols) segments.push_back({id(r, c), id(r, c + 1), speed_of(r)});
            if (r + 1 < spec.rows) segments.push_back({id(r, c), id(r + 1, c), speed_of(c)});
        }
    }
    return RoadNetwork::make(std::move(nodes), segments);
}

std::vector<NodeId> plan_route(const RoadNetwork& net, NodeId origin, NodeId dest) {
    const std::size_t src = net.index_of(origin);
    const std::size_t dst = net.index_of(dest);
    if (src == dst) return {origin};
    if (net.components()[src] != net.components()[dst]) {
        throw UnreachableError("node " + std::to_string(dest) + " is unreachable from " +
                               std::to_string(origin));
    }

    const auto& nodes = net.nodes();
    const auto& segs = net.segments();
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr auto none = static_cast<std::size_t>(-1);
    std::vector<double> dist(nodes.size(), inf);
    std::vector<std::size_t> prev(nodes.size(), none);
    std::vector<bool> done(nodes.size(), false);

    // Node indices follow ascending ids, so (distance, index) ordering breaks ties by id.
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[src] = 0.0;
    queue.emplace(0.0, src);
    while (!queue.empty()) {
        auto [d, n] = queue.top();
        queue.pop();
        if (done[n]) continue;
        done[n] = true;
        if (n == dst) break;
        for (auto [next, seg] : net.adjacent(n)) {
            if (done[next]) continue;
            const double nd = d + segs[seg].length;
            if (nd < dist[next] || (nd == dist[next] && n < prev[next])) {
                dist[next] = nd;
                prev[next] = n;
                queue.emplace(nd, next);
            }
        }
    }

    std::vector<NodeId> route;
    for (std::size_t n = dst; n != none; n = prev[n]) route.push_back(nodes[n].id);
    std::reverse(route.begin(), route.end());
    return route;
}

} // namespace gridagg
