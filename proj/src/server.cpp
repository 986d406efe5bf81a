#include "gridagg/server.hpp"
#include "gridagg/grid.hpp"

#include <httplib.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace gridagg {

namespace {

using nlohmann::json;

struct BadRequest : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

const std::string& require(const QueryParams& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw BadRequest(std::string("missing parameter: ") + key);
    return it->second;
}

double parse_double(const std::string& text, const char* key) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v)) {
        throw BadRequest(std::string("malformed parameter: ") + key);
    }
    return v;
}

std::int64_t parse_int(const std::string& text, const char* key) {
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw BadRequest(std::string("malformed parameter: ") + key);
    }
    return v;
}

std::optional<std::int64_t> optional_int(const QueryParams& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return parse_int(it->second, key);
}

AggregateQuery parse_query(const QueryParams& params) {
    const double min_lat = parse_double(require(params, "minLat"), "minLat");
    const double min_lon = parse_double(require(params, "minLon"), "minLon");
    const double max_lat = parse_double(require(params, "maxLat"), "maxLat");
    const double max_lon = parse_double(require(params, "maxLon"), "maxLon");
    const std::int64_t zoom = parse_int(require(params, "zoom"), "zoom");
    if (zoom < 0 || zoom >= kZoomLevels) throw BadRequest("zoom out of range (0-17)");

    AggregateQuery q;
    try {
        q.bbox = BoundingBox::make({min_lat, min_lon}, {max_lat, max_lon});
        q.zoom = ZoomLevel(static_cast<int>(zoom));
        const auto tmin = optional_int(params, "tmin");
        const auto tmax = optional_int(params, "tmax");
        if (tmin || tmax) {
            q.time = TimeRange::make(tmin.value_or(std::numeric_limits<Timestamp>::min()),
                                     tmax.value_or(std::numeric_limits<Timestamp>::max()));
        }
    } catch (const BadRequest&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw BadRequest(e.what());
    }
    return q;
}

HttpReply error_reply(int status, const std::string& message) {
    return {status, json{{"error", message}}};
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

} // namespace

void ServerConfig::validate() const {
    if (!(timeout_s > 0.0)) throw std::invalid_argument("timeout must be positive");
    if (max_cells == 0) throw std::invalid_argument("max result cells must be positive");
    if (retriever != "memory") throw std::invalid_argument("unknown retriever: " + retriever);
}

HttpReply handle_aggregate(const Retriever& retriever, const QueryParams& params,
                           const ServerConfig& config) {
    AggregateQuery q;
    try {
        q = parse_query(params);
    } catch (const BadRequest& e) {
        return error_reply(400, e.what());
    }

    AggregateLimits limits;
    limits.max_cells = config.max_cells;
    limits.deadline = std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(config.timeout_s));
    std::vector<ClusterResult> clusters;
    try {
        clusters = retriever.aggregate(q, limits);
    } catch (const ResultTooLarge& e) {
        return error_reply(413, e.what());
    } catch (const QueryTimeout& e) {
        return error_reply(504, e.what());
    }

    json list = json::array();
    std::uint64_t total = 0;
    for (const ClusterResult& c : clusters) {
        list.push_back({{"lat", c.pos.lat}, {"lon", c.pos.lon}, {"count", c.count}});
        total += c.count;
    }
    return {200, json{{"zoom", q.zoom.value()},
                      {"separation", separation(q.zoom)},
                      {"clusters", std::move(list)},
                      {"total", total}}};
}

HttpReply handle_ingest(Retriever& retriever, std::string_view body, const ServerConfig& config) {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        return error_reply(400, "empty request body");
    }
    std::istringstream in{std::string(body)};
    const LoadReport r = load_stream(in, retriever, config.ingest_batch);
    if (r.accepted + r.rejected == 0 && !r.capacity_exhausted) {
        return error_reply(400, "body contains no NDJSON events");
    }
    json out = {{"accepted", r.accepted}, {"rejected", r.rejected}, {"parse_errors", r.parse_errors}};
    if (r.capacity_exhausted) out["capacity_exhausted"] = true;
    return {200, std::move(out)};
}

HttpReply handle_stats(const Retriever& retriever) {
    const StoreStats s = retriever.stats();
    json out = {{"events", s.events}, {"extent", nullptr}, {"time", nullptr}};
    if (s.extent) {
        out["extent"] = {{"minLat", s.extent->min.lat},
                         {"minLon", s.extent->min.lon},
                         {"maxLat", s.extent->max.lat},
                         {"maxLon", s.extent->max.lon}};
    }
    if (s.time) out["time"] = {{"tmin", s.time->tmin}, {"tmax", s.time->tmax}};
    return {200, std::move(out)};
}

struct Server::Impl {
    Retriever& retriever;
    ServerConfig config;
    httplib::Server http;

    Impl(Retriever& r, ServerConfig c) : retriever(r), config(std::move(c)) {}

    void send(httplib::Response& res, const HttpReply& reply) const {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    }

    void routes() {
        if (!config.cors_origin.empty()) {
            http.set_default_headers({{"Access-Control-Allow-Origin", config.cors_origin},
                                      {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                      {"Access-Control-Allow-Headers", "Content-Type"}});
            http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
                res.status = 204;
            });
        }
        http.Get("/aggregate", [this](const httplib::Request& req, httplib::Response& res) {
            QueryParams params;
            for (const auto& [k, v] : req.params) params.emplace(k, v);
            send(res, handle_aggregate(retriever, params, config));
        });
        http.Post("/events", [this](const httplib::Request& req, httplib::Response& res) {
            send(res, handle_ingest(retriever, req.body, config));
        });
        http.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
            send(res, handle_stats(retriever));
        });
    }
};

Server::Server(Retriever& retriever, ServerConfig config)
    : impl_(std::make_unique<Impl>(retriever, std::move(config))) {
    impl_->config.validate();
    impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
    int port = impl_->config.port;
    if (port == 0) {
        port = impl_->http.bind_to_any_port(impl_->config.host);
    } else if (!impl_->http.bind_to_port(impl_->config.host, port)) {
        port = -1;
    }
    if (port < 0) {
        throw std::runtime_error("cannot bind " + impl_->config.host + ":" +
                                 std::to_string(impl_->config.port));
    }
    return port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
    if (impl_) impl_->http.stop();
}

std::string aggregate_query_string(const AggregateQuery& q) {
    std::string s = "minLat=" + format_double(q.bbox.min.lat) + "&minLon=" + format_double(q.bbox.min.lon) +
                    "&maxLat=" + format_double(q.bbox.max.lat) + "&maxLon=" + format_double(q.bbox.max.lon) +
                    "&zoom=" + std::to_string(q.zoom.value());
    if (q.time) {
        s += "&tmin=" + std::to_string(q.time->tmin) + "&tmax=" + std::to_string(q.time->tmax);
    }
    return s;
}

QueryExecutor http_executor(const std::string& base_url) {
    auto client = std::make_shared<httplib::Client>(base_url);
    return [client](const AggregateQuery& q) {
        auto res = client->Get("/aggregate?" + aggregate_query_string(q));
        if (!res) throw std::runtime_error("HTTP request failed: " + httplib::to_string(res.error()));
        if (res->status != 200) {
            throw std::runtime_error("HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        const json doc = json::parse(res->body);
        std::vector<ClusterResult> out;
        for (const auto& c : doc.at("clusters")) {
            out.push_back({{c.at("lat").get<double>(), c.at("lon").get<double>()},
                           c.at("count").get<std::uint64_t>()});
        }
        return out;
    };
}

json fetch_stats(const std::string& base_url) {
    httplib::Client client(base_url);
    auto res = client.Get("/stats");
    if (!res) throw std::runtime_error("HTTP request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw std::runtime_error("HTTP " + std::to_string(res->status));
    return json::parse(res->body);
}

} // namespace gridagg
