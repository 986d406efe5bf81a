#pragma once

#include "gridagg/bench.hpp"
#include "gridagg/ingest.hpp"
#include "gridagg/store.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace gridagg {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string retriever = "memory";
    double timeout_s = 10.0;
    std::size_t max_cells = 50'000;
    std::string cors_origin = "*"; // empty disables CORS headers
    std::size_t ingest_batch = kDefaultBatchSize;

    /// Throws std::invalid_argument when timeout or max_cells is not positive.
    void validate() const;
};

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// GET /aggregate?minLat&minLon&maxLat&maxLon&zoom[&tmin&tmax]
HttpReply handle_aggregate(const Retriever& retriever, const QueryParams& params,
                           const ServerConfig& config);

/// POST /events with an NDJSON body.
HttpReply handle_ingest(Retriever& retriever, std::string_view body, const ServerConfig& config);

/// GET /stats
HttpReply handle_stats(const Retriever& retriever);

/// HTTP front end over a retriever. Requests are served on a worker pool.
class Server {
public:
    Server(Retriever& retriever, ServerConfig config);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds config.host:config.port (port 0 picks a free port) and returns the bound port.
    int bind();
    /// Serves until stop(); call bind() first.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Bench executor that issues GET /aggregate against `base_url` (e.g. "http://127.0.0.1:8080").
QueryExecutor http_executor(const std::string& base_url);

/// Fetches GET /stats from `base_url`.
nlohmann::json fetch_stats(const std::string& base_url);

/// Query string for `q`, coordinates printed in shortest round-trip form.
std::string aggregate_query_string(const AggregateQuery& q);

} // namespace gridagg
