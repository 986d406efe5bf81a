// gridagg command-line tool: dataset generation, loading, serving and benchmarking.

#include "gridagg/bench.hpp"
#include "gridagg/ingest.hpp"
#include "gridagg/server.hpp"
#include "gridagg/simulator.hpp"
#include "gridagg/store.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace gridagg;

namespace {

struct DataSource {
    std::string events;   // NDJSON dataset
    std::string snapshot; // binary snapshot
    std::size_t batch = kDefaultBatchSize;
};

void add_source_options(CLI::App* cmd, DataSource& src) {
    cmd->add_option("--data", src.events, "NDJSON event file to load")->check(CLI::ExistingFile);
    cmd->add_option("--snapshot", src.snapshot, "Snapshot file to load")->check(CLI::ExistingFile);
    cmd->add_option("--batch", src.batch, "Ingest batch size")->default_val(kDefaultBatchSize);
}

void load_source(const DataSource& src, MemoryStore& store) {
    const auto started = std::chrono::steady_clock::now();
    if (!src.snapshot.empty()) {
        std::ifstream in(src.snapshot, std::ios::binary);
        const IngestReport r = store.load_snapshot(in);
        std::cerr << "snapshot: accepted " << r.accepted << ", rejected " << r.rejected << '\n';
    }
    if (!src.events.empty()) {
        const LoadReport r = load_file(src.events, store, src.batch);
        std::cerr << "events: accepted " << r.accepted << ", rejected " << r.rejected
                  << ", parse errors " << r.parse_errors << '\n';
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cerr << "store holds " << store.size() << " events (" << secs << " s)\n";
}

Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zoom-level grid aggregation engine for GPS events"};
    app.require_subcommand(1);

    // make-network
    GridNetworkSpec grid;
    std::string grid_out;
    auto* make_net = app.add_subcommand("make-network", "Write a synthetic street-grid road network");
    make_net->add_option("--lat", grid.south_west.lat, "South-west corner latitude")->default_val(grid.south_west.lat);
    make_net->add_option("--lon", grid.south_west.lon, "South-west corner longitude")->default_val(grid.south_west.lon);
    make_net->add_option("--rows", grid.rows)->default_val(grid.rows);
    make_net->add_option("--cols", grid.cols)->default_val(grid.cols);
    make_net->add_option("--spacing", grid.spacing_m, "Node spacing in meters")->default_val(grid.spacing_m);
    make_net->add_option("--local-speed", grid.local_speed, "m/s")->default_val(grid.local_speed);
    make_net->add_option("--arterial-speed", grid.arterial_speed, "m/s")->default_val(grid.arterial_speed);
    make_net->add_option("--arterial-every", grid.arterial_every)->default_val(grid.arterial_every);
    make_net->add_option("--out", grid_out)->required();

    // simulate
    std::string sim_network;
    std::string sim_out;
    SimConfig sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Generate an NDJSON event dataset");
    simulate_cmd->add_option("--network", sim_network)->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--drivers", sim.drivers)->required();
    simulate_cmd->add_option("--seed", sim.seed)->required();
    simulate_cmd->add_option("--start-ts", sim.start_ts, "Epoch milliseconds")->required();
    simulate_cmd->add_option("--out", sim_out)->required();
    simulate_cmd->add_option("--speed-min", sim.speed.min)->default_val(sim.speed.min);
    simulate_cmd->add_option("--speed-max", sim.speed.max)->default_val(sim.speed.max);

    // ingest
    std::string ingest_in;
    std::string ingest_snapshot_out;
    std::size_t ingest_batch = kDefaultBatchSize;
    auto* ingest_cmd = app.add_subcommand("ingest", "Load an NDJSON dataset and report the result");
    ingest_cmd->add_option("--in", ingest_in)->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--batch", ingest_batch)->default_val(kDefaultBatchSize);
    ingest_cmd->add_option("--snapshot-out", ingest_snapshot_out, "Write a snapshot after loading");

    // serve
    ServerConfig server_cfg;
    std::string bind_addr = "127.0.0.1:8080";
    DataSource serve_src;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP aggregation API");
    serve_cmd->add_option("--bind", bind_addr, "host:port")->default_val(bind_addr)->envname("GRIDAGG_BIND");
    serve_cmd->add_option("--timeout", server_cfg.timeout_s, "Query timeout in seconds")
        ->default_val(server_cfg.timeout_s)->envname("GRIDAGG_TIMEOUT");
    serve_cmd->add_option("--max-cells", server_cfg.max_cells, "Largest cluster list returned")
        ->default_val(server_cfg.max_cells)->envname("GRIDAGG_MAX_CELLS");
    serve_cmd->add_option("--cors-origin", server_cfg.cors_origin, "Allowed origin, empty disables CORS")
        ->default_val(server_cfg.cors_origin)->envname("GRIDAGG_CORS_ORIGIN");
    serve_cmd->add_option("--retriever", server_cfg.retriever)->default_val(server_cfg.retriever)->envname("GRIDAGG_RETRIEVER");
    add_source_options(serve_cmd, serve_src);

    // bench
    std::string plan_file;
    std::string bench_out;
    std::string http_url;
    std::vector<int> zooms;
    BenchPlan plan;
    DataSource bench_src;
    auto* bench_cmd = app.add_subcommand("bench", "Run the viewport latency benchmark");
    bench_cmd->add_option("--plan", plan_file, "JSON bench plan")->check(CLI::ExistingFile);
    bench_cmd->add_option("--zooms", zooms, "Zoom levels (overrides plan)")->delimiter(',');
    bench_cmd->add_option("--queries", plan.queries_per_level, "Queries per zoom level");
    bench_cmd->add_option("--width", plan.viewport.width);
    bench_cmd->add_option("--height", plan.viewport.height);
    bench_cmd->add_option("--seed", plan.seed);
    bench_cmd->add_option("--out", bench_out, "Per-query CSV")->required();
    bench_cmd->add_option("--http", http_url, "Benchmark a running server instead of an in-process store");
    add_source_options(bench_cmd, bench_src);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*make_net) {
            make_grid_network(grid).save(grid_out);
            return 0;
        }

        if (*simulate_cmd) {
            const RoadNetwork net = RoadNetwork::load(sim_network);
            const SimSummary s = simulate_to_file(net, sim, sim_out);
            std::cout << "events " << s.events << "\ndrivers " << sim.drivers << "\ndegenerate "
                      << s.degenerate << "\nticks " << s.active_per_tick.size() << '\n';
            return 0;
        }

        if (*ingest_cmd) {
            MemoryStore store;
            const auto started = std::chrono::steady_clock::now();
            const LoadReport r = load_file(ingest_in, store, ingest_batch);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            nlohmann::json out = {{"accepted", r.accepted},
                                  {"rejected", r.rejected},
                                  {"parse_errors", r.parse_errors},
                                  {"batches", r.batches},
                                  {"seconds", secs}};
            std::cout << out.dump() << '\n';
            if (!ingest_snapshot_out.empty()) {
                std::ofstream snap(ingest_snapshot_out, std::ios::binary);
                store.save_snapshot(snap);
                snap.flush();
                if (!snap) throw std::runtime_error("failed writing snapshot: " + ingest_snapshot_out);
            }
            return 0;
        }

        if (*serve_cmd) {
            const auto colon = bind_addr.rfind(':');
            if (colon == std::string::npos) throw std::invalid_argument("--bind expects host:port");
            server_cfg.host = bind_addr.substr(0, colon);
            server_cfg.port = std::stoi(bind_addr.substr(colon + 1));
            MemoryStore store;
            load_source(serve_src, store);
            Server server(store, server_cfg);
            const int port = server.bind();
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << server_cfg.host << ':' << port << '\n';
            server.listen();
            g_server = nullptr;
            return 0;
        }

        if (*bench_cmd) {
            if (!plan_file.empty()) {
                std::ifstream in(plan_file);
                BenchPlan from_file = BenchPlan::from_json(nlohmann::json::parse(in));
                // Explicit flags win over the file.
                if (bench_cmd->count("--queries")) from_file.queries_per_level = plan.queries_per_level;
                if (bench_cmd->count("--width")) from_file.viewport.width = plan.viewport.width;
                if (bench_cmd->count("--height")) from_file.viewport.height = plan.viewport.height;
                if (bench_cmd->count("--seed")) from_file.seed = plan.seed;
                plan = from_file;
            }
            if (!zooms.empty()) plan.zooms = zooms;

            BenchReport report;
            if (!http_url.empty()) {
                if (!plan.extent) {
                    const auto stats = fetch_stats(http_url);
                    if (stats.at("extent").is_null()) throw std::runtime_error("server holds no events");
                    const auto& e = stats.at("extent");
                    plan.extent = BoundingBox{{e.at("minLat").get<double>(), e.at("minLon").get<double>()},
                                              {e.at("maxLat").get<double>(), e.at("maxLon").get<double>()}};
                }
                report = run(plan, http_executor(http_url));
            } else {
                MemoryStore store;
                load_source(bench_src, store);
                if (!plan.extent) plan.extent = store.stats().extent;
                report = run(plan, store);
            }
            std::ofstream csv(bench_out);
            write_csv(csv, report);
            write_summary(std::cout, report);
            return report.bound_violations == 0 ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
