#include "gridagg/ingest.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <vector>

namespace gridagg {

namespace {

using nlohmann::json;

constexpr std::array kKnownKeys = {"driverId", "lat",      "lon",      "alt",    "timestamp",
                                   "speed",    "bearing",  "accuracy", "payload"};

bool is_known(const std::string& key) {
    for (const char* k : kKnownKeys) {
        if (key == k) return true;
    }
    return false;
}

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) {
        throw ParseError(ParseErrorKind::missing_key, std::string("missing required key: ") + key);
    }
    return *it;
}

double number(const json& v, const char* key) {
    if (!v.is_number()) {
        throw ParseError(ParseErrorKind::wrong_type, std::string("expected number for key: ") + key);
    }
    return v.get<double>();
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

} // namespace

Event decode_line(std::string_view line) {
    json doc = json::parse(line.begin(), line.end(), nullptr, false);
    if (doc.is_discarded()) {
        throw ParseError(ParseErrorKind::malformed_json, "malformed JSON");
    }
    if (!doc.is_object()) {
        throw ParseError(ParseErrorKind::malformed_json, "event is not a JSON object");
    }

    Event e;
    const json& id = require(doc, "driverId");
    if (!id.is_string()) {
        throw ParseError(ParseErrorKind::wrong_type, "expected string for key: driverId");
    }
    e.driver_id = id.get<std::string>();
    e.pos.lat = number(require(doc, "lat"), "lat");
    e.pos.lon = number(require(doc, "lon"), "lon");
    if (auto it = doc.find("alt"); it != doc.end() && !it->is_null()) {
        e.alt = number(*it, "alt");
    }
    const json& ts = require(doc, "timestamp");
    if (!ts.is_number_integer()) {
        throw ParseError(ParseErrorKind::wrong_type, "expected integer for key: timestamp");
    }
    e.ts = ts.get<Timestamp>();
    e.speed = number(require(doc, "speed"), "speed");
    e.bearing = number(require(doc, "bearing"), "bearing");
    e.accuracy = number(require(doc, "accuracy"), "accuracy");

    if (auto it = doc.find("payload"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) {
            throw ParseError(ParseErrorKind::wrong_type, "expected object for key: payload");
        }
        e.payload = std::move(*it);
    }
    for (auto& [key, value] : doc.items()) {
        if (!is_known(key) && !e.payload.contains(key)) {
            e.payload[key] = std::move(value);
        }
    }

    return e;
}

Event parse_line(std::string_view line) {
    Event e = decode_line(line);
    if (auto err = check_event(e)) {
        throw ParseError(ParseErrorKind::invalid_event, std::string(describe(*err)));
    }
    return e;
}

nlohmann::json to_wire(const Event& e) {
    json doc = {
        {"driverId", e.driver_id},
        {"lat", e.pos.lat},
        {"lon", e.pos.lon},
        {"timestamp", e.ts},
        {"speed", e.speed},
        {"bearing", e.bearing},
        {"accuracy", e.accuracy},
    };
    if (e.alt) doc["alt"] = *e.alt;
    if (e.payload.is_object() && !e.payload.empty()) doc["payload"] = e.payload;
    return doc;
}

std::string serialize_event(const Event& e) { return to_wire(e).dump(); }

LoadReport load_stream(std::istream& in, Retriever& retriever, std::size_t batch_size) {
    if (batch_size == 0) batch_size = 1;
    LoadReport report;
    std::vector<Event> batch;
    batch.reserve(batch_size);

    auto flush = [&] {
        if (batch.empty()) return;
        const IngestReport r = retriever.ingest_batch(batch);
        report.accepted += r.accepted;
        report.rejected += r.rejected;
        report.capacity_exhausted = report.capacity_exhausted || r.capacity_exhausted;
        ++report.batches;
        batch.clear();
    };

    std::string line;
    while (!report.capacity_exhausted && std::getline(in, line)) {
        if (blank(line)) continue;
        try {
            batch.push_back(decode_line(line));
        } catch (const ParseError&) {
            ++report.parse_errors;
            continue;
        }
        if (batch.size() >= batch_size) flush();
    }
    if (!report.capacity_exhausted) flush();
    return report;
}

LoadReport load_file(const std::filesystem::path& path, Retriever& retriever,
                     std::size_t batch_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open event file: " + path.string());
    }
    return load_stream(in, retriever, batch_size);
}

} // namespace gridagg
