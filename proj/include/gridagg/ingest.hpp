#pragma once

#include "gridagg/geo.hpp"
#include "gridagg/store.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridagg {

enum class ParseErrorKind {
    malformed_json,
    missing_key,
    wrong_type,
    invalid_event,
};

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ParseErrorKind kind() const noexcept { return kind_; }

private:
    ParseErrorKind kind_;
};

/// Decodes one NDJSON event line.
///
/// Wire keys: driverId, lat, lon, alt (optional), timestamp, speed, bearing,
/// accuracy, payload (optional object). Any other top-level key is moved into
/// the payload (an explicit payload entry with the same name wins).
Event parse_line(std::string_view line);

/// parse_line without the final event validation; the store decides what to reject.
Event decode_line(std::string_view line);

nlohmann::json to_wire(const Event& e);

/// Compact single-line JSON for `e`, without trailing newline.
std::string serialize_event(const Event& e);

inline constexpr std::size_t kDefaultBatchSize = 10'000;

struct LoadReport {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;     // parsed, refused by the store
    std::uint64_t parse_errors = 0; // undecodable lines
    std::uint64_t batches = 0;
    bool capacity_exhausted = false;

    std::uint64_t lines() const noexcept { return accepted + rejected + parse_errors; }
};

/// Streams NDJSON from `in` into `retriever` in batches of `batch_size`.
/// Undecodable lines count as parse errors, decodable but invalid events as
/// rejected; both are skipped. Blank lines are ignored entirely.
/// Stops early if the store runs out of capacity.
LoadReport load_stream(std::istream& in, Retriever& retriever,
                       std::size_t batch_size = kDefaultBatchSize);

/// load_stream over a file. Throws std::runtime_error when the file cannot be opened.
LoadReport load_file(const std::filesystem::path& path, Retriever& retriever,
                     std::size_t batch_size = kDefaultBatchSize);

} // namespace gridagg
