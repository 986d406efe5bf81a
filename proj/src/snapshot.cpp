// Snapshot layout (version 1, little-endian host order):
//
//   char[8]  magic "GRIDAGGS"
//   u32      version
//   u32      byte-order marker 0x01020304
//   u64      driver dictionary size, then per entry: u32 length, bytes
//   u64      partition count, then per partition:
//              u64 rows
//              u32[rows] driver code
//              i64[rows] ts
//              f64[rows] lat, lon, alt (NaN = absent), speed, bearing, accuracy
//              u64 payload entries, then per entry: u32 row, u32 length, bytes
//
// Cell-index columns are not stored; they are recomputed on load.

#include "gridagg/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>

namespace gridagg {

namespace {

constexpr char kMagic[8] = {'G', 'R', 'I', 'D', 'A', 'G', 'G', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kByteOrder = 0x01020304;

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little-endian");

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

void put_string(std::ostream& out, const std::string& s) {
    put(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void fail(const char* what) { throw std::runtime_error(std::string("snapshot: ") + what); }

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) fail("truncated input");
    return v;
}

template <typename T>
std::vector<T> get_array(std::istream& in, std::uint64_t n) {
    std::vector<T> v(n);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
        fail("truncated input");
    }
    return v;
}

std::string get_string(std::istream& in) {
    const auto len = get<std::uint32_t>(in);
    std::string s(len, '\0');
    if (!in.read(s.data(), len)) fail("truncated input");
    return s;
}

} // namespace

void MemoryStore::save_snapshot(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, kByteOrder);
    put(out, static_cast<std::uint64_t>(drivers_.size()));
    for (const auto& d : drivers_) put_string(out, d);
    put(out, static_cast<std::uint64_t>(partitions_.size()));
    for (const Partition& part : partitions_) {
        const EventColumns& c = part.cols;
        put(out, static_cast<std::uint64_t>(c.size()));
        put_array(out, c.driver);
        put_array(out, c.ts);
        put_array(out, c.lat);
        put_array(out, c.lon);
        put_array(out, c.alt);
        put_array(out, c.speed);
        put_array(out, c.bearing);
        put_array(out, c.accuracy);
        put(out, static_cast<std::uint64_t>(c.payload.size()));
        for (const auto& [row, doc] : c.payload) {
            put(out, row);
            put_string(out, doc);
        }
    }
    if (!out) fail("write failed");
}

IngestReport MemoryStore::load_snapshot(std::istream& in) {
    char magic[sizeof(kMagic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        fail("bad magic header");
    }
    if (get<std::uint32_t>(in) != kVersion) fail("unsupported version");
    if (get<std::uint32_t>(in) != kByteOrder) fail("byte order mismatch");

    const auto driver_count = get<std::uint64_t>(in);
    std::vector<std::string> drivers;
    drivers.reserve(driver_count);
    for (std::uint64_t k = 0; k < driver_count; ++k) drivers.push_back(get_string(in));

    IngestReport report;
    const auto partition_count = get<std::uint64_t>(in);
    for (std::uint64_t p = 0; p < partition_count; ++p) {
        const auto rows = get<std::uint64_t>(in);
        const auto driver = get_array<std::uint32_t>(in, rows);
        const auto ts = get_array<Timestamp>(in, rows);
        const auto lat = get_array<double>(in, rows);
        const auto lon = get_array<double>(in, rows);
        const auto alt = get_array<double>(in, rows);
        const auto speed = get_array<double>(in, rows);
        const auto bearing = get_array<double>(in, rows);
        const auto accuracy = get_array<double>(in, rows);
        const auto payload_count = get<std::uint64_t>(in);
        std::vector<std::pair<std::uint32_t, std::string>> payload;
        for (std::uint64_t k = 0; k < payload_count; ++k) {
            const auto row = get<std::uint32_t>(in);
            payload.emplace_back(row, get_string(in));
        }

        std::unique_lock lock(mutex_);
        auto doc = payload.begin();
        for (std::uint64_t r = 0; r < rows; ++r) {
            if (driver[r] >= drivers.size()) fail("driver code out of range");
            Event e;
            e.driver_id = drivers[driver[r]];
            e.pos = {lat[r], lon[r]};
            if (!std::isnan(alt[r])) e.alt = alt[r];
            e.ts = ts[r];
            e.speed = speed[r];
            e.bearing = bearing[r];
            e.accuracy = accuracy[r];
            if (doc != payload.end() && doc->first == r) {
                e.payload = nlohmann::json::parse(doc->second);
                ++doc;
            }
            if (check_event(e)) {
                ++report.rejected;
                continue;
            }
            if (rows_ >= config_.capacity) {
                report.capacity_exhausted = true;
                return report;
            }
            append_unlocked(e);
            ++report.accepted;
        }
    }
    return report;
}

} // namespace gridagg
