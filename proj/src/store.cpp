#include "gridagg/store.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace gridagg {

namespace {

std::uint64_t pack(std::int32_t i, std::int32_t j) noexcept {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
}

// Dense counting is used when the query's cell rectangle has at most this many cells.
constexpr std::int64_t kDenseCells = std::int64_t{1} << 20;

void extend(StoreStats& s, const Event& e) {
    if (!s.extent) {
        s.extent = BoundingBox{e.pos, e.pos};
        s.time = TimeRange{e.ts, e.ts};
    } else {
        s.extent->min.lat = std::min(s.extent->min.lat, e.pos.lat);
        s.extent->min.lon = std::min(s.extent->min.lon, e.pos.lon);
        s.extent->max.lat = std::max(s.extent->max.lat, e.pos.lat);
        s.extent->max.lon = std::max(s.extent->max.lon, e.pos.lon);
        s.time->tmin = std::min(s.time->tmin, e.ts);
        s.time->tmax = std::max(s.time->tmax, e.ts);
    }
    ++s.events;
}

} // namespace

void EventColumns::append(const Event& e, std::uint32_t driver_code) {
    const auto row = static_cast<std::uint32_t>(ts.size());
    driver.push_back(driver_code);
    ts.push_back(e.ts);
    lat.push_back(e.pos.lat);
    lon.push_back(e.pos.lon);
    alt.push_back(e.alt.value_or(std::nan("")));
    speed.push_back(e.speed);
    bearing.push_back(e.bearing);
    accuracy.push_back(e.accuracy);
    const MultiResPoint cells = precompute(e.pos);
    for (int z = 0; z < kZoomLevels; ++z) {
        cell_i[z].push_back(cells.cells[z].i);
        cell_j[z].push_back(cells.cells[z].j);
    }
    if (e.payload.is_object() && !e.payload.empty()) {
        payload.emplace_back(row, e.payload.dump());
    }
}

MemoryStore::MemoryStore(StoreConfig config) : config_(config) {
    ZoomLevel{config_.partition_zoom}; // validates
}

std::uint32_t MemoryStore::driver_code(const std::string& id) {
    auto [it, inserted] =
        driver_codes_.try_emplace(id, static_cast<std::uint32_t>(drivers_.size()));
    if (inserted) drivers_.push_back(id);
    return it->second;
}

MemoryStore::Partition& MemoryStore::partition_for(const GeoPoint& p) {
    const GridCell key = snap(p, ZoomLevel(config_.partition_zoom));
    auto [it, inserted] = partition_index_.try_emplace(
        pack(key.i, key.j), static_cast<std::uint32_t>(partitions_.size()));
    if (inserted) {
        partitions_.push_back(Partition{key.i, key.j, {}});
    }
    return partitions_[it->second];
}

void MemoryStore::append_unlocked(const Event& e) {
    const std::uint32_t code = driver_code(e.driver_id);
    partition_for(e.pos).cols.append(e, code);
    extend(stats_, e);
    ++rows_;
}

IngestReport MemoryStore::ingest_batch(std::span<const Event> events) {
    IngestReport report;
    std::unique_lock lock(mutex_);
    for (const Event& e : events) {
        if (check_event(e)) {
            ++report.rejected;
            continue;
        }
        if (rows_ >= config_.capacity) {
            report.capacity_exhausted = true;
            break;
        }
        append_unlocked(e);
        ++report.accepted;
    }
    return report;
}

template <typename Fn>
void MemoryStore::for_candidate_partitions(const AggregateQuery& q, Fn&& fn) const {
    const ZoomLevel pz(config_.partition_zoom);
    // A row counted at q.zoom has its raw position within half a query cell of the
    // box, and its partition center within half a partition cell of that position.
    const double margin = separation(q.zoom) / 2.0 + separation(pz) / 2.0;
    IndexRange pi = center_index_range(q.bbox.min.lat - margin, q.bbox.max.lat + margin, pz);
    IndexRange pj = center_index_range(q.bbox.min.lon - margin, q.bbox.max.lon + margin, pz);
    if (pi.empty() || pj.empty()) return;
    --pi.lo, ++pi.hi, --pj.lo, ++pj.hi;

    if (pi.size() * pj.size() <= static_cast<std::int64_t>(partitions_.size())) {
        for (std::int32_t i = pi.lo; i <= pi.hi; ++i) {
            for (std::int32_t j = pj.lo; j <= pj.hi; ++j) {
                if (auto it = partition_index_.find(pack(i, j)); it != partition_index_.end()) {
                    fn(partitions_[it->second]);
                }
            }
        }
    } else {
        for (const Partition& p : partitions_) {
            if (pi.contains(p.key_i) && pj.contains(p.key_j)) fn(p);
        }
    }
}

std::vector<ClusterResult> MemoryStore::aggregate(const AggregateQuery& q,
                                                  const AggregateLimits& limits) const {
    const int z = q.zoom.value();
    const double sep = separation(q.zoom);
    const IndexRange ri = center_index_range(q.bbox.min.lat, q.bbox.max.lat, q.zoom);
    const IndexRange rj = center_index_range(q.bbox.min.lon, q.bbox.max.lon, q.zoom);
    if (ri.empty() || rj.empty()) return {};

    const auto ni = static_cast<std::uint32_t>(ri.hi - ri.lo);
    const auto nj = static_cast<std::uint32_t>(rj.hi - rj.lo);
    const std::size_t max_cells = limits.max_cells.value_or(std::numeric_limits<std::size_t>::max());
    const bool dense = ri.size() * rj.size() <= kDenseCells;

    std::vector<std::uint64_t> dense_counts;
    std::unordered_map<std::uint64_t, std::uint64_t> sparse_counts;
    std::size_t distinct = 0;
    if (dense) dense_counts.assign(static_cast<std::size_t>(ri.size() * rj.size()), 0);

    auto bump = [&](std::int32_t i, std::int32_t j) {
        std::uint64_t* slot;
        if (dense) {
            slot = &dense_counts[static_cast<std::size_t>(i - ri.lo) * (nj + 1) +
                                 static_cast<std::size_t>(j - rj.lo)];
        } else {
            slot = &sparse_counts[pack(i, j)];
        }
        if ((*slot)++ == 0 && ++distinct > max_cells) {
            throw ResultTooLarge(max_cells);
        }
    };

    std::shared_lock lock(mutex_);
    for_candidate_partitions(q, [&](const Partition& part) {
        if (limits.deadline && std::chrono::steady_clock::now() > *limits.deadline) {
            throw QueryTimeout();
        }
        const auto& ci = part.cols.cell_i[z];
        const auto& cj = part.cols.cell_j[z];
        const std::size_t n = ci.size();
        if (q.time) {
            const auto& ts = part.cols.ts;
            for (std::size_t r = 0; r < n; ++r) {
                if (static_cast<std::uint32_t>(ci[r] - ri.lo) <= ni &&
                    static_cast<std::uint32_t>(cj[r] - rj.lo) <= nj && q.time->contains(ts[r])) {
                    bump(ci[r], cj[r]);
                }
            }
        } else {
            for (std::size_t r = 0; r < n; ++r) {
                if (static_cast<std::uint32_t>(ci[r] - ri.lo) <= ni &&
                    static_cast<std::uint32_t>(cj[r] - rj.lo) <= nj) {
                    bump(ci[r], cj[r]);
                }
            }
        }
    });
    lock.unlock();

    std::vector<ClusterResult> out;
    out.reserve(distinct);
    if (dense) {
        for (std::uint32_t a = 0; a <= ni; ++a) {
            for (std::uint32_t b = 0; b <= nj; ++b) {
                if (auto c = dense_counts[static_cast<std::size_t>(a) * (nj + 1) + b]) {
                    out.push_back({{static_cast<double>(ri.lo + static_cast<std::int32_t>(a)) * sep,
                                    static_cast<double>(rj.lo + static_cast<std::int32_t>(b)) * sep},
                                   c});
                }
            }
        }
    } else {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> cells(sparse_counts.begin(),
                                                                    sparse_counts.end());
        std::sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) {
            const auto xi = static_cast<std::int32_t>(x.first >> 32);
            const auto yi = static_cast<std::int32_t>(y.first >> 32);
            if (xi != yi) return xi < yi;
            return static_cast<std::int32_t>(x.first) < static_cast<std::int32_t>(y.first);
        });
        for (const auto& [key, c] : cells) {
            out.push_back({{static_cast<double>(static_cast<std::int32_t>(key >> 32)) * sep,
                            static_cast<double>(static_cast<std::int32_t>(key)) * sep},
                           c});
        }
    }
    return out;
}

std::uint64_t MemoryStore::scan_count(const BoundingBox& bbox,
                                      const std::optional<TimeRange>& time) const {
    std::uint64_t n = 0;
    std::shared_lock lock(mutex_);
    for (const Partition& part : partitions_) {
        const auto& c = part.cols;
        for (std::size_t r = 0; r < c.size(); ++r) {
            if (bbox.contains({c.lat[r], c.lon[r]}) && (!time || time->contains(c.ts[r]))) ++n;
        }
    }
    return n;
}

StoreStats MemoryStore::stats() const {
    std::shared_lock lock(mutex_);
    return stats_;
}

std::uint64_t MemoryStore::size() const {
    std::shared_lock lock(mutex_);
    return rows_;
}

std::size_t MemoryStore::partition_count() const {
    std::shared_lock lock(mutex_);
    return partitions_.size();
}

void MemoryStore::for_each_event(const std::function<void(const Event&)>& fn) const {
    std::shared_lock lock(mutex_);
    for (const Partition& part : partitions_) {
        const auto& c = part.cols;
        auto payload = c.payload.begin();
        for (std::size_t r = 0; r < c.size(); ++r) {
            Event e;
            e.driver_id = drivers_[c.driver[r]];
            e.pos = {c.lat[r], c.lon[r]};
            if (!std::isnan(c.alt[r])) e.alt = c.alt[r];
            e.ts = c.ts[r];
            e.speed = c.speed[r];
            e.bearing = c.bearing[r];
            e.accuracy = c.accuracy[r];
            if (payload != c.payload.end() && payload->first == r) {
                e.payload = nlohmann::json::parse(payload->second);
                ++payload;
            }
            fn(e);
        }
    }
}

} // namespace gridagg
