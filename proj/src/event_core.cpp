#include "evsup/event_core.hpp"

#include <algorithm>

namespace evsup {

void validate(const EventStream& stream) {
  require(stream.width > 0 && stream.height > 0, "event stream: geometry must be positive");
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  for (const Event& e : stream.events) {
    require(e.x < stream.width && e.y < stream.height, "event stream: event outside geometry");
    require(e.p == 1 || e.p == -1, "event stream: polarity must be -1 or +1");
    require(e.t >= prev, "event stream: events must be sorted by timestamp");
    prev = e.t;
  }
}

namespace {

// First event with t >= key.
auto lower_by_time(const std::vector<Event>& events, std::int64_t key) {
  return std::lower_bound(events.begin(), events.end(), key,
                          [](const Event& e, std::int64_t v) { return e.t < v; });
}

}  // namespace

EventStream slice_by_time(const EventStream& stream, std::int64_t t0, std::int64_t t1) {
  require(t0 < t1, "slice_by_time: interval must satisfy t0 < t1");
  EventStream out;
  out.width = stream.width;
  out.height = stream.height;
  out.events.assign(lower_by_time(stream.events, t0), lower_by_time(stream.events, t1));
  return out;
}

EventStream slice_by_budget(const EventStream& stream, std::int64_t t_ref, std::size_t n) {
  EventStream out;
  out.width = stream.width;
  out.height = stream.height;
  auto end = lower_by_time(stream.events, t_ref);
  const std::size_t available = static_cast<std::size_t>(end - stream.events.begin());
  out.events.assign(end - static_cast<std::ptrdiff_t>(std::min(n, available)), end);
  return out;
}

Real VoxelGrid::signed_mass() const {
  Real total = 0;
  for (const ImageR& plane : data) total += plane.sum();
  return total;
}

Real VoxelGrid::abs_mass() const {
  Real total = 0;
  for (const ImageR& plane : data) total += plane.abs().sum();
  return total;
}

VoxelGrid encode_voxel(const EventStream& stream, int bins, std::int64_t t0, std::int64_t t1) {
  require(t0 < t1, "encode_voxel: interval must satisfy t0 < t1");
  require(bins >= 1, "encode_voxel: bins must be >= 1");
  VoxelGrid grid;
  grid.bins = bins;
  grid.height = stream.height;
  grid.width = stream.width;
  grid.t0 = t0;
  grid.t1 = t1;
  grid.data.assign(static_cast<std::size_t>(bins), ImageR::Zero(stream.height, stream.width));
  const std::int64_t span = t1 - t0;
  for (const Event& e : stream.events) {
    if (e.t < t0 || e.t >= t1) continue;
    // Integer floor; the last bin is closed so t just below t1 still lands.
    auto bin = static_cast<std::int64_t>((e.t - t0) * bins / span);
    bin = std::min<std::int64_t>(bin, bins - 1);
    grid.data[static_cast<std::size_t>(bin)](e.y, e.x) += static_cast<Real>(e.p);
  }
  return grid;
}

}  // namespace evsup
