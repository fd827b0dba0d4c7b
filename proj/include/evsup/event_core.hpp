#pragma once

#include "evsup/types.hpp"

#include <cstdint>
#include <vector>

namespace evsup {

// A single brightness-change event. Timestamps are integer microseconds,
// polarity is exactly -1 or +1.
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int64_t t = 0;
  std::int8_t p = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

// Events sorted non-decreasing by timestamp, with sensor geometry.
// Operations treat streams as immutable values.
struct EventStream {
  int width = 0;
  int height = 0;
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

// Throws std::invalid_argument if geometry, ordering, bounds, or polarity
// invariants are violated. File loaders and the synth generator call this;
// slicing operations assume it already holds.
void validate(const EventStream& stream);

// Events with t0 <= t < t1, order preserved, geometry copied.
EventStream slice_by_time(const EventStream& stream, std::int64_t t0, std::int64_t t1);

// The min(n, available) events with the largest timestamps strictly before
// t_ref, in temporal order.
EventStream slice_by_budget(const EventStream& stream, std::int64_t t_ref, std::size_t n);

// B x H x W signed accumulation of events over the half-open window [t0, t1).
struct VoxelGrid {
  int bins = 0;
  int height = 0;
  int width = 0;
  std::vector<ImageR> data;  // bins planes of H x W
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;

  Real signed_mass() const;
  Real abs_mass() const;
};

// Each event adds its polarity to cell (bin, y, x) with
// bin = min(floor(B * (t - t0) / (t1 - t0)), B - 1). Events outside [t0, t1)
// are ignored.
VoxelGrid encode_voxel(const EventStream& stream, int bins, std::int64_t t0, std::int64_t t1);

}  // namespace evsup
