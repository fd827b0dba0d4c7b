#pragma once

#include "evsup/event_core.hpp"
#include "evsup/flow_cmax.hpp"
#include "evsup/suppression.hpp"
#include "evsup/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace evsup {

// An independently moving object: axis-aligned square or disk, position is
// the shape center in pixels, velocity in px/s.
struct ImoConfig {
  enum class Shape { rectangle, disk };
  Shape shape = Shape::rectangle;
  Real size_px = 24;  // edge length / diameter
  Real x0 = 32;
  Real y0 = 32;
  Real vx = 0;
  Real vy = 0;
};

// Rectangle used to keep background edges away from a region (their whole
// trajectory stays outside); lets tests build scenes where IMO and background
// events never share pixels.
struct KeepoutBox {
  Real x0 = 0, x1 = 0, y0 = 0, y1 = 0;
};

struct SceneConfig {
  int width = 96;
  int height = 96;
  std::int64_t duration_us = 400000;
  Real cam_vx = 0;  // px/s image motion induced by the camera
  Real cam_vy = 0;
  Real edge_density = 2.0;  // background edges per 100 px, per orientation
  std::vector<ImoConfig> imos;
  std::int64_t cadence_us = 100000;  // must divide duration
  std::int64_t micro_step_us = 1000;
  std::uint64_t seed = 7;
  std::optional<KeepoutBox> bg_keepout;
  // Adds one vertical edge at x = 10 moving at cam_vx, regardless of density.
  bool single_edge = false;

  // Scene behind the end-to-end anticipation pipeline: textured background
  // under moderate camera motion plus one fast square IMO.
  static SceneConfig default_scene();
  // Single vertical background edge sweeping (8, 0) px per 50 ms window.
  static SceneConfig single_edge_scene();
};

struct LabeledStream {
  SceneConfig config;
  EventStream stream;
  std::vector<std::uint8_t> labels;       // 1 = emitted by an IMO boundary
  std::vector<std::int64_t> gt_times_us;  // 0, cadence, ..., duration
  std::vector<IMOMask> gt_masks;          // analytic occupancy at gt_times
  std::vector<FlowField> gt_flows;        // displacement per cadence interval
  bool imo_left_frame = false;
};

// Deterministic edge-crossing simulation: an event fires at a pixel whenever
// a background edge or an IMO boundary sweeps across it during a micro-step;
// timestamps carry a seeded jitter inside the step, background pixels hidden
// behind an IMO at emission time are occluded.
LabeledStream generate(const SceneConfig& config);

// Analytic IMO occupancy at time t (from the config, not from events).
IMOMask gt_future_mask(const LabeledStream& ls, std::int64_t t_us);

// Pixels an IMO covers at any instant of [t0, t1]; the per-window mask under
// which IMO events are exactly recoverable.
IMOMask gt_swept_mask(const LabeledStream& ls, std::int64_t t0_us, std::int64_t t1_us);

}  // namespace evsup
