#pragma once

#include "evsup/event_core.hpp"
#include "evsup/types.hpp"

#include <cstdint>
#include <vector>

namespace evsup {

// Dense per-pixel displacement in pixels, valid over dur_ref_us. Velocity in
// px/us is u / dur_ref; storing displacement keeps file formats and mask
// warping in one unit.
struct FlowField {
  ImageR u;
  ImageR v;
  std::int64_t dur_ref_us = 0;

  int height() const { return static_cast<int>(u.rows()); }
  int width() const { return static_cast<int>(u.cols()); }

  static FlowField zero(int height, int width, std::int64_t dur_ref_us);
  static FlowField constant(int height, int width, Real du, Real dv, std::int64_t dur_ref_us);
};

// Transported event location; every point carries unit weight.
struct TransportedPoint {
  Real x = 0;
  Real y = 0;
};

// Image of Warped Events: non-negative accumulation of unit splats.
struct IWE {
  ImageR intensity;

  int height() const { return static_cast<int>(intensity.rows()); }
  int width() const { return static_cast<int>(intensity.cols()); }
  Real mass() const { return intensity.sum(); }
};

// Piecewise-constant flow parametrization for the optimizer: one (u, v)
// displacement per tile, remainder tiles at the right/bottom edges.
struct TileFlowParams {
  int tile = 0;
  int rows = 0;
  int cols = 0;
  int height = 0;
  int width = 0;
  ImageR u;  // rows x cols
  ImageR v;
  std::int64_t dur_ref_us = 0;

  static TileFlowParams zero(int height, int width, int tile, std::int64_t dur_ref_us);

  int tile_row(int y) const { return y / tile; }
  int tile_col(int x) const { return x / tile; }

  // Nearest (piecewise-constant) materialization to a dense field.
  FlowField to_dense() const;
};

// x' = x + ((t_ref - t) / dur_ref) * u(x, y), flow sampled at the event's
// original pixel. Polarity is ignored.
std::vector<TransportedPoint> transport_events(const EventStream& stream, const FlowField& flow,
                                               std::int64_t t_ref);
std::vector<TransportedPoint> transport_events(const EventStream& stream,
                                               const TileFlowParams& flow, std::int64_t t_ref);

// Bilinear splat of unit weights; taps outside the image are dropped.
IWE build_iwe(const std::vector<TransportedPoint>& points, int height, int width);

// Population variance of the pixel intensities over all H*W pixels.
Real variance_focus(const IWE& iwe);

// Sharpness value to MAXIMIZE; the unsupervised loss is its negation.
Real contrast_objective(const EventStream& stream, const TileFlowParams& flow,
                        std::int64_t t_ref);

struct TileGradient {
  ImageR du;  // rows x cols
  ImageR dv;
};

// Exact gradient of contrast_objective w.r.t. each tile's displacement,
// through the piecewise-linear bilinear splat.
TileGradient contrast_gradient(const EventStream& stream, const TileFlowParams& flow,
                               std::int64_t t_ref);

struct CmaxConfig {
  Real grid_range = 16.0;  // coarse search over [-range, range] per axis
  Real grid_step = 1.0;
  int ascent_iters = 50;
  Real step_px = 0.05;  // normalized-gradient step, halved when not improving
  // Window override; when t0 >= t1 the window is taken from the event extent.
  std::int64_t window_t0 = 0;
  std::int64_t window_t1 = 0;
};

// Per-tile coarse grid search followed by gradient-ascent refinement. Each
// tile is optimized independently on its own events (no cross-tile coupling);
// the reference time is the window start and dur_ref is the window length.
FlowField estimate_flow_cmax(const EventStream& stream, int tile_px, const CmaxConfig& config = {});

}  // namespace evsup
