#include "evsup/flow_cmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evsup {

FlowField FlowField::zero(int height, int width, std::int64_t dur_ref_us) {
  FlowField f;
  f.u = ImageR::Zero(height, width);
  f.v = ImageR::Zero(height, width);
  f.dur_ref_us = dur_ref_us;
  return f;
}

FlowField FlowField::constant(int height, int width, Real du, Real dv, std::int64_t dur_ref_us) {
  FlowField f;
  f.u = ImageR::Constant(height, width, du);
  f.v = ImageR::Constant(height, width, dv);
  f.dur_ref_us = dur_ref_us;
  return f;
}

TileFlowParams TileFlowParams::zero(int height, int width, int tile, std::int64_t dur_ref_us) {
  require(height > 0 && width > 0, "tile flow: geometry must be positive");
  require(tile >= 1, "tile flow: tile size must be >= 1");
  TileFlowParams p;
  p.tile = tile;
  p.height = height;
  p.width = width;
  p.rows = (height + tile - 1) / tile;
  p.cols = (width + tile - 1) / tile;
  p.u = ImageR::Zero(p.rows, p.cols);
  p.v = ImageR::Zero(p.rows, p.cols);
  p.dur_ref_us = dur_ref_us;
  return p;
}

FlowField TileFlowParams::to_dense() const {
  FlowField f = FlowField::zero(height, width, dur_ref_us);
  for (int y = 0; y < height; ++y) {
    const int tr = tile_row(y);
    for (int x = 0; x < width; ++x) {
      const int tc = tile_col(x);
      f.u(y, x) = u(tr, tc);
      f.v(y, x) = v(tr, tc);
    }
  }
  return f;
}

std::vector<TransportedPoint> transport_events(const EventStream& stream, const FlowField& flow,
                                               std::int64_t t_ref) {
  require(flow.height() == stream.height && flow.width() == stream.width,
          "transport_events: flow geometry must equal stream geometry");
  require(flow.dur_ref_us > 0, "transport_events: flow reference duration must be positive");
  std::vector<TransportedPoint> out;
  out.reserve(stream.events.size());
  const Real dur = static_cast<Real>(flow.dur_ref_us);
  for (const Event& e : stream.events) {
    const Real s = static_cast<Real>(t_ref - e.t) / dur;
    out.push_back({e.x + s * flow.u(e.y, e.x), e.y + s * flow.v(e.y, e.x)});
  }
  return out;
}

std::vector<TransportedPoint> transport_events(const EventStream& stream,
                                               const TileFlowParams& flow, std::int64_t t_ref) {
  require(flow.height == stream.height && flow.width == stream.width,
          "transport_events: tile flow geometry must equal stream geometry");
  require(flow.dur_ref_us > 0, "transport_events: flow reference duration must be positive");
  std::vector<TransportedPoint> out;
  out.reserve(stream.events.size());
  const Real dur = static_cast<Real>(flow.dur_ref_us);
  for (const Event& e : stream.events) {
    const Real s = static_cast<Real>(t_ref - e.t) / dur;
    const int tr = flow.tile_row(e.y);
    const int tc = flow.tile_col(e.x);
    out.push_back({e.x + s * flow.u(tr, tc), e.y + s * flow.v(tr, tc)});
  }
  return out;
}

IWE build_iwe(const std::vector<TransportedPoint>& points, int height, int width) {
  require(height > 0 && width > 0, "build_iwe: geometry must be positive");
  IWE iwe;
  iwe.intensity = ImageR::Zero(height, width);
  for (const TransportedPoint& p : points) {
    const Real fx0 = std::floor(p.x);
    const Real fy0 = std::floor(p.y);
    const auto x0 = static_cast<std::int64_t>(fx0);
    const auto y0 = static_cast<std::int64_t>(fy0);
    const Real ax = p.x - fx0;
    const Real ay = p.y - fy0;
    const Real w00 = (1 - ax) * (1 - ay);
    const Real w10 = ax * (1 - ay);
    const Real w01 = (1 - ax) * ay;
    const Real w11 = ax * ay;
    auto splat = [&](std::int64_t tx, std::int64_t ty, Real w) {
      if (tx >= 0 && tx < width && ty >= 0 && ty < height) iwe.intensity(ty, tx) += w;
    };
    splat(x0, y0, w00);
    splat(x0 + 1, y0, w10);
    splat(x0, y0 + 1, w01);
    splat(x0 + 1, y0 + 1, w11);
  }
  return iwe;
}

Real variance_focus(const IWE& iwe) {
  const Real pixels = static_cast<Real>(iwe.intensity.size());
  if (pixels == 0) return 0;
  const Real m1 = iwe.intensity.sum() / pixels;
  const Real m2 = iwe.intensity.square().sum() / pixels;
  return m2 - m1 * m1;
}

Real contrast_objective(const EventStream& stream, const TileFlowParams& flow,
                        std::int64_t t_ref) {
  return variance_focus(build_iwe(transport_events(stream, flow, t_ref), flow.height, flow.width));
}

TileGradient contrast_gradient(const EventStream& stream, const TileFlowParams& flow,
                               std::int64_t t_ref) {
  const auto points = transport_events(stream, flow, t_ref);
  const IWE iwe = build_iwe(points, flow.height, flow.width);
  const Real pixels = static_cast<Real>(iwe.intensity.size());
  const Real mean = iwe.intensity.sum() / pixels;
  TileGradient grad;
  grad.du = ImageR::Zero(flow.rows, flow.cols);
  grad.dv = ImageR::Zero(flow.rows, flow.cols);
  const Real dur = static_cast<Real>(flow.dur_ref_us);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Event& e = stream.events[i];
    const TransportedPoint& p = points[i];
    const Real s = static_cast<Real>(t_ref - e.t) / dur;
    const Real fx0 = std::floor(p.x);
    const Real fy0 = std::floor(p.y);
    const auto x0 = static_cast<std::int64_t>(fx0);
    const auto y0 = static_cast<std::int64_t>(fy0);
    const Real ax = p.x - fx0;
    const Real ay = p.y - fy0;
    // d(weight)/d(x'), d(weight)/d(y') for the four taps; out-of-image taps
    // never entered the IWE, so they contribute nothing here either.
    Real gx = 0;
    Real gy = 0;
    auto accum = [&](std::int64_t tx, std::int64_t ty, Real dwdx, Real dwdy) {
      if (tx >= 0 && tx < flow.width && ty >= 0 && ty < flow.height) {
        const Real centered = iwe.intensity(ty, tx) - mean;
        gx += centered * dwdx;
        gy += centered * dwdy;
      }
    };
    accum(x0, y0, -(1 - ay), -(1 - ax));
    accum(x0 + 1, y0, (1 - ay), -ax);
    accum(x0, y0 + 1, -ay, (1 - ax));
    accum(x0 + 1, y0 + 1, ay, ax);
    const int tr = flow.tile_row(e.y);
    const int tc = flow.tile_col(e.x);
    grad.du(tr, tc) += (2 / pixels) * gx * s;
    grad.dv(tr, tc) += (2 / pixels) * gy * s;
  }
  return grad;
}

namespace {

struct TileEstimate {
  Real u = 0;
  Real v = 0;
};

TileEstimate optimize_single_tile(const EventStream& sub, std::int64_t t0, std::int64_t dur,
                                  const CmaxConfig& config) {
  // One tile spanning the whole image turns the public objective into this
  // tile's own subproblem.
  TileFlowParams one =
      TileFlowParams::zero(sub.height, sub.width, std::max(sub.height, sub.width), dur);
  const int steps = std::max(0, static_cast<int>(std::llround(2 * config.grid_range / config.grid_step)));
  std::vector<Real> values(static_cast<std::size_t>(steps + 1) * (steps + 1));
  Real best = -std::numeric_limits<Real>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const Real du = -config.grid_range + i * config.grid_step;
    for (int j = 0; j <= steps; ++j) {
      const Real dv = -config.grid_range + j * config.grid_step;
      one.u(0, 0) = du;
      one.v(0, 0) = dv;
      const Real val = contrast_objective(sub, one, t0);
      values[static_cast<std::size_t>(i) * (steps + 1) + j] = val;
      best = std::max(best, val);
    }
  }
  // Under-constrained tiles (a single straight edge, one crossing) leave the
  // objective flat along some direction; prefer the smallest displacement
  // among near-ties instead of whatever the scan hit first.
  const Real tie_tol = std::max(std::abs(best) * 1e-3, Real(1e-12));
  Real best_u = 0;
  Real best_v = 0;
  Real cur = -std::numeric_limits<Real>::infinity();
  Real best_norm = std::numeric_limits<Real>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const Real du = -config.grid_range + i * config.grid_step;
    for (int j = 0; j <= steps; ++j) {
      const Real dv = -config.grid_range + j * config.grid_step;
      const Real val = values[static_cast<std::size_t>(i) * (steps + 1) + j];
      if (val < best - tie_tol) continue;
      const Real norm = du * du + dv * dv;
      if (norm < best_norm) {
        best_norm = norm;
        best_u = du;
        best_v = dv;
        cur = val;
      }
    }
  }
  Real cur_u = best_u;
  Real cur_v = best_v;
  Real step = config.step_px;
  for (int it = 0; it < config.ascent_iters && step >= 1e-4; ++it) {
    one.u(0, 0) = cur_u;
    one.v(0, 0) = cur_v;
    const TileGradient g = contrast_gradient(sub, one, t0);
    const Real norm = std::hypot(g.du(0, 0), g.dv(0, 0));
    if (norm == 0) break;
    const Real cand_u = cur_u + step * g.du(0, 0) / norm;
    const Real cand_v = cur_v + step * g.dv(0, 0) / norm;
    one.u(0, 0) = cand_u;
    one.v(0, 0) = cand_v;
    const Real val = contrast_objective(sub, one, t0);
    if (val > cur) {
      cur_u = cand_u;
      cur_v = cand_v;
      cur = val;
    } else {
      step *= 0.5;
    }
  }
  return {cur_u, cur_v};
}

}  // namespace

FlowField estimate_flow_cmax(const EventStream& stream, int tile_px, const CmaxConfig& config) {
  require(!stream.empty(), "estimate_flow_cmax: stream must be non-empty");
  std::int64_t t0 = config.window_t0;
  std::int64_t t1 = config.window_t1;
  if (t0 >= t1) {
    t0 = stream.events.front().t;
    t1 = stream.events.back().t + 1;
  }
  const std::int64_t dur = std::max<std::int64_t>(t1 - t0, 1);
  TileFlowParams params = TileFlowParams::zero(stream.height, stream.width, tile_px, dur);
  std::vector<std::vector<Event>> per_tile(static_cast<std::size_t>(params.rows) * params.cols);
  for (const Event& e : stream.events)
    per_tile[static_cast<std::size_t>(params.tile_row(e.y)) * params.cols + params.tile_col(e.x)]
        .push_back(e);
  for (int tr = 0; tr < params.rows; ++tr) {
    for (int tc = 0; tc < params.cols; ++tc) {
      auto& bucket = per_tile[static_cast<std::size_t>(tr) * params.cols + tc];
      if (bucket.empty()) continue;  // tile flow stays (0, 0)
      EventStream sub;
      sub.width = stream.width;
      sub.height = stream.height;
      sub.events = std::move(bucket);
      const TileEstimate est = optimize_single_tile(sub, t0, dur, config);
      params.u(tr, tc) = est.u;
      params.v(tr, tc) = est.v;
    }
  }
  return params.to_dense();
}

}  // namespace evsup
