#include "evsup/synth.hpp"

#include <algorithm>
#include <cmath>

namespace evsup {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Real hash01(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  std::uint64_t h = mix64(a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return static_cast<Real>(h >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t kBgSalt = 0x6267656447656eull;   // background lane
constexpr std::uint64_t kImoSalt = 0x696d6f4C616e65ull;  // imo lane

struct BgEdge {
  bool vertical = true;  // vertical edges respond to cam_vx, horizontal to cam_vy
  Real pos = 0;          // unwrapped start position, px
  Real vel = 0;          // px/s
  std::int8_t sign = 1;
  int id = 0;
};

bool occupied(const ImoConfig& imo, Real t_us, Real px, Real py) {
  const Real t = t_us * 1e-6;
  const Real cx = imo.x0 + imo.vx * t;
  const Real cy = imo.y0 + imo.vy * t;
  const Real half = imo.size_px / 2;
  if (imo.shape == ImoConfig::Shape::rectangle)
    return std::abs(px - cx) <= half && std::abs(py - cy) <= half;
  const Real dx = px - cx;
  const Real dy = py - cy;
  return dx * dx + dy * dy <= half * half;
}

bool occupied_any(const std::vector<ImoConfig>& imos, Real t_us, Real px, Real py) {
  for (const ImoConfig& imo : imos)
    if (occupied(imo, t_us, px, py)) return true;
  return false;
}

// Does the arc [lo, hi] (unwrapped, taken mod extent) intersect [b0, b1]?
bool trajectory_hits(Real lo, Real hi, Real extent, Real b0, Real b1) {
  if (hi - lo >= extent) return true;
  Real a0 = std::fmod(lo, extent);
  if (a0 < 0) a0 += extent;
  const Real len = hi - lo;
  if (a0 + len <= extent) return a0 <= b1 && a0 + len >= b0;
  return b1 >= a0 || a0 + len - extent >= b0;  // wraps around
}

struct RawEvent {
  Event event;
  std::uint8_t label = 0;
};

void emit_background(const SceneConfig& cfg, const std::vector<BgEdge>& edges,
                     std::vector<RawEvent>& out) {
  const Real t_total_sec = static_cast<Real>(cfg.duration_us) * 1e-6;
  for (const BgEdge& edge : edges) {
    if (edge.vel == 0) continue;
    const int extent = edge.vertical ? cfg.width : cfg.height;
    const int span = edge.vertical ? cfg.height : cfg.width;
    const Real p0 = edge.pos;
    const Real p1 = edge.pos + edge.vel * t_total_sec;
    const auto c_lo = static_cast<std::int64_t>(std::ceil(std::min(p0, p1)));
    const auto c_hi = static_cast<std::int64_t>(std::floor(std::max(p0, p1)));
    for (std::int64_t c = c_lo; c <= c_hi; ++c) {
      const Real tc_us = (static_cast<Real>(c) - p0) / edge.vel * 1e6;
      const auto tc = static_cast<std::int64_t>(std::llround(tc_us));
      if (tc < 0 || tc >= cfg.duration_us) continue;
      const int line = static_cast<int>(((c % extent) + extent) % extent);
      const std::int64_t step = tc / cfg.micro_step_us;
      const std::int64_t step_lo = step * cfg.micro_step_us;
      const std::int64_t step_hi = std::min(step_lo + cfg.micro_step_us, cfg.duration_us);
      for (int s = 0; s < span; ++s) {
        const int x = edge.vertical ? line : s;
        const int y = edge.vertical ? s : line;
        const Real jitter =
            (hash01(cfg.seed ^ kBgSalt, static_cast<std::uint64_t>(edge.id),
                    static_cast<std::uint64_t>(c - c_lo), static_cast<std::uint64_t>(s)) -
             0.5) *
            0.98 * static_cast<Real>(cfg.micro_step_us);
        const std::int64_t t = std::clamp(tc + static_cast<std::int64_t>(std::llround(jitter)),
                                          step_lo, step_hi - 1);
        if (occupied_any(cfg.imos, static_cast<Real>(t), x, y)) continue;  // occluded
        out.push_back({{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t,
                        edge.sign},
                       0});
      }
    }
  }
}

void emit_imos(const SceneConfig& cfg, std::vector<RawEvent>& out) {
  for (std::size_t idx = 0; idx < cfg.imos.size(); ++idx) {
    const ImoConfig& imo = cfg.imos[idx];
    for (std::int64_t step_lo = 0; step_lo < cfg.duration_us; step_lo += cfg.micro_step_us) {
      const std::int64_t step_hi = std::min(step_lo + cfg.micro_step_us, cfg.duration_us);
      const Real ta = static_cast<Real>(step_lo);
      const Real tb = static_cast<Real>(step_hi);
      // pixels the boundary can touch this step
      const Real half = imo.size_px / 2 + 1;
      const Real cxa = imo.x0 + imo.vx * ta * 1e-6;
      const Real cya = imo.y0 + imo.vy * ta * 1e-6;
      const Real cxb = imo.x0 + imo.vx * tb * 1e-6;
      const Real cyb = imo.y0 + imo.vy * tb * 1e-6;
      const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(cxa, cxb) - half)));
      const int x_hi = std::min(cfg.width - 1, static_cast<int>(std::ceil(std::max(cxa, cxb) + half)));
      const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(cya, cyb) - half)));
      const int y_hi = std::min(cfg.height - 1, static_cast<int>(std::ceil(std::max(cya, cyb) + half)));
      for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
          const bool oa = occupied(imo, ta, x, y);
          const bool ob = occupied(imo, tb, x, y);
          if (oa == ob) continue;
          Real lo = ta;
          Real hi = tb;
          for (int it = 0; it < 40; ++it) {
            const Real mid = (lo + hi) / 2;
            (occupied(imo, mid, x, y) == oa ? lo : hi) = mid;
          }
          const Real jitter = (hash01(cfg.seed ^ kImoSalt, idx,
                                      static_cast<std::uint64_t>(y) * cfg.width + x,
                                      static_cast<std::uint64_t>(step_lo)) -
                               0.5) *
                              0.5 * static_cast<Real>(cfg.micro_step_us);
          const std::int64_t t =
              std::clamp(static_cast<std::int64_t>(std::llround(hi + jitter)), step_lo,
                         step_hi - 1);
          out.push_back({{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t,
                          static_cast<std::int8_t>(ob ? 1 : -1)},
                         1});
        }
      }
    }
  }
}

IMOMask occupancy_mask(const SceneConfig& cfg, Real t_us) {
  IMOMask mask = IMOMask::zeros(cfg.height, cfg.width);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x)
      if (occupied_any(cfg.imos, t_us, x, y)) mask.values(y, x) = 1;
  return mask;
}

// sigma-interval [0,1] where |p - (c0 + sigma*d)| <= half stays satisfiable
bool axis_interval(Real p, Real c0, Real d, Real half, Real& s0, Real& s1) {
  if (std::abs(d) < 1e-12) {
    if (std::abs(p - c0) > half) return false;
    s0 = 0;
    s1 = 1;
    return true;
  }
  Real a = (p - c0 - half) / d;
  Real b = (p - c0 + half) / d;
  if (a > b) std::swap(a, b);
  s0 = std::max(a, Real(0));
  s1 = std::min(b, Real(1));
  return s0 <= s1;
}

Real point_segment_dist2(Real px, Real py, Real ax, Real ay, Real bx, Real by) {
  const Real dx = bx - ax;
  const Real dy = by - ay;
  const Real len2 = dx * dx + dy * dy;
  Real s = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0;
  s = std::clamp(s, Real(0), Real(1));
  const Real ex = px - (ax + s * dx);
  const Real ey = py - (ay + s * dy);
  return ex * ex + ey * ey;
}

bool swept_occupied(const ImoConfig& imo, Real t0_us, Real t1_us, Real px, Real py) {
  const Real cx0 = imo.x0 + imo.vx * t0_us * 1e-6;
  const Real cy0 = imo.y0 + imo.vy * t0_us * 1e-6;
  const Real cx1 = imo.x0 + imo.vx * t1_us * 1e-6;
  const Real cy1 = imo.y0 + imo.vy * t1_us * 1e-6;
  const Real half = imo.size_px / 2;
  if (imo.shape == ImoConfig::Shape::disk)
    return point_segment_dist2(px, py, cx0, cy0, cx1, cy1) <= half * half;
  Real sx0, sx1, sy0, sy1;
  if (!axis_interval(px, cx0, cx1 - cx0, half, sx0, sx1)) return false;
  if (!axis_interval(py, cy0, cy1 - cy0, half, sy0, sy1)) return false;
  return std::max(sx0, sy0) <= std::min(sx1, sy1);
}

}  // namespace

SceneConfig SceneConfig::default_scene() {
  SceneConfig cfg;
  cfg.width = 128;
  cfg.height = 128;
  cfg.duration_us = 400000;
  cfg.cam_vx = 20;
  cfg.cam_vy = 10;
  cfg.edge_density = 2.5;
  cfg.cadence_us = 100000;
  cfg.seed = 7;
  ImoConfig imo;
  imo.shape = ImoConfig::Shape::rectangle;
  imo.size_px = 36;
  imo.x0 = 22;
  imo.y0 = 26;
  imo.vx = 40;
  imo.vy = 20;
  cfg.imos.push_back(imo);
  return cfg;
}

SceneConfig SceneConfig::single_edge_scene() {
  SceneConfig cfg;
  cfg.width = 64;
  cfg.height = 64;
  cfg.duration_us = 100000;
  cfg.cam_vx = 160;  // (8, 0) px per 50 ms window
  cfg.cam_vy = 0;
  cfg.edge_density = 0;  // the one edge is added explicitly in generate()
  cfg.cadence_us = 100000;
  cfg.seed = 11;
  cfg.single_edge = true;
  return cfg;
}

LabeledStream generate(const SceneConfig& cfg) {
  require(cfg.width > 0 && cfg.height > 0, "synth: geometry must be positive");
  require(cfg.duration_us > 0, "synth: duration must be positive");
  require(cfg.cadence_us > 0 && cfg.duration_us % cfg.cadence_us == 0,
          "synth: cadence must divide duration");
  require(cfg.micro_step_us > 0, "synth: micro step must be positive");

  LabeledStream ls;
  ls.config = cfg;

  // Background edges, seeded positions; keepout-filtered when requested.
  std::vector<BgEdge> edges;
  std::uint64_t state = cfg.seed;
  auto next01 = [&state] { return static_cast<Real>(mix64(state = mix64(state)) >> 11) * 0x1.0p-53; };
  const Real t_total_sec = static_cast<Real>(cfg.duration_us) * 1e-6;
  const int n_v = static_cast<int>(std::lround(cfg.edge_density * cfg.width / 100));
  const int n_h = static_cast<int>(std::lround(cfg.edge_density * cfg.height / 100));
  int edge_id = 0;
  auto add_edges = [&](bool vertical, int count, Real vel, int extent) {
    for (int i = 0; i < count; ++i) {
      BgEdge e;
      e.vertical = vertical;
      e.vel = vel;
      e.sign = i % 2 == 0 ? 1 : -1;
      e.id = edge_id++;
      bool placed = false;
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        e.pos = next01() * extent;
        if (!cfg.bg_keepout) {
          placed = true;
          break;
        }
        const Real lo = std::min(e.pos, e.pos + vel * t_total_sec);
        const Real hi = std::max(e.pos, e.pos + vel * t_total_sec);
        const Real b0 = vertical ? cfg.bg_keepout->x0 : cfg.bg_keepout->y0;
        const Real b1 = vertical ? cfg.bg_keepout->x1 : cfg.bg_keepout->y1;
        placed = !trajectory_hits(lo, hi, extent, b0, b1);
      }
      if (placed) edges.push_back(e);
    }
  };
  add_edges(true, n_v, cfg.cam_vx, cfg.width);
  add_edges(false, n_h, cfg.cam_vy, cfg.height);
  if (cfg.single_edge) {
    BgEdge e;
    e.vertical = true;
    e.pos = 10;
    e.vel = cfg.cam_vx;
    e.sign = 1;
    e.id = edge_id++;
    edges.push_back(e);
  }

  std::vector<RawEvent> raw;
  emit_background(cfg, edges, raw);
  emit_imos(cfg, raw);

  std::vector<std::size_t> order(raw.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&raw](std::size_t a, std::size_t b) { return raw[a].event.t < raw[b].event.t; });

  ls.stream.width = cfg.width;
  ls.stream.height = cfg.height;
  ls.stream.events.reserve(raw.size());
  ls.labels.reserve(raw.size());
  for (const std::size_t i : order) {
    ls.stream.events.push_back(raw[i].event);
    ls.labels.push_back(raw[i].label);
  }
  validate(ls.stream);

  // Ground truth at the cadence timestamps.
  const Real cad_sec = static_cast<Real>(cfg.cadence_us) * 1e-6;
  for (std::int64_t t = 0; t <= cfg.duration_us; t += cfg.cadence_us) {
    ls.gt_times_us.push_back(t);
    ls.gt_masks.push_back(occupancy_mask(cfg, static_cast<Real>(t)));
  }
  for (std::size_t k = 0; k + 1 < ls.gt_times_us.size(); ++k) {
    FlowField flow = FlowField::constant(cfg.height, cfg.width, cfg.cam_vx * cad_sec,
                                         cfg.cam_vy * cad_sec, cfg.cadence_us);
    const Real t = static_cast<Real>(ls.gt_times_us[k]);
    for (int y = 0; y < cfg.height; ++y) {
      for (int x = 0; x < cfg.width; ++x) {
        for (const ImoConfig& imo : cfg.imos) {
          if (occupied(imo, t, x, y)) {
            flow.u(y, x) = imo.vx * cad_sec;
            flow.v(y, x) = imo.vy * cad_sec;
            break;
          }
        }
      }
    }
    ls.gt_flows.push_back(std::move(flow));
  }

  for (std::size_t k = 0; k < ls.gt_masks.size(); ++k) {
    if (!cfg.imos.empty() && ls.gt_masks[k].count() == 0) {
      ls.imo_left_frame = true;  // warning, not an error
      break;
    }
  }
  return ls;
}

IMOMask gt_future_mask(const LabeledStream& ls, std::int64_t t_us) {
  return occupancy_mask(ls.config, static_cast<Real>(t_us));
}

IMOMask gt_swept_mask(const LabeledStream& ls, std::int64_t t0_us, std::int64_t t1_us) {
  require(t0_us <= t1_us, "gt_swept_mask: t0 must not exceed t1");
  const SceneConfig& cfg = ls.config;
  IMOMask mask = IMOMask::zeros(cfg.height, cfg.width);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x)
      for (const ImoConfig& imo : cfg.imos)
        if (swept_occupied(imo, static_cast<Real>(t0_us), static_cast<Real>(t1_us), x, y)) {
          mask.values(y, x) = 1;
          break;
        }
  return mask;
}

}  // namespace evsup
