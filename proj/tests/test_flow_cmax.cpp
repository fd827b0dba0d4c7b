#include "evsup/flow_cmax.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace evsup;

namespace {

EventStream make_stream(int w, int h, std::vector<Event> events) {
  EventStream s;
  s.width = w;
  s.height = h;
  s.events = std::move(events);
  return s;
}

// events from a vertical edge sweeping `disp` px over [0, dur), all rows lit
// at every integer column crossing
EventStream edge_stream(int w, int h, Real x_start, Real disp, std::int64_t dur) {
  std::vector<Event> events;
  const Real x_end = x_start + disp;
  const auto c0 = static_cast<int>(std::ceil(std::min(x_start, x_end)));
  const auto c1 = static_cast<int>(std::floor(std::max(x_start, x_end)));
  for (int c = c0; c <= c1; ++c) {
    const Real tc = (c - x_start) / disp * static_cast<Real>(dur);
    const auto t = static_cast<std::int64_t>(std::llround(tc));
    if (t < 0 || t >= dur || c < 0 || c >= w) continue;
    for (int y = 0; y < h; ++y)
      events.push_back({static_cast<std::uint16_t>(c), static_cast<std::uint16_t>(y), t, 1});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return make_stream(w, h, std::move(events));
}

Real fraction_from_lattice(Real v) {
  const Real f = v - std::floor(v);
  return std::min(f, 1 - f);
}

}  // namespace

TEST_SUITE("flow_cmax") {
  TEST_CASE("zero flow transports events onto themselves") {
    const EventStream s = make_stream(8, 8, {{3, 4, 100, 1}, {5, 1, 900, -1}});
    const auto pts = transport_events(s, FlowField::zero(8, 8, 1000), 500);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == 3);
    CHECK(pts[0].y == 4);
    CHECK(pts[1].x == 5);
    CHECK(pts[1].y == 1);
  }

  TEST_CASE("transport matches the direct velocity form") {
    // event at x=2 and t=1s, reference 0, velocity 2 px/s -> x' = 0
    const EventStream s = make_stream(8, 8, {{2, 0, 1000000, 1}});
    const FlowField flow = FlowField::constant(8, 8, 2, 0, 1000000);
    const auto pts = transport_events(s, flow, 0);
    CHECK(pts[0].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pts[0].y == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("transport matches an independent per-event reimplementation") {
    std::mt19937_64 rng(21);
    FlowField flow;
    flow.u.resize(16, 16);
    flow.v.resize(16, 16);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        flow.u(y, x) = 6 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53) - 3;
        flow.v(y, x) = 6 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53) - 3;
      }
    flow.dur_ref_us = 40000;
    std::vector<Event> events;
    for (int i = 0; i < 300; ++i)
      events.push_back({static_cast<std::uint16_t>(rng() % 16),
                        static_cast<std::uint16_t>(rng() % 16),
                        static_cast<std::int64_t>(rng() % 40000), 1});
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    const EventStream s = make_stream(16, 16, events);
    const std::int64_t t_ref = 40000;
    const auto pts = transport_events(s, flow, t_ref);
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      const Event& e = s.events[i];
      // velocity route instead of displacement-scale route
      const Real vel_u = flow.u(e.y, e.x) / static_cast<Real>(flow.dur_ref_us);
      const Real vel_v = flow.v(e.y, e.x) / static_cast<Real>(flow.dur_ref_us);
      CHECK(pts[i].x ==
            doctest::Approx(e.x + static_cast<Real>(t_ref - e.t) * vel_u).epsilon(1e-10));
      CHECK(pts[i].y ==
            doctest::Approx(e.y + static_cast<Real>(t_ref - e.t) * vel_v).epsilon(1e-10));
    }
  }

  TEST_CASE("transport is linear in the flow magnitude") {
    const EventStream s = make_stream(8, 8, {{4, 4, 250, 1}});
    for (const Real alpha : {0.25, 0.5, 2.0}) {
      const auto base = transport_events(s, FlowField::constant(8, 8, 2, -1, 1000), 1000);
      const auto scaled =
          transport_events(s, FlowField::constant(8, 8, 2 * alpha, -alpha, 1000), 1000);
      CHECK(scaled[0].x - 4 == doctest::Approx(alpha * (base[0].x - 4)).epsilon(1e-12));
      CHECK(scaled[0].y - 4 == doctest::Approx(alpha * (base[0].y - 4)).epsilon(1e-12));
    }
  }

  TEST_CASE("build_iwe splats integer and fractional points") {
    const IWE a = build_iwe({{3, 4}}, 8, 8);
    CHECK(a.intensity(4, 3) == 1);
    CHECK(a.mass() == 1);

    const IWE b = build_iwe({{3.5, 4}}, 8, 8);
    CHECK(b.intensity(4, 3) == doctest::Approx(0.5));
    CHECK(b.intensity(4, 4) == doctest::Approx(0.5));
    CHECK(b.mass() == doctest::Approx(1.0));
  }

  TEST_CASE("build_iwe matches a brute-force splat") {
    std::mt19937_64 rng(31);
    std::vector<TransportedPoint> pts;
    for (int i = 0; i < 400; ++i)
      pts.push_back({14 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53) - 2,
                     14 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53) - 2});
    const IWE iwe = build_iwe(pts, 10, 10);
    std::map<std::pair<int, int>, Real> cells;
    for (const auto& p : pts) {
      const int x0 = static_cast<int>(std::floor(p.x));
      const int y0 = static_cast<int>(std::floor(p.y));
      const Real fx = p.x - x0;
      const Real fy = p.y - y0;
      const Real w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int k = 0; k < 4; ++k)
        if (xs[k] >= 0 && xs[k] < 10 && ys[k] >= 0 && ys[k] < 10)
          cells[{ys[k], xs[k]}] += w[k];
    }
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x) {
        const auto it = cells.find({y, x});
        const Real expected = it == cells.end() ? 0 : it->second;
        CHECK(iwe.intensity(y, x) == doctest::Approx(expected).epsilon(1e-12));
      }
  }

  TEST_CASE("interior points conserve mass exactly") {
    std::mt19937_64 rng(32);
    std::vector<TransportedPoint> pts;
    for (int i = 0; i < 250; ++i)
      pts.push_back({8 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53),
                     8 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53)});
    const IWE iwe = build_iwe(pts, 9, 9);
    CHECK(iwe.mass() == doctest::Approx(250.0).epsilon(1e-12));
    CHECK((iwe.intensity >= 0).all());
  }

  TEST_CASE("variance focus of uniform and toy images") {
    IWE uniform{ImageR::Constant(4, 4, 2.5)};
    CHECK(variance_focus(uniform) == doctest::Approx(0.0));
    IWE toy{ImageR::Zero(2, 2)};
    toy.intensity(0, 0) = 1;
    CHECK(variance_focus(toy) == doctest::Approx(0.1875));  // mean .25, E[I^2] .25
  }

  TEST_CASE("true flow beats zero flow for a two-event deblurring toy") {
    // same edge pixel seen at t=0 and after moving 4 px by t=dur
    const std::int64_t dur = 1000000;
    const EventStream s = make_stream(16, 16, {{2, 5, 0, 1}, {6, 5, dur - 1, 1}});
    TileFlowParams params = TileFlowParams::zero(16, 16, 16, dur);
    Real best = -1;
    int best_u = -100;
    for (int u = -4; u <= 4; ++u) {
      params.u(0, 0) = u;
      const Real val = contrast_objective(s, params, 0);
      if (val > best) {
        best = val;
        best_u = u;
      }
    }
    CHECK(best_u == 4);
    params.u(0, 0) = 4;
    const Real at_true = contrast_objective(s, params, 0);
    params.u(0, 0) = 0;
    const Real at_zero = contrast_objective(s, params, 0);
    CHECK(at_true > at_zero);
  }

  TEST_CASE("tiles without events have zero gradient") {
    const EventStream s = make_stream(16, 16, {{2, 2, 10, 1}});
    TileFlowParams params = TileFlowParams::zero(16, 16, 8, 1000);
    params.u(0, 0) = 1.3;
    const TileGradient g = contrast_gradient(s, params, 0);
    CHECK(g.du(0, 1) == 0);
    CHECK(g.du(1, 0) == 0);
    CHECK(g.du(1, 1) == 0);
    CHECK(g.dv(0, 1) == 0);
  }

  TEST_CASE("contrast gradient matches central finite differences") {
    std::mt19937_64 rng(41);
    const Real h = 1e-4;
    int checked = 0;
    for (int config = 0; config < 100; ++config) {
      const int n_events = 12;
      TileFlowParams params = TileFlowParams::zero(16, 16, 8, 50000);
      EventStream s;
      bool safe = false;
      while (!safe) {
        std::vector<Event> events;
        for (int i = 0; i < n_events; ++i)
          events.push_back({static_cast<std::uint16_t>(2 + rng() % 12),
                            static_cast<std::uint16_t>(2 + rng() % 12),
                            static_cast<std::int64_t>(rng() % 50000), 1});
        std::stable_sort(events.begin(), events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
        s = make_stream(16, 16, std::move(events));
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) {
            params.u(r, c) = 4 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53) - 2;
            params.v(r, c) = 4 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53) - 2;
          }
        // keep the splat away from its kinks at integer coordinates
        safe = true;
        for (const auto& p : transport_events(s, params, 0))
          if (fraction_from_lattice(p.x) < 1e-3 || fraction_from_lattice(p.y) < 1e-3)
            safe = false;
      }
      const TileGradient analytic = contrast_gradient(s, params, 0);
      Real worst_abs = 0;
      Real fd_scale = 0;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          for (int axis = 0; axis < 2; ++axis) {
            ImageR& plane = axis == 0 ? params.u : params.v;
            const Real saved = plane(r, c);
            plane(r, c) = saved + h;
            const Real above = contrast_objective(s, params, 0);
            plane(r, c) = saved - h;
            const Real below = contrast_objective(s, params, 0);
            plane(r, c) = saved;
            const Real fd = (above - below) / (2 * h);
            const Real got = axis == 0 ? analytic.du(r, c) : analytic.dv(r, c);
            worst_abs = std::max(worst_abs, std::abs(got - fd));
            fd_scale = std::max(fd_scale, std::abs(fd));
          }
      CHECK(worst_abs / std::max(fd_scale, Real(1e-6)) < 1e-4);
      ++checked;
    }
    CHECK(checked == 100);
  }

  TEST_CASE("gradient vanishes at a smooth symmetric optimum") {
    // two events meeting at x = 1.5 for u = 6: x1' = 0 + 0.25u, x2' = 3 - 0.25u
    const std::int64_t dur = 1000000;
    const EventStream s = make_stream(16, 16, {{0, 4, 250000, 1}, {3, 4, 750000, 1}});
    TileFlowParams params = TileFlowParams::zero(16, 16, 16, dur);
    params.u(0, 0) = 6;
    const TileGradient g = contrast_gradient(s, params, 500000);
    CHECK(std::abs(g.du(0, 0)) < 1e-12);
    // grid oracle: no lattice candidate does better than the true flow
    params.u(0, 0) = 6;
    const Real at_true = contrast_objective(s, params, 500000);
    for (int u = 0; u <= 12; ++u) {
      params.u(0, 0) = u;
      CHECK(contrast_objective(s, params, 500000) <= at_true + 1e-12);
    }
  }

  TEST_CASE("single global tile recovers a synthetic edge displacement") {
    const std::int64_t dur = 50000;
    const EventStream s = edge_stream(64, 64, 10, 8, dur);
    REQUIRE(s.size() >= 500);
    CmaxConfig config;
    config.window_t0 = 0;
    config.window_t1 = dur;
    const FlowField flow = estimate_flow_cmax(s, 64, config);
    CHECK(flow.dur_ref_us == dur);
    CHECK(std::abs(flow.u(32, 32) - 8.0) < 0.1);
    CHECK(std::abs(flow.v(32, 32)) < 0.1);
  }

  TEST_CASE("a static scene estimates zero displacement") {
    std::vector<Event> events;
    for (int rep = 0; rep < 5; ++rep)
      for (int y = 0; y < 64; ++y)
        events.push_back({10, static_cast<std::uint16_t>(y), rep * 10000, 1});
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    const EventStream s = make_stream(64, 64, std::move(events));
    CmaxConfig config;
    config.window_t0 = 0;
    config.window_t1 = 50000;
    const FlowField flow = estimate_flow_cmax(s, 64, config);
    CHECK(std::abs(flow.u(0, 10)) < 0.1);
    CHECK(std::abs(flow.v(0, 10)) < 0.1);
  }

  TEST_CASE("two tiles recover their own motions") {
    const std::int64_t dur = 50000;
    EventStream left = edge_stream(64, 64, 6, 6, dur);
    EventStream right = edge_stream(64, 64, 44, -4, dur);
    std::vector<Event> merged = left.events;
    merged.insert(merged.end(), right.events.begin(), right.events.end());
    std::stable_sort(merged.begin(), merged.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    const EventStream s = make_stream(64, 64, std::move(merged));
    CmaxConfig config;
    config.window_t0 = 0;
    config.window_t1 = dur;
    const FlowField flow = estimate_flow_cmax(s, 32, config);
    // left edge events live in columns 6..12, right edge in 40..44
    CHECK(std::abs(flow.u(10, 8) - 6.0) < 0.5);
    CHECK(std::abs(flow.u(50, 8) - 6.0) < 0.5);
    CHECK(std::abs(flow.u(10, 42) + 4.0) < 0.5);
    CHECK(std::abs(flow.u(50, 42) + 4.0) < 0.5);
  }

  TEST_CASE("estimation is deterministic and rejects empty streams") {
    CHECK_THROWS_AS(estimate_flow_cmax(make_stream(8, 8, {}), 8), std::invalid_argument);
    const EventStream s = edge_stream(32, 32, 4, 5, 20000);
    const FlowField a = estimate_flow_cmax(s, 16);
    const FlowField b = estimate_flow_cmax(s, 16);
    CHECK((a.u == b.u).all());
    CHECK((a.v == b.v).all());
    CHECK(a.dur_ref_us == b.dur_ref_us);
  }
}
