#include "evsup/bench.hpp"

#include "evsup/event_core.hpp"
#include "evsup/flow_cmax.hpp"
#include "evsup/suppression.hpp"
#include "evsup/temporal_atc.hpp"

#include <algorithm>

namespace evsup {

AgeReport prediction_age(Real dt_forecast_ms, Real runtime_ms) {
  return {dt_forecast_ms, runtime_ms, dt_forecast_ms - runtime_ms};
}

std::int64_t flop_estimate(const FlopDesc& desc) {
  struct Visitor {
    std::int64_t operator()(const MatMulDesc& d) const { return 2 * d.m * d.k * d.n; }
    std::int64_t operator()(const BilinearWarpDesc& d) const { return 20 * d.height * d.width; }
    std::int64_t operator()(const IweSplatDesc& d) const { return 22 * d.events; }
    std::int64_t operator()(const AtcAttentionDesc& d) const {
      const std::int64_t s = d.height * d.width;
      const std::int64_t dh = d.channels / d.heads;
      // per head: Q, K, V projections, scores, attention x values; then the
      // output projection. Identical to summing the constituent matmuls.
      const std::int64_t proj = 3 * d.heads * (2 * s * d.channels * dh);
      const std::int64_t scores = d.heads * (2 * s * dh * s);
      const std::int64_t attend = d.heads * (2 * s * s * dh);
      const std::int64_t out = 2 * s * d.channels * d.channels;
      return proj + scores + attend + out;
    }
  };
  return std::visit(Visitor{}, desc);
}

std::int64_t flop_estimate(const std::vector<FlopDesc>& composed) {
  std::int64_t total = 0;
  for (const FlopDesc& d : composed) total += flop_estimate(d);
  return total;
}

namespace {

constexpr int kBenchWidth = 640;
constexpr int kBenchHeight = 480;
constexpr int kBenchEvents = 100000;
constexpr std::int64_t kBenchWindowUs = 50000;

EventStream random_stream(std::mt19937_64& rng) {
  EventStream s;
  s.width = kBenchWidth;
  s.height = kBenchHeight;
  s.events.resize(kBenchEvents);
  std::vector<std::int64_t> times(kBenchEvents);
  for (auto& t : times) t = static_cast<std::int64_t>(rng() % kBenchWindowUs);
  std::sort(times.begin(), times.end());
  for (int i = 0; i < kBenchEvents; ++i) {
    Event& e = s.events[i];
    e.x = static_cast<std::uint16_t>(rng() % kBenchWidth);
    e.y = static_cast<std::uint16_t>(rng() % kBenchHeight);
    e.t = times[static_cast<std::size_t>(i)];
    e.p = rng() % 2 ? 1 : -1;
  }
  return s;
}

ImageR random_image(std::mt19937_64& rng, int h, int w, Real lo, Real hi) {
  ImageR img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img(y, x) = lo + (hi - lo) * (static_cast<Real>(rng() >> 11) * 0x1.0p-53);
  return img;
}

}  // namespace

std::vector<std::string> benchmark_names() {
  return {"voxel_encode", "warp_mask", "iwe", "suppress", "atc"};
}

TimingReport run_named_benchmark(const std::string& name, int trials, int threads,
                                 std::uint64_t seed) {
  TimingReport report;
  if (name == "voxel_encode") {
    report = time_op([](std::mt19937_64& rng) { return random_stream(rng); },
                     [](const EventStream& s) { encode_voxel(s, 2, 0, kBenchWindowUs); }, trials,
                     seed);
    report.input_shape = "480x640x2, 100000 events";
  } else if (name == "warp_mask") {
    report = time_op(
        [](std::mt19937_64& rng) {
          MaskLogits logits{random_image(rng, kBenchHeight, kBenchWidth, -10, 10)};
          FlowField flow;
          flow.u = random_image(rng, kBenchHeight, kBenchWidth, -4, 4);
          flow.v = random_image(rng, kBenchHeight, kBenchWidth, -4, 4);
          flow.dur_ref_us = kBenchWindowUs;
          return std::pair<MaskLogits, FlowField>(std::move(logits), std::move(flow));
        },
        [](const std::pair<MaskLogits, FlowField>& in) {
          warp_mask(in.first, in.second, 100000);
        },
        trials, seed);
    report.input_shape = "480x640 logits + flow";
  } else if (name == "iwe") {
    report = time_op(
        [](std::mt19937_64& rng) {
          std::vector<TransportedPoint> pts(kBenchEvents);
          for (auto& p : pts) {
            p.x = static_cast<Real>(rng() >> 11) * 0x1.0p-53 * kBenchWidth;
            p.y = static_cast<Real>(rng() >> 11) * 0x1.0p-53 * kBenchHeight;
          }
          return pts;
        },
        [](const std::vector<TransportedPoint>& pts) {
          build_iwe(pts, kBenchHeight, kBenchWidth);
        },
        trials, seed);
    report.input_shape = "100000 points -> 480x640";
  } else if (name == "suppress") {
    report = time_op(
        [](std::mt19937_64& rng) {
          IMOMask mask;
          mask.values = (random_image(rng, kBenchHeight, kBenchWidth, 0, 1) > 0.5)
                            .cast<std::uint8_t>();
          return std::pair<EventStream, IMOMask>(random_stream(rng), std::move(mask));
        },
        [](const std::pair<EventStream, IMOMask>& in) {
          suppress(in.first, in.second, Keep::imo);
        },
        trials, seed);
    report.input_shape = "480x640 mask, 100000 events";
  } else if (name == "atc") {
    const int channels = 64;
    const int h = 30;
    const int w = 40;
    const AttentionWeights weights = AttentionWeights::seeded(channels, 4, seed);
    report = time_op(
        [&](std::mt19937_64& rng) {
          FeatureMap f = FeatureMap::zero(channels, h, w);
          for (Eigen::Index r = 0; r < f.seq.rows(); ++r)
            for (int c = 0; c < channels; ++c)
              f.seq(r, c) = 2 * (static_cast<Real>(rng() >> 11) * 0x1.0p-53) - 1;
          return f;
        },
        [&](const FeatureMap& f) { atc(f, 0.1, weights); }, trials, seed);
    report.input_shape = "64x30x40, 4 heads";
  } else {
    throw std::invalid_argument("unknown benchmark op: " + name);
  }
  report.threads = threads;
  return report;
}

}  // namespace evsup
