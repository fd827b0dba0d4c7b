#include "evsup/suppression.hpp"

#include <cmath>

namespace evsup {

IMOMask IMOMask::zeros(int height, int width) {
  IMOMask m;
  m.values = ImageU8::Zero(height, width);
  return m;
}

std::vector<std::uint8_t> event_keep_flags(const EventStream& stream, const IMOMask& mask,
                                           Keep keep) {
  require(mask.height() == stream.height && mask.width() == stream.width,
          "suppress: mask geometry must equal stream geometry");
  std::vector<std::uint8_t> flags(stream.events.size());
  const bool want = keep == Keep::imo;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    flags[i] = (mask.values(e.y, e.x) != 0) == want ? 1 : 0;
  }
  return flags;
}

EventStream suppress(const EventStream& stream, const IMOMask& mask, Keep keep) {
  const auto flags = event_keep_flags(stream, mask, keep);
  EventStream out;
  out.width = stream.width;
  out.height = stream.height;
  out.events.reserve(stream.events.size());
  for (std::size_t i = 0; i < stream.events.size(); ++i)
    if (flags[i]) out.events.push_back(stream.events[i]);
  return out;
}

namespace {

Real sample_bilinear_fill(const ImageR& img, Real sx, Real sy, Real fill) {
  const auto h = img.rows();
  const auto w = img.cols();
  const Real fx0 = std::floor(sx);
  const Real fy0 = std::floor(sy);
  const auto x0 = static_cast<std::int64_t>(fx0);
  const auto y0 = static_cast<std::int64_t>(fy0);
  const Real ax = sx - fx0;
  const Real ay = sy - fy0;
  auto tap = [&](std::int64_t tx, std::int64_t ty) {
    return (tx >= 0 && tx < w && ty >= 0 && ty < h) ? img(ty, tx) : fill;
  };
  if (ax == 0 && ay == 0) return tap(x0, y0);  // exact lattice hit, no blend
  return (1 - ax) * (1 - ay) * tap(x0, y0) + ax * (1 - ay) * tap(x0 + 1, y0) +
         (1 - ax) * ay * tap(x0, y0 + 1) + ax * ay * tap(x0 + 1, y0 + 1);
}

}  // namespace

MaskLogits warp_mask(const MaskLogits& logits, const FlowField& flow, std::int64_t dt_p_us,
                     Real fill_logit) {
  require(flow.height() == logits.height() && flow.width() == logits.width(),
          "warp_mask: flow geometry must equal logits geometry");
  require(flow.dur_ref_us > 0, "warp_mask: flow reference duration must be positive");
  const Real scale = static_cast<Real>(dt_p_us) / static_cast<Real>(flow.dur_ref_us);
  MaskLogits out;
  out.values.resize(logits.values.rows(), logits.values.cols());
  for (int y = 0; y < logits.height(); ++y) {
    for (int x = 0; x < logits.width(); ++x) {
      const Real sx = x - scale * flow.u(y, x);
      const Real sy = y - scale * flow.v(y, x);
      out.values(y, x) = sample_bilinear_fill(logits.values, sx, sy, fill_logit);
    }
  }
  return out;
}

IMOMask threshold(const MaskLogits& logits, Real tau) {
  require(tau > 0 && tau < 1, "threshold: tau must lie in (0, 1)");
  IMOMask mask;
  mask.values = (logistic(logits.values) >= tau).cast<std::uint8_t>();
  return mask;
}

IMOMask dilate(const IMOMask& mask, int k) {
  require(k >= 0, "dilate: iteration count must be >= 0");
  const int h = mask.height();
  const int w = mask.width();
  IMOMask cur = mask;
  for (int it = 0; it < k; ++it) {
    IMOMask next = IMOMask::zeros(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::uint8_t hit = 0;
        for (int dy = -1; dy <= 1 && !hit; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = y + dy;
            const int nx = x + dx;
            if (ny >= 0 && ny < h && nx >= 0 && nx < w && cur.values(ny, nx)) {
              hit = 1;
              break;
            }
          }
        }
        next.values(y, x) = hit;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

IMOMask anticipate(const MaskLogits& logits_now, const FlowField& flow, std::int64_t dt_p_us,
                   Real tau) {
  return threshold(warp_mask(logits_now, flow, dt_p_us), tau);
}

MaskLogits to_logits(const IMOMask& mask, Real magnitude) {
  MaskLogits out;
  out.values = mask.values.cast<Real>() * (2 * magnitude) - magnitude;
  return out;
}

}  // namespace evsup
