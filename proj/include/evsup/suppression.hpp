#pragma once

#include "evsup/event_core.hpp"
#include "evsup/flow_cmax.hpp"
#include "evsup/types.hpp"

#include <cstdint>
#include <vector>

namespace evsup {

// Binary per-pixel dynamic-object mask: 1 = IMO, 0 = ego.
struct IMOMask {
  ImageU8 values;  // strictly {0, 1}

  int height() const { return static_cast<int>(values.rows()); }
  int width() const { return static_cast<int>(values.cols()); }
  std::int64_t count() const { return (values != 0).count(); }

  static IMOMask zeros(int height, int width);
};

// Soft mask carried as logits; probability = logistic(value).
struct MaskLogits {
  ImageR values;

  int height() const { return static_cast<int>(values.rows()); }
  int width() const { return static_cast<int>(values.cols()); }
};

// Logit assigned to backward-warp samples that fall outside the image.
// Probability ~4.5e-5, i.e. "ego": unseen regions must not suppress ego events.
inline constexpr Real kFillLogit = -10.0;

enum class Keep { imo, ego };

// Per-event retention flags under the pixel operator: keep=imo retains events
// whose mask pixel is 1, keep=ego the complement.
std::vector<std::uint8_t> event_keep_flags(const EventStream& stream, const IMOMask& mask,
                                           Keep keep);

// Filters the stream by event_keep_flags; order preserved, geometry copied.
EventStream suppress(const EventStream& stream, const IMOMask& mask, Keep keep);

// Backward warp: out(x) = in(x - d(x)) with d the flow displacement rescaled
// from its reference duration to dt_p, sampled bilinearly in logit space.
MaskLogits warp_mask(const MaskLogits& logits, const FlowField& flow, std::int64_t dt_p_us,
                     Real fill_logit = kFillLogit);

// Pixel = 1 iff logistic(logit) >= tau.
IMOMask threshold(const MaskLogits& logits, Real tau = 0.5);

// k iterations of morphological dilation with a 3x3 all-ones element.
IMOMask dilate(const IMOMask& mask, int k);

// threshold(warp_mask(logits, flow, dt_p), tau): the anticipated mask.
IMOMask anticipate(const MaskLogits& logits_now, const FlowField& flow, std::int64_t dt_p_us,
                   Real tau = 0.5);

// Binary mask to +/-magnitude logits.
MaskLogits to_logits(const IMOMask& mask, Real magnitude = 10.0);

}  // namespace evsup
