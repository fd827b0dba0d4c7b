#pragma once

#include "evsup/suppression.hpp"
#include "evsup/types.hpp"

#include <cstdint>
#include <vector>

namespace evsup {

// Per-pixel instance ids: 0 = background/ego, 1..count = instances, labels
// assigned in raster-scan discovery order.
struct InstanceLabels {
  ImageI labels;
  int count = 0;

  int height() const { return static_cast<int>(labels.rows()); }
  int width() const { return static_cast<int>(labels.cols()); }
};

// 8-connectivity components of the mask's 1-pixels.
InstanceLabels connected_components(const IMOMask& mask);

// |a AND b| / |a OR b| over nonzero pixels; 1 when both masks are empty.
Real iou(const ImageU8& a, const ImageU8& b);
inline Real iou(const IMOMask& a, const IMOMask& b) { return iou(a.values, b.values); }

// Mean of the IMO-class IoU and the ego-class IoU.
Real miou(const IMOMask& pred, const IMOMask& gt);

// Point-based IoU over event memberships: kept and gt are per-event flags of
// the same underlying stream.
Real piou(const std::vector<std::uint8_t>& kept, const std::vector<std::uint8_t>& gt);

struct MatchPair {
  int pred = 0;
  int gt = 0;
  Real iou = 0;
};

struct MatchReport {
  std::vector<MatchPair> pairs;  // overlapping matched pairs (IoU > 0)
  std::vector<int> unmatched_gt;
  Real r_at_05 = 0;  // percentage
  Real miou = 0;
};

// Optimal one-to-one assignment on the row-major square cost matrix
// (shortest augmenting path with potentials); returns row -> column.
std::vector<int> min_cost_assignment(const MatrixR& cost);

// One-to-one assignment maximizing total IoU (cost 1 - IoU, rectangular case
// padded with dummies at cost 1). A GT instance counts as correctly segmented
// iff its matched IoU exceeds 0.5.
MatchReport hungarian_match(const InstanceLabels& pred, const InstanceLabels& gt);

// Matched-GT-above-0.5 percentage; vacuously 100 when there are no GT
// instances.
Real r_at_05(const MatchReport& report, int gt_count);

}  // namespace evsup
