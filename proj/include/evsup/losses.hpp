#pragma once

#include "evsup/flow_cmax.hpp"
#include "evsup/types.hpp"

namespace evsup {

struct LossWeights {
  Real w_sup = 1.0;
  Real w_unsup = 1.0;
  Real future_mask = 1.0;
  Real flow = 0.1;
  Real smooth = 0.05;
  Real w_bce = 1.0;
  Real w_dice = 1.0;
  Real eps_charb = 1e-3;
  Real eps_dice = 1.0;
};

// Mean numerically stable logistic cross-entropy; target is binary {0, 1}.
Real bce(const ImageR& logits, const ImageU8& target);

// 1 - (2 sum(p t) + eps) / (sum p + sum t + eps); probabilities in [0, 1].
Real dice_loss(const ImageR& probs, const ImageU8& target, Real eps_dice = 1.0);

// w_bce * bce + w_dice * dice on logistic(logits).
Real bce_dice(const ImageR& logits, const ImageU8& target, const LossWeights& w = {});

// Current-mask term plus future_mask-weighted future term; pass nullptr for
// both future arguments to skip the future pair.
Real mask_loss(const ImageR& mt_logits, const ImageU8& mt_gt, const ImageR* mfut_logits,
               const ImageU8* mfut_gt, const LossWeights& w = {});

// Mean over valid pixels of |du| + |dv|. Throws when no pixel is valid.
Real flow_l1(const FlowField& pred, const FlowField& gt, const ImageU8& valid);

// Charbonnier penalty on first-order forward differences, replicate boundary
// (zero gradient on the last row/column). Summed over pixels, two terms each.
Real charbonnier_smooth(const FlowField& flow, Real eps);

struct FlowGradient {
  ImageR du;
  ImageR dv;
};

// Analytic gradient of charbonnier_smooth w.r.t. every flow component.
FlowGradient charbonnier_smooth_grad(const FlowField& flow, Real eps);

// flow * flow_l1 + smooth * charbonnier_smooth(pred, eps_charb).
Real flow_sup_loss(const FlowField& pred, const FlowField& gt, const ImageU8& valid,
                   const LossWeights& w = {});

// w_sup * l_sup + w_unsup * l_unsup.
Real total_loss(Real l_sup, Real l_unsup, const LossWeights& w = {});

}  // namespace evsup
