#include "evsup/losses.hpp"

#include <cmath>

namespace evsup {

namespace {

void require_same_shape(const ImageR& a, const ImageU8& b, const char* who) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), std::string(who) + ": shape mismatch");
}

}  // namespace

Real bce(const ImageR& logits, const ImageU8& target) {
  require_same_shape(logits, target, "bce");
  require(logits.size() > 0, "bce: empty input");
  // max(z, 0) - z t + log(1 + exp(-|z|))
  const ImageR t = target.cast<Real>();
  const ImageR per_pixel =
      logits.max(Real(0)) - logits * t + (1 + (-logits.abs()).exp()).log();
  return per_pixel.mean();
}

Real dice_loss(const ImageR& probs, const ImageU8& target, Real eps_dice) {
  require_same_shape(probs, target, "dice_loss");
  const ImageR t = target.cast<Real>();
  const Real inter = (probs * t).sum();
  const Real denom = probs.sum() + t.sum() + eps_dice;
  return 1 - (2 * inter + eps_dice) / denom;
}

Real bce_dice(const ImageR& logits, const ImageU8& target, const LossWeights& w) {
  const ImageR probs = logistic(logits);
  return w.w_bce * bce(logits, target) + w.w_dice * dice_loss(probs, target, w.eps_dice);
}

Real mask_loss(const ImageR& mt_logits, const ImageU8& mt_gt, const ImageR* mfut_logits,
               const ImageU8* mfut_gt, const LossWeights& w) {
  require((mfut_logits == nullptr) == (mfut_gt == nullptr),
          "mask_loss: future logits and target must be given together");
  Real loss = bce_dice(mt_logits, mt_gt, w);
  if (mfut_logits) loss += w.future_mask * bce_dice(*mfut_logits, *mfut_gt, w);
  return loss;
}

Real flow_l1(const FlowField& pred, const FlowField& gt, const ImageU8& valid) {
  require(pred.height() == gt.height() && pred.width() == gt.width(),
          "flow_l1: flow geometries must match");
  require(valid.rows() == pred.u.rows() && valid.cols() == pred.u.cols(),
          "flow_l1: valid mask geometry must match");
  const auto mask = (valid != 0).cast<Real>();
  const Real count = mask.sum();
  require(count > 0, "flow_l1: at least one valid pixel required");
  const Real sum = (mask * ((pred.u - gt.u).abs() + (pred.v - gt.v).abs())).sum();
  return sum / count;
}

Real charbonnier_smooth(const FlowField& flow, Real eps) {
  require(eps > 0, "charbonnier_smooth: eps must be positive");
  const int h = flow.height();
  const int w = flow.width();
  Real total = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Real gxu = x + 1 < w ? flow.u(y, x + 1) - flow.u(y, x) : 0;
      const Real gxv = x + 1 < w ? flow.v(y, x + 1) - flow.v(y, x) : 0;
      const Real gyu = y + 1 < h ? flow.u(y + 1, x) - flow.u(y, x) : 0;
      const Real gyv = y + 1 < h ? flow.v(y + 1, x) - flow.v(y, x) : 0;
      total += std::sqrt(gxu * gxu + gxv * gxv + eps * eps);
      total += std::sqrt(gyu * gyu + gyv * gyv + eps * eps);
    }
  }
  return total;
}

FlowGradient charbonnier_smooth_grad(const FlowField& flow, Real eps) {
  require(eps > 0, "charbonnier_smooth_grad: eps must be positive");
  const int h = flow.height();
  const int w = flow.width();
  FlowGradient grad;
  grad.du = ImageR::Zero(h, w);
  grad.dv = ImageR::Zero(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        const Real gxu = flow.u(y, x + 1) - flow.u(y, x);
        const Real gxv = flow.v(y, x + 1) - flow.v(y, x);
        const Real inv = 1 / std::sqrt(gxu * gxu + gxv * gxv + eps * eps);
        grad.du(y, x + 1) += gxu * inv;
        grad.du(y, x) -= gxu * inv;
        grad.dv(y, x + 1) += gxv * inv;
        grad.dv(y, x) -= gxv * inv;
      }
      if (y + 1 < h) {
        const Real gyu = flow.u(y + 1, x) - flow.u(y, x);
        const Real gyv = flow.v(y + 1, x) - flow.v(y, x);
        const Real inv = 1 / std::sqrt(gyu * gyu + gyv * gyv + eps * eps);
        grad.du(y + 1, x) += gyu * inv;
        grad.du(y, x) -= gyu * inv;
        grad.dv(y + 1, x) += gyv * inv;
        grad.dv(y, x) -= gyv * inv;
      }
    }
  }
  return grad;
}

Real flow_sup_loss(const FlowField& pred, const FlowField& gt, const ImageU8& valid,
                   const LossWeights& w) {
  return w.flow * flow_l1(pred, gt, valid) + w.smooth * charbonnier_smooth(pred, w.eps_charb);
}

Real total_loss(Real l_sup, Real l_unsup, const LossWeights& w) {
  return w.w_sup * l_sup + w.w_unsup * l_unsup;
}

}  // namespace evsup
