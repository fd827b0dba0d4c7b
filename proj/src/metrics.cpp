#include "evsup/metrics.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace evsup {

InstanceLabels connected_components(const IMOMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  InstanceLabels out;
  out.labels = ImageI::Zero(h, w);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.values(y, x) || out.labels(y, x) != 0) continue;
      const int id = ++out.count;
      stack.push_back({y, x});
      out.labels(y, x) = id;
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy;
            const int nx = cx + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            if (mask.values(ny, nx) && out.labels(ny, nx) == 0) {
              out.labels(ny, nx) = id;
              stack.push_back({ny, nx});
            }
          }
        }
      }
    }
  }
  return out;
}

Real iou(const ImageU8& a, const ImageU8& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "iou: geometry mismatch");
  const auto an = a != 0;
  const auto bn = b != 0;
  const auto inter = static_cast<Real>((an && bn).count());
  const auto uni = static_cast<Real>((an || bn).count());
  return uni == 0 ? Real(1) : inter / uni;
}

Real miou(const IMOMask& pred, const IMOMask& gt) {
  require(pred.height() == gt.height() && pred.width() == gt.width(), "miou: geometry mismatch");
  const ImageU8 pred_ego = (pred.values == 0).cast<std::uint8_t>();
  const ImageU8 gt_ego = (gt.values == 0).cast<std::uint8_t>();
  return (iou(pred.values, gt.values) + iou(pred_ego, gt_ego)) / 2;
}

Real piou(const std::vector<std::uint8_t>& kept, const std::vector<std::uint8_t>& gt) {
  require(kept.size() == gt.size(), "piou: flag vectors must describe the same events");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const bool k = kept[i] != 0;
    const bool g = gt[i] != 0;
    inter += k && g;
    uni += k || g;
  }
  return uni == 0 ? Real(1) : static_cast<Real>(inter) / static_cast<Real>(uni);
}

std::vector<int> min_cost_assignment(const MatrixR& cost) {
  require(cost.rows() == cost.cols(), "min_cost_assignment: matrix must be square");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  const Real inf = std::numeric_limits<Real>::infinity();
  std::vector<Real> pot_row(n + 1, 0), pot_col(n + 1, 0), min_to(n + 1);
  std::vector<int> col_match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    col_match[0] = i;
    int j0 = 0;
    std::fill(min_to.begin(), min_to.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = col_match[j0];
      Real delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Real cur = cost(i0 - 1, j - 1) - pot_row[i0] - pot_col[j];
        if (cur < min_to[j]) {
          min_to[j] = cur;
          way[j] = j0;
        }
        if (min_to[j] < delta) {
          delta = min_to[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          pot_row[col_match[j]] += delta;
          pot_col[j] -= delta;
        } else {
          min_to[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_match[j0] != 0);
    do {
      const int j1 = way[j0];
      col_match[j0] = col_match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (col_match[j] > 0) row_to_col[col_match[j] - 1] = j - 1;
  return row_to_col;
}

MatchReport hungarian_match(const InstanceLabels& pred, const InstanceLabels& gt) {
  require(pred.height() == gt.height() && pred.width() == gt.width(),
          "hungarian_match: geometry mismatch");
  const int kp = pred.count;
  const int kg = gt.count;
  MatrixR inter = MatrixR::Zero(kp, kg);
  VectorR area_p = VectorR::Zero(kp);
  VectorR area_g = VectorR::Zero(kg);
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const int ip = pred.labels(y, x);
      const int ig = gt.labels(y, x);
      if (ip > 0) area_p(ip - 1) += 1;
      if (ig > 0) area_g(ig - 1) += 1;
      if (ip > 0 && ig > 0) inter(ip - 1, ig - 1) += 1;
    }
  }
  MatrixR iou_mat = MatrixR::Zero(kp, kg);
  for (int i = 0; i < kp; ++i)
    for (int j = 0; j < kg; ++j) {
      const Real uni = area_p(i) + area_g(j) - inter(i, j);
      iou_mat(i, j) = uni > 0 ? inter(i, j) / uni : Real(0);
    }

  const int n = std::max(kp, kg);
  MatrixR cost = MatrixR::Constant(n, n, 1);  // dummies at cost 1 (IoU 0)
  cost.topLeftCorner(kp, kg) = MatrixR::Constant(kp, kg, 1) - iou_mat;
  const std::vector<int> row_to_col = min_cost_assignment(cost);

  MatchReport report;
  std::vector<char> gt_overlapped(static_cast<std::size_t>(kg) + 1, 0);
  for (int i = 0; i < kp; ++i) {
    const int j = row_to_col[i];
    if (j < 0 || j >= kg) continue;
    if (iou_mat(i, j) > 0) {
      report.pairs.push_back({i + 1, j + 1, iou_mat(i, j)});
      gt_overlapped[static_cast<std::size_t>(j) + 1] = 1;
    }
  }
  for (int j = 1; j <= kg; ++j)
    if (!gt_overlapped[static_cast<std::size_t>(j)]) report.unmatched_gt.push_back(j);
  report.r_at_05 = r_at_05(report, kg);

  IMOMask pred_bin;
  pred_bin.values = (pred.labels > 0).cast<std::uint8_t>();
  IMOMask gt_bin;
  gt_bin.values = (gt.labels > 0).cast<std::uint8_t>();
  report.miou = miou(pred_bin, gt_bin);
  return report;
}

Real r_at_05(const MatchReport& report, int gt_count) {
  if (gt_count == 0) return 100;  // vacuous
  int correct = 0;
  for (const MatchPair& p : report.pairs) correct += p.iou > 0.5;
  return 100 * static_cast<Real>(correct) / static_cast<Real>(gt_count);
}

}  // namespace evsup
