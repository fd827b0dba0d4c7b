#include "evsup/token_prune.hpp"

namespace evsup {

TokenGrid mask_to_tokens(const IMOMask& mask, int patch, int k_dilate) {
  require(patch >= 1, "mask_to_tokens: patch size must be >= 1");
  const IMOMask grown = dilate(mask, k_dilate);
  TokenGrid grid;
  grid.patch = patch;
  grid.rows = (grown.height() + patch - 1) / patch;
  grid.cols = (grown.width() + patch - 1) / patch;
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      bool any = false;
      const int y1 = std::min((i + 1) * patch, grown.height());
      const int x1 = std::min((j + 1) * patch, grown.width());
      for (int y = i * patch; y < y1 && !any; ++y)
        for (int x = j * patch; x < x1; ++x)
          if (grown.values(y, x)) {
            any = true;
            break;
          }
      if (any) grid.kept.push_back(i * grid.cols + j);
    }
  }
  return grid;
}

Real utilization(const TokenGrid& grid) {
  if (grid.total() == 0) return 0;
  return static_cast<Real>(grid.kept.size()) / static_cast<Real>(grid.total());
}

}  // namespace evsup
