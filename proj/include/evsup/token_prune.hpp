#pragma once

#include "evsup/suppression.hpp"
#include "evsup/types.hpp"

#include <vector>

namespace evsup {

// Patch-token keep-set over a ceil(H/P) x ceil(W/P) grid; kept indices are
// row-major and sorted. Remainder patches at the right/bottom edges are full
// tokens over partial pixel coverage.
struct TokenGrid {
  int patch = 0;
  int rows = 0;
  int cols = 0;
  std::vector<int> kept;

  int total() const { return rows * cols; }
};

// Dilate the mask k_dilate times, then keep token (i, j) iff any pixel of
// patch (i, j) is set.
TokenGrid mask_to_tokens(const IMOMask& mask, int patch, int k_dilate);

// |kept| / total tokens.
Real utilization(const TokenGrid& grid);

}  // namespace evsup
