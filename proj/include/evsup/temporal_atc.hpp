#pragma once

#include "evsup/types.hpp"

#include <cstdint>
#include <vector>

namespace evsup {

// C x H x W feature tensor stored as an (H*W) x C matrix whose rows are
// per-pixel feature vectors in row-major spatial order, i.e. already in the
// flattened sequence layout the attention consumes.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  MatrixR seq;  // (H*W) x C

  Real& at(int c, int y, int x) { return seq(y * width + x, c); }
  Real at(int c, int y, int x) const { return seq(y * width + x, c); }

  static FeatureMap zero(int channels, int height, int width);
};

// Sinusoidal encoding of a time offset; every component lies in [-1, 1].
struct TimeEncoding {
  VectorR values;

  int dim() const { return static_cast<int>(values.size()); }
};

// Component 2k = sin(w_k dt), 2k+1 = cos(w_k dt), w_k = 10000^(-2k/d).
// dt is in seconds.
TimeEncoding positional_encode(Real dt_seconds, int d);

// Projection parameters of the cross-attention block. Seeded initialization
// draws every entry from uniform(-1/sqrt(C), 1/sqrt(C)) with a hand-rolled
// generator so the same seed is bit-identical everywhere.
struct AttentionWeights {
  int channels = 0;
  int heads = 0;
  std::uint64_t seed = 0;
  std::vector<MatrixR> wq;  // per head, C x (C/heads)
  std::vector<MatrixR> wk;
  std::vector<MatrixR> wv;
  MatrixR wo;  // C x C

  int head_dim() const { return channels / heads; }

  static AttentionWeights seeded(int channels, int heads, std::uint64_t seed);
};

// Multi-head cross-attention: the query is the projected time encoding
// broadcast over all H*W positions, keys and values are the projected
// flattened features. Scaled dot-product per head, heads concatenated,
// output-projected, reshaped back to C x H x W. Pass attention_out to
// capture the per-head (H*W) x (H*W) softmax matrices.
FeatureMap cross_attention_forward(const FeatureMap& features, const TimeEncoding& t_enc,
                                   const AttentionWeights& weights,
                                   std::vector<MatrixR>* attention_out = nullptr);

// cross_attention_forward with the time encoding built from dt at d = C.
FeatureMap atc(const FeatureMap& features, Real dt_seconds, const AttentionWeights& weights);

}  // namespace evsup
