#include "evsup/temporal_atc.hpp"

#include <cmath>

namespace evsup {

FeatureMap FeatureMap::zero(int channels, int height, int width) {
  require(channels > 0 && height > 0 && width > 0, "feature map: dims must be positive");
  FeatureMap f;
  f.channels = channels;
  f.height = height;
  f.width = width;
  f.seq = MatrixR::Zero(static_cast<Eigen::Index>(height) * width, channels);
  return f;
}

TimeEncoding positional_encode(Real dt_seconds, int d) {
  require(d >= 2 && d % 2 == 0, "positional_encode: dimension must be even and >= 2");
  TimeEncoding enc;
  enc.values.resize(d);
  for (int k = 0; k < d / 2; ++k) {
    const Real omega = std::pow(Real(10000), Real(-2 * k) / d);
    enc.values[2 * k] = std::sin(omega * dt_seconds);
    enc.values[2 * k + 1] = std::cos(omega * dt_seconds);
  }
  return enc;
}

namespace {

// splitmix64; stdlib distributions are not pinned across implementations.
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Real uniform_symmetric(std::uint64_t& state, Real bound) {
  const Real unit = static_cast<Real>(splitmix64(state) >> 11) * 0x1.0p-53;  // [0, 1)
  return (2 * unit - 1) * bound;
}

MatrixR seeded_matrix(std::uint64_t& state, Eigen::Index rows, Eigen::Index cols, Real bound) {
  MatrixR m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform_symmetric(state, bound);
  return m;
}

}  // namespace

AttentionWeights AttentionWeights::seeded(int channels, int heads, std::uint64_t seed) {
  require(channels > 0 && heads > 0, "attention weights: channels and heads must be positive");
  require(channels % heads == 0, "attention weights: channels must be divisible by heads");
  AttentionWeights w;
  w.channels = channels;
  w.heads = heads;
  w.seed = seed;
  const int dh = channels / heads;
  const Real bound = 1 / std::sqrt(static_cast<Real>(channels));
  std::uint64_t state = seed;
  for (int h = 0; h < heads; ++h) {
    w.wq.push_back(seeded_matrix(state, channels, dh, bound));
    w.wk.push_back(seeded_matrix(state, channels, dh, bound));
    w.wv.push_back(seeded_matrix(state, channels, dh, bound));
  }
  w.wo = seeded_matrix(state, channels, channels, bound);
  return w;
}

FeatureMap cross_attention_forward(const FeatureMap& features, const TimeEncoding& t_enc,
                                   const AttentionWeights& weights,
                                   std::vector<MatrixR>* attention_out) {
  const int channels = features.channels;
  require(t_enc.dim() == channels, "cross attention: encoding dim must equal channels");
  require(weights.channels == channels, "cross attention: weight dims must equal channels");
  require(channels % weights.heads == 0, "cross attention: channels must divide into heads");
  const Eigen::Index positions = features.seq.rows();
  const int dh = weights.head_dim();
  const Real scale = 1 / std::sqrt(static_cast<Real>(dh));

  // The query row is the same at every spatial position, so each attention
  // row is too: evaluate one row per head and broadcast. This is what makes
  // the spatial-constancy invariant hold bit-exactly.
  const Eigen::RowVectorXd query = t_enc.values.transpose();
  Eigen::RowVectorXd concat(channels);
  if (attention_out) attention_out->clear();
  for (int h = 0; h < weights.heads; ++h) {
    const Eigen::RowVectorXd q = query * weights.wq[h];  // 1 x dh
    const MatrixR k = features.seq * weights.wk[h];      // positions x dh
    const MatrixR v = features.seq * weights.wv[h];      // positions x dh
    Eigen::RowVectorXd scores = q * k.transpose() * scale;
    const Real row_max = scores.maxCoeff();
    const Eigen::ArrayXd ex = (scores.transpose().array() - row_max).exp();
    const Eigen::RowVectorXd alpha = (ex / ex.sum()).matrix().transpose();
    if (attention_out) attention_out->push_back(alpha.replicate(positions, 1));
    concat.middleCols(static_cast<Eigen::Index>(h) * dh, dh) = alpha * v;
  }
  FeatureMap out;
  out.channels = channels;
  out.height = features.height;
  out.width = features.width;
  out.seq = (concat * weights.wo).replicate(positions, 1);
  return out;
}

FeatureMap atc(const FeatureMap& features, Real dt_seconds, const AttentionWeights& weights) {
  return cross_attention_forward(features, positional_encode(dt_seconds, features.channels),
                                 weights);
}

}  // namespace evsup
