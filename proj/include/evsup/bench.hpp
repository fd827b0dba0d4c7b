#pragma once

#include "evsup/types.hpp"

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace evsup {

struct TimingReport {
  int trials = 0;
  Real mean_us = 0;
  Real std_us = 0;  // population std, two-pass
  Real min_us = 0;
  int threads = 1;
  std::string input_shape;
};

// Mean and population std of per-call wall-clock time over `trials` calls.
// A fresh random input of constant shape is generated (untimed) before every
// call so repeated inference cannot be served from caches; 10 untimed warm-up
// iterations run first. `generate` maps an RNG to an input, `run` consumes it.
template <typename Generate, typename Run>
TimingReport time_op(Generate&& generate, Run&& run, int trials = 1000, std::uint64_t seed = 0,
                     int warmup = 10) {
  require(trials >= 1, "time_op: trials must be >= 1");
  std::mt19937_64 rng(seed);
  for (int i = 0; i < warmup; ++i) {
    auto input = generate(rng);
    run(input);
  }
  std::vector<Real> samples;
  samples.reserve(static_cast<std::size_t>(trials));
  for (int i = 0; i < trials; ++i) {
    auto input = generate(rng);
    const auto start = std::chrono::steady_clock::now();
    run(input);
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<Real, std::micro>(stop - start).count());
  }
  TimingReport report;
  report.trials = trials;
  Real sum = 0;
  Real min = samples.front();
  for (Real s : samples) {
    sum += s;
    min = std::min(min, s);
  }
  report.mean_us = sum / trials;
  report.min_us = min;
  Real sq = 0;
  for (Real s : samples) sq += (s - report.mean_us) * (s - report.mean_us);
  report.std_us = std::sqrt(sq / trials);
  return report;
}

struct AgeReport {
  Real dt_forecast_ms = 0;
  Real runtime_ms = 0;
  Real age_ms = 0;  // forecast horizon minus runtime; negative = lag
};

// age = dt_forecast - runtime, exact f64 arithmetic.
AgeReport prediction_age(Real dt_forecast_ms, Real runtime_ms);

// FLOP accounting descriptors. Convention: one multiply-accumulate counts as
// two FLOPs. Formulas:
//   matmul (M,K,N):          2*M*K*N
//   bilinear warp (H,W):     20 per pixel (2x2 displacement scaling, source
//                            position, fractional weights, four-tap blend)
//   IWE splat (N events):    22 per event (transport MACs, fractional
//                            weights, four accumulate MACs)
//   ATC attention (C,H,W,h): Q/K/V/output projections + score and
//                            attention-value matmuls at S = H*W sequence
//                            length: 8*S*C^2 + 4*S^2*C
struct MatMulDesc {
  std::int64_t m = 0, k = 0, n = 0;
};
struct BilinearWarpDesc {
  std::int64_t height = 0, width = 0;
};
struct IweSplatDesc {
  std::int64_t events = 0;
};
struct AtcAttentionDesc {
  std::int64_t channels = 0, height = 0, width = 0, heads = 1;
};

using FlopDesc = std::variant<MatMulDesc, BilinearWarpDesc, IweSplatDesc, AtcAttentionDesc>;

std::int64_t flop_estimate(const FlopDesc& desc);
std::int64_t flop_estimate(const std::vector<FlopDesc>& composed);

// Named operations for the CLI bench subcommand, all at the reference input
// size 480 x 640 (x 2 bins where applicable): voxel_encode, warp_mask, iwe,
// suppress, atc (attention at pooled 30 x 40 resolution, C = 64).
std::vector<std::string> benchmark_names();
TimingReport run_named_benchmark(const std::string& name, int trials, int threads,
                                 std::uint64_t seed);

}  // namespace evsup
