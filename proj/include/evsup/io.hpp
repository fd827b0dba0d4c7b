#pragma once

#include "evsup/event_core.hpp"
#include "evsup/flow_cmax.hpp"
#include "evsup/suppression.hpp"
#include "evsup/temporal_atc.hpp"
#include "evsup/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evsup {

// All binary formats are little-endian. Malformed or truncated files throw
// FormatError.
//
//   EVS1: "EVS1", u32 W, u32 H, u64 count, count x (u16 x, u16 y, i64 t, i8 p)
//   MLG1: "MLG1", u32 W, u32 H, W*H f32 logits row-major
//   FLO1: "FLO1", u32 W, u32 H, u64 dur_ref_us, W*H f32 pairs (u, v) row-major
//   ATC1: "ATC1", u32 C, u32 heads, u64 seed, per head Wq, Wk, Wv as
//         C x (C/heads) f32 row-major, then Wo as C x C f32 row-major
//   VOX1: "VOX1", u32 W, u32 H, u32 B, i64 t0, i64 t1, B planes of W*H f32
//   PGM : binary P5, maxval 255, 0 = ego and 255 = IMO
//   CSV : header "x,y,t_us,p", one event per line

void write_events_evs1(const std::string& path, const EventStream& stream);
EventStream read_events_evs1(const std::string& path);

void write_events_csv(const std::string& path, const EventStream& stream);
EventStream read_events_csv(const std::string& path);

void write_mask_pgm(const std::string& path, const IMOMask& mask);
IMOMask read_mask_pgm(const std::string& path);

void write_logits_mlg1(const std::string& path, const MaskLogits& logits);
MaskLogits read_logits_mlg1(const std::string& path);

void write_flow_flo1(const std::string& path, const FlowField& flow);
FlowField read_flow_flo1(const std::string& path);

void write_weights_atc1(const std::string& path, const AttentionWeights& weights);
AttentionWeights read_weights_atc1(const std::string& path);

void write_voxel_vox1(const std::string& path, const VoxelGrid& grid);
VoxelGrid read_voxel_vox1(const std::string& path);

// "index,label" rows for per-event flags.
void write_labels_csv(const std::string& path, const std::vector<std::uint8_t>& labels);
std::vector<std::uint8_t> read_labels_csv(const std::string& path);

}  // namespace evsup
