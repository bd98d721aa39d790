#pragma once

// Temporal head: Bi-GRU over per-frame scene summaries, a Gumbel-Softmax
// boundary module that delineates sub-events, a second Bi-GRU over
// mean-pooled segment features (broadcast back to frames), and a per-human
// frame-wise classifier.

#include <cstdint>
#include <utility>
#include <vector>

#include "cats/tensor.hpp"
#include "cats/timeline.hpp"

namespace cats {

struct GruCell {
  Tensor wz, uz, bz;  // update gate: (D_in, D_h), (D_h, D_h), (D_h)
  Tensor wr, ur, br;  // reset gate
  Tensor wh, uh, bh;  // candidate

  Index input_dim() const { return wz.extent(0); }
  Index hidden_dim() const { return wz.extent(1); }
};

// One step: z = sig(xWz + hUz + bz), r = sig(xWr + hUr + br),
// hc = tanh(xWh + (r*h)Uh + bh), h' = h + z*(hc - h). x is (1, D_in).
Tensor gru_step(const GruCell& cell, const Tensor& x, const Tensor& h);

// Runs one direction over x (T, D_in) from zero state; row t of the result
// is the state after consuming frame t (in scan order). (T, D_h)
Tensor gru_direction(const GruCell& cell, const Tensor& x, bool reverse);

// Left-to-right and right-to-left passes concatenated per frame. (T, 2*D_h)
Tensor bigru_forward(const GruCell& fwd, const GruCell& bwd, const Tensor& x);

// Mean-pools scenery nodes (T, HJ+2O, C3): per-human mean over that human's
// J joint rows -> (T, H, C3), plus the all-node mean -> (T, C3).
std::pair<Tensor, Tensor> pool_scene(const Tensor& nodes, Index humans, Index joints);

struct BoundaryModule {
  Tensor w;  // (D, 2)
  Tensor b;  // (2)
  double tau = 1.0;
  bool straight_through = true;
};

// Soft Gumbel-Softmax sample given explicit noise; exposed for testing the
// zero-noise and low-temperature limits.
Tensor boundary_soft(const Tensor& logits, const Tensor& noise, double tau);

// Per-frame 2-way boundary indicators, channel 0 = boundary. Training mode
// draws Gumbel noise from rng_seed and emits straight-through hard one-hots
// (soft gradients); eval mode is a deterministic argmax. Frame 1 is forced
// to be a boundary.
Tensor gumbel_boundaries(const BoundaryModule& module, const Tensor& states,
                         std::uint64_t rng_seed, bool train_mode);

// Decodes indicator rows into (start, length) runs, 0-based.
std::vector<std::pair<Index, Index>> boundary_runs(const Tensor& indicators);

// Mean-pools states (T, D) over each run, runs the segment Bi-GRU over the
// K pooled rows in segment order, and broadcasts each segment's context back
// to its frames. (T, 2*D_h)
Tensor segment_context(const GruCell& fwd, const GruCell& bwd, const Tensor& states,
                       const std::vector<std::pair<Index, Index>>& runs);

struct ClassifierHead {
  Tensor w;  // (C3 + 2*D_h, num_classes)
  Tensor b;  // (num_classes)
};

// Concatenates each human's summary with the frame's segment context and
// applies the linear head. (T, H, num_classes)
Tensor classify(const ClassifierHead& head, const Tensor& human_summaries,
                const Tensor& seg_ctx);

// argmax class per (frame, human); ties break toward the lower class index.
std::vector<int> argmax_classes(const Tensor& logits);  // length T*H, (t, h) order

// Run-length decodes one human's predicted timeline from (T, H, C) logits.
SegmentTimeline decode_timeline(const Tensor& logits, Index human);
std::vector<SegmentTimeline> decode_timelines(const Tensor& logits);

}  // namespace cats
