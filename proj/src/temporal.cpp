#include "cats/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cats {

Tensor gru_step(const GruCell& cell, const Tensor& x, const Tensor& h) {
  Tensor z = sigmoid(add(add(matmul(x, cell.wz), matmul(h, cell.uz)), cell.bz));
  Tensor r = sigmoid(add(add(matmul(x, cell.wr), matmul(h, cell.ur)), cell.br));
  Tensor hc = tanh(add(add(matmul(x, cell.wh), matmul(mul(r, h), cell.uh)), cell.bh));
  return add(h, mul(z, sub(hc, h)));
}

Tensor gru_direction(const GruCell& cell, const Tensor& x, bool reverse) {
  if (x.dim() != 2)
    throw ShapeError("gru: input must be (T, D_in), got " + shape_str(x.shape()));
  if (x.extent(1) != cell.input_dim())
    throw ShapeError("gru: input width " + std::to_string(x.extent(1)) +
                     " does not match cell input dim " + std::to_string(cell.input_dim()));
  const Index frames = x.extent(0);
  Tensor h = Tensor::zeros({1, cell.hidden_dim()});
  std::vector<Tensor> rows(static_cast<std::size_t>(frames));
  for (Index i = 0; i < frames; ++i) {
    const Index t = reverse ? frames - 1 - i : i;
    h = gru_step(cell, slice(x, 0, t, 1), h);
    rows[static_cast<std::size_t>(t)] = h;
  }
  return concat(rows, 0);
}

Tensor bigru_forward(const GruCell& fwd, const GruCell& bwd, const Tensor& x) {
  return concat_last_axis(gru_direction(fwd, x, false), gru_direction(bwd, x, true));
}

std::pair<Tensor, Tensor> pool_scene(const Tensor& nodes, Index humans, Index joints) {
  if (nodes.dim() != 3)
    throw ShapeError("pool_scene: nodes must be (T, N, C3), got " + shape_str(nodes.shape()));
  if (nodes.extent(1) < humans * joints)
    throw ShapeError("pool_scene: node axis " + std::to_string(nodes.extent(1)) +
                     " too small for " + std::to_string(humans) + " humans x " +
                     std::to_string(joints) + " joints");
  std::vector<Tensor> per_human;
  per_human.reserve(static_cast<std::size_t>(humans));
  for (Index h = 0; h < humans; ++h)
    per_human.push_back(reduce_mean(slice(nodes, 1, h * joints, joints), 1, /*keepdim=*/true));
  return {concat(per_human, 1), reduce_mean(nodes, 1)};
}

Tensor boundary_soft(const Tensor& logits, const Tensor& noise, double tau) {
  if (!(tau > 0.0)) throw ValueError("boundary_soft: temperature must be > 0");
  return softmax_last_axis(scale(add(logits, noise), 1.0 / tau));
}

Tensor gumbel_boundaries(const BoundaryModule& module, const Tensor& states,
                         std::uint64_t rng_seed, bool train_mode) {
  if (!(module.tau > 0.0)) throw ValueError("gumbel_boundaries: temperature must be > 0");
  if (states.dim() != 2)
    throw ShapeError("gumbel_boundaries: states must be (T, D), got " +
                     shape_str(states.shape()));
  const Index frames = states.extent(0);
  Tensor logits = add(matmul(states, module.w), module.b);  // (T, 2)
  Tensor y;
  if (train_mode) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Tensor noise = Tensor::zeros({frames, 2});
    for (Index i = 0; i < noise.size(); ++i) {
      const double u = std::clamp(unif(rng), 1e-12, 1.0 - 1e-12);
      noise.data()[i] = -std::log(-std::log(u));
    }
    Tensor soft = boundary_soft(logits, noise, module.tau);
    y = module.straight_through ? straight_through_onehot(soft) : soft;
  } else {
    y = straight_through_onehot(logits);
  }
  // Frame 1 is a boundary by construction.
  Tensor first = Tensor::from_values({1, 2}, {1.0, 0.0});
  if (frames == 1) return first;
  return concat<double>({first, slice(y, 0, 1, frames - 1)}, 0);
}

std::vector<std::pair<Index, Index>> boundary_runs(const Tensor& indicators) {
  if (indicators.dim() != 2 || indicators.extent(1) != 2)
    throw ShapeError("boundary_runs: indicators must be (T, 2), got " +
                     shape_str(indicators.shape()));
  const Index frames = indicators.extent(0);
  std::vector<std::pair<Index, Index>> runs;
  for (Index t = 0; t < frames; ++t) {
    const bool is_boundary = indicators.data()[t * 2] > 0.5 || t == 0;
    if (is_boundary)
      runs.emplace_back(t, 1);
    else
      ++runs.back().second;
  }
  return runs;
}

Tensor segment_context(const GruCell& fwd, const GruCell& bwd, const Tensor& states,
                       const std::vector<std::pair<Index, Index>>& runs) {
  if (runs.empty()) throw ValueError("segment_context: no segments");
  std::vector<Tensor> pooled;
  pooled.reserve(runs.size());
  for (const auto& [start, len] : runs)
    pooled.push_back(reduce_mean(slice(states, 0, start, len), 0, /*keepdim=*/true));
  Tensor ctx = bigru_forward(fwd, bwd, concat(pooled, 0));  // (K, 2*D_h)
  std::vector<Tensor> frames;
  frames.reserve(runs.size());
  for (std::size_t s = 0; s < runs.size(); ++s)
    frames.push_back(repeat_interleave(slice(ctx, 0, static_cast<Index>(s), 1), 0,
                                       runs[s].second));
  return concat(frames, 0);
}

Tensor classify(const ClassifierHead& head, const Tensor& human_summaries,
                const Tensor& seg_ctx) {
  if (human_summaries.dim() != 3)
    throw ShapeError("classify: human summaries must be (T, H, C3), got " +
                     shape_str(human_summaries.shape()));
  if (seg_ctx.dim() != 2 || seg_ctx.extent(0) != human_summaries.extent(0))
    throw ShapeError("classify: segment context " + shape_str(seg_ctx.shape()) +
                     " does not align with summaries " + shape_str(human_summaries.shape()));
  const Index frames = human_summaries.extent(0);
  const Index humans = human_summaries.extent(1);
  Tensor ctx = repeat_interleave(reshape(seg_ctx, {frames, 1, seg_ctx.extent(1)}), 1, humans);
  Tensor x = concat_last_axis(human_summaries, ctx);
  return add(matmul(x, head.w), head.b);
}

std::vector<int> argmax_classes(const Tensor& logits) {
  if (logits.dim() != 3)
    throw ShapeError("argmax_classes: logits must be (T, H, C), got " +
                     shape_str(logits.shape()));
  const Index rows = logits.extent(0) * logits.extent(1);
  const Index classes = logits.extent(2);
  std::vector<int> out(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) {
    const double* z = logits.data() + r * classes;
    Index best = 0;
    for (Index c = 1; c < classes; ++c)
      if (z[c] > z[best]) best = c;
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

SegmentTimeline decode_timeline(const Tensor& logits, Index human) {
  const Index frames = logits.extent(0);
  const Index humans = logits.extent(1);
  if (human < 0 || human >= humans)
    throw ValueError("decode_timeline: human index out of range");
  const std::vector<int> all = argmax_classes(logits);
  std::vector<int> track(static_cast<std::size_t>(frames));
  for (Index t = 0; t < frames; ++t)
    track[static_cast<std::size_t>(t)] = all[static_cast<std::size_t>(t * humans + human)];
  return timeline_from_labels(track);
}

std::vector<SegmentTimeline> decode_timelines(const Tensor& logits) {
  std::vector<SegmentTimeline> out;
  const Index humans = logits.extent(1);
  out.reserve(static_cast<std::size_t>(humans));
  for (Index h = 0; h < humans; ++h) out.push_back(decode_timeline(logits, h));
  return out;
}

}  // namespace cats
