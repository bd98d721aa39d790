#pragma once

// Scenery interactive graph: one graph-attention layer over all HJ + 2O
// fused nodes per frame. Edges are shared across frames (fully connected by
// default, self-edges included); attention coefficients are recomputed per
// frame. Masked pairs get -inf logits and therefore exactly zero attention.

#include <cstdint>
#include <vector>

#include "cats/tensor.hpp"

namespace cats {

struct SceneryGraph {
  Tensor nodes;                     // (T, N, C3); humans occupy [0, HJ), objects [HJ, N)
  std::vector<std::uint8_t> edges;  // N*N row-major booleans, identical across frames
  Tensor theta;                     // (C3, C3) node transform
  Tensor attention;                 // (2*C3, 1) attention vector
  double leaky_slope = 0.2;

  static std::vector<std::uint8_t> full_edges(Index nodes) {
    return std::vector<std::uint8_t>(static_cast<std::size_t>(nodes * nodes), 1);
  }
  static std::vector<std::uint8_t> self_edges(Index nodes) {
    std::vector<std::uint8_t> e(static_cast<std::size_t>(nodes * nodes), 0);
    for (Index i = 0; i < nodes; ++i) e[static_cast<std::size_t>(i * nodes + i)] = 1;
    return e;
  }
};

// Per frame t and node i: logits e_ij = LeakyReLU(W^T [Theta v_i || Theta v_j])
// over the neighborhood, alpha_i = softmax of the row, output
// tanh(sum_j alpha_ij Theta v_j). Returns (T, N, C3).
Tensor gat_forward(const SceneryGraph& g);

// The alpha matrix of one frame (0-based index), for diagnostics/rendering.
// Each row sums to 1 over unmasked entries; masked entries are exactly 0.
Tensor attention_rows(const SceneryGraph& g, Index t);

}  // namespace cats
