#pragma once

// Category-level processing: per-category GCN over geometric features,
// shared MLP embedding of per-entity visual vectors, and concatenative
// fusion into C3 = C1 + C2 channels (geometric channels first).
//
// Adjacency is intra-category and intra-entity only: skeleton edges within
// each person, the two-corner clique within each object, self-loops
// everywhere, rows normalized to sum 1. Cross-entity relations belong to the
// scenery graph.

#include <string>
#include <utility>
#include <vector>

#include "cats/scene.hpp"
#include "cats/tensor.hpp"

namespace cats {

struct SkeletonSpec {
  Index joints = 15;
  std::vector<std::pair<int, int>> edges;

  // J = 15 gives a head-neck-torso chain with four limbs; other J fall back
  // to a simple chain 0-1-...-(J-1).
  static SkeletonSpec default_topology(Index joints = 15);

  // Parses an edge list like "0-1,1-2,2-3". "default" (or empty) yields
  // default_topology(joints).
  static SkeletonSpec parse(const std::string& text, Index joints);

  std::string to_string() const;
  void validate() const;
};

// Block-diagonal per-person skeleton graph, (H*J, H*J), row-normalized with
// self-loops. No coupling between persons.
Tensor build_human_adjacency(const SkeletonSpec& skeleton, Index humans);

// Per-object 2-node corner clique with self-loops, (2*O, 2*O); every entry of
// an object's block is 0.5.
Tensor build_object_adjacency(Index objects);

// Identity adjacency: the independent-entity ablation (no intra-category
// message passing).
Tensor identity_adjacency(Index nodes);

struct GcnStack {
  Tensor adjacency;             // (N, N), constant
  std::vector<Tensor> weights;  // layer l maps extent(l) -> extent(l+1)
};

// Applies h <- tanh(A h W) once per layer, frame-wise; x is (T, N, F0).
Tensor gcn_forward(const GcnStack& stack, const Tensor& x);

// One shared two-layer MLP (tanh hidden) mapping D_vis -> C1.
struct VisualEmbedder {
  Tensor w1, b1;  // (D_vis, C1), (C1)
  Tensor w2, b2;  // (C1, C1), (C1)
};

Tensor mlp_embed(const VisualEmbedder& emb, const Tensor& x);  // (..., E, D_vis) -> (..., E, C1)

// Embeds each entity's per-frame visual vector once and replicates it across
// that entity's node rows: J rows per human, 2 per object.
// Returns (HV', OV') of shapes (T, H*J, C1) and (T, 2*O, C1).
std::pair<Tensor, Tensor> embed_visual(const VisualEmbedder& emb, const SceneSequence& seq);

// concat(geo, vis) on the channel axis, geometric channels first.
Tensor fuse(const Tensor& geo, const Tensor& vis);

struct FusedCategoryFeatures {
  Tensor human;   // (T, H*J, C3)
  Tensor object;  // (T, 2*O, C3)
};

}  // namespace cats
