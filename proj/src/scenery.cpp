#include "cats/scenery.hpp"

#include <string>

namespace cats {

namespace {

void check_graph(const SceneryGraph& g, Index& n, Index& c3, bool& masked) {
  if (g.nodes.dim() != 3)
    throw ShapeError("scenery: nodes must be (T, N, C3), got " + shape_str(g.nodes.shape()));
  n = g.nodes.extent(1);
  c3 = g.nodes.extent(2);
  if (g.theta.dim() != 2 || g.theta.extent(0) != c3 || g.theta.extent(1) != c3)
    throw ShapeError("scenery: theta must be (C3, C3) = (" + std::to_string(c3) + ", " +
                     std::to_string(c3) + "), got " + shape_str(g.theta.shape()));
  if (g.attention.size() != 2 * c3)
    throw ShapeError("scenery: attention vector must have 2*C3 = " + std::to_string(2 * c3) +
                     " entries, got " + shape_str(g.attention.shape()));
  if (static_cast<Index>(g.edges.size()) != n * n)
    throw ShapeError("scenery: edge matrix must have " + std::to_string(n * n) + " entries");
  masked = false;
  for (Index i = 0; i < n; ++i) {
    bool any = false;
    for (Index j = 0; j < n; ++j) {
      if (g.edges[static_cast<std::size_t>(i * n + j)])
        any = true;
      else
        masked = true;
    }
    if (!any)
      throw ValueError("scenery: node " + std::to_string(i) +
                       " has an empty neighborhood (all edges false)");
  }
}

// Raw attention rows for all frames: (T, N, N).
Tensor attention_all(const SceneryGraph& g, const Tensor& transformed, Index n, bool masked) {
  Tensor att2 = reshape(g.attention, {2 * g.nodes.extent(2), 1});
  Tensor a_src = slice(att2, 0, 0, g.nodes.extent(2));
  Tensor a_dst = slice(att2, 0, g.nodes.extent(2), g.nodes.extent(2));
  Tensor u = reshape(matmul(transformed, a_src), {g.nodes.extent(0), n});
  Tensor v = reshape(matmul(transformed, a_dst), {g.nodes.extent(0), n});
  Tensor logits = leaky_relu(outer_add(u, v), g.leaky_slope);
  if (!masked) return softmax_last_axis(logits);
  Tensor mask = Tensor::zeros({n, n});
  for (Index i = 0; i < n * n; ++i) mask.data()[i] = g.edges[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  return softmax_last_axis(logits, &mask);
}

}  // namespace

Tensor gat_forward(const SceneryGraph& g) {
  Index n, c3;
  bool masked;
  check_graph(g, n, c3, masked);
  Tensor transformed = matmul(g.nodes, g.theta);  // (T, N, C3)
  Tensor alpha = attention_all(g, transformed, n, masked);
  return tanh(matmul(alpha, transformed));
}

Tensor attention_rows(const SceneryGraph& g, Index t) {
  Index n, c3;
  bool masked;
  check_graph(g, n, c3, masked);
  const Index frames = g.nodes.extent(0);
  if (t < 0 || t >= frames)
    throw ValueError("attention_rows: frame " + std::to_string(t) + " out of range [0, " +
                     std::to_string(frames) + ")");
  SceneryGraph one = g;
  one.nodes = slice(g.nodes, 0, t, 1);
  Tensor transformed = matmul(one.nodes, g.theta);
  return reshape(attention_all(one, transformed, n, masked), {n, n});
}

}  // namespace cats
