#include "cats/fusion.hpp"

#include <sstream>

namespace cats {

SkeletonSpec SkeletonSpec::default_topology(Index joints) {
  SkeletonSpec s;
  s.joints = joints;
  if (joints == 15) {
    // 0 head, 1 neck, 2-4 right arm, 5-7 left arm, 8 torso,
    // 9-11 right leg, 12-14 left leg.
    s.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4},  {1, 5},  {5, 6},   {6, 7},
               {1, 8}, {8, 9}, {9, 10}, {10, 11}, {8, 12}, {12, 13}, {13, 14}};
  } else {
    for (Index j = 0; j + 1 < joints; ++j)
      s.edges.emplace_back(static_cast<int>(j), static_cast<int>(j + 1));
  }
  return s;
}

SkeletonSpec SkeletonSpec::parse(const std::string& text, Index joints) {
  if (text.empty() || text == "default") return default_topology(joints);
  SkeletonSpec s;
  s.joints = joints;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos)
      throw ValueError("skeleton: malformed edge '" + item + "' (expected a-b)");
    try {
      s.edges.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
    } catch (const std::exception&) {
      throw ValueError("skeleton: malformed edge '" + item + "' (expected a-b)");
    }
  }
  s.validate();
  return s;
}

std::string SkeletonSpec::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i) os << ',';
    os << edges[i].first << '-' << edges[i].second;
  }
  return os.str();
}

void SkeletonSpec::validate() const {
  if (joints < 1) throw ValueError("skeleton: joint count must be positive");
  for (const auto& [a, b] : edges)
    if (a < 0 || b < 0 || a >= joints || b >= joints)
      throw ValueError("skeleton: edge " + std::to_string(a) + "-" + std::to_string(b) +
                       " out of range for " + std::to_string(joints) + " joints");
}

namespace {

Tensor row_normalized_from_neighbors(Index n, const std::vector<std::vector<Index>>& nbrs) {
  Tensor a = Tensor::zeros({n, n});
  for (Index i = 0; i < n; ++i) {
    const double w = 1.0 / static_cast<double>(nbrs[static_cast<std::size_t>(i)].size());
    for (Index j : nbrs[static_cast<std::size_t>(i)]) a.data()[i * n + j] = w;
  }
  return a;
}

}  // namespace

Tensor build_human_adjacency(const SkeletonSpec& skeleton, Index humans) {
  skeleton.validate();
  if (humans < 1) throw ValueError("build_human_adjacency: need at least one human");
  const Index J = skeleton.joints, n = humans * J;
  std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) nbrs[static_cast<std::size_t>(i)].push_back(i);  // self-loop
  for (Index h = 0; h < humans; ++h)
    for (const auto& [a, b] : skeleton.edges) {
      const Index ia = h * J + a, ib = h * J + b;
      nbrs[static_cast<std::size_t>(ia)].push_back(ib);
      nbrs[static_cast<std::size_t>(ib)].push_back(ia);
    }
  return row_normalized_from_neighbors(n, nbrs);
}

Tensor build_object_adjacency(Index objects) {
  if (objects < 1) throw ValueError("build_object_adjacency: need at least one object");
  const Index n = 2 * objects;
  Tensor a = Tensor::zeros({n, n});
  for (Index o = 0; o < objects; ++o)
    for (Index u = 0; u < 2; ++u)
      for (Index v = 0; v < 2; ++v) a.data()[(2 * o + u) * n + (2 * o + v)] = 0.5;
  return a;
}

Tensor identity_adjacency(Index nodes) {
  Tensor a = Tensor::zeros({nodes, nodes});
  for (Index i = 0; i < nodes; ++i) a.data()[i * nodes + i] = 1.0;
  return a;
}

Tensor gcn_forward(const GcnStack& stack, const Tensor& x) {
  const Index n = stack.adjacency.extent(0);
  if (stack.adjacency.dim() != 2 || stack.adjacency.extent(1) != n)
    throw ShapeError("gcn_forward: adjacency must be square, got " +
                     shape_str(stack.adjacency.shape()));
  if (x.dim() != 3 || x.extent(1) != n)
    throw ShapeError("gcn_forward: node axis of " + shape_str(x.shape()) +
                     " does not match adjacency extent " + std::to_string(n));
  if (stack.weights.empty()) throw ValueError("gcn_forward: no layers");
  Tensor h = x;
  for (const Tensor& w : stack.weights) h = tanh(matmul(matmul(stack.adjacency, h), w));
  return h;
}

Tensor mlp_embed(const VisualEmbedder& emb, const Tensor& x) {
  return add(matmul(tanh(add(matmul(x, emb.w1), emb.b1)), emb.w2), emb.b2);
}

std::pair<Tensor, Tensor> embed_visual(const VisualEmbedder& emb, const SceneSequence& seq) {
  if (seq.dvis == 0 || seq.visual_human.empty() || (seq.O > 0 && seq.visual_object.empty()))
    throw ValueError("embed_visual: sequence carries no visual features");
  if (emb.w1.extent(0) != seq.dvis)
    throw ShapeError("embed_visual: embedder expects D_vis " + std::to_string(emb.w1.extent(0)) +
                     ", sequence has " + std::to_string(seq.dvis));
  Tensor vh = Tensor::from_values({seq.T, seq.H, seq.dvis},
                                  std::vector<double>(seq.visual_human));
  Tensor vo = Tensor::from_values({seq.T, seq.O, seq.dvis},
                                  std::vector<double>(seq.visual_object));
  Tensor hv = repeat_interleave(mlp_embed(emb, vh), 1, seq.J);
  Tensor ov = repeat_interleave(mlp_embed(emb, vo), 1, 2);
  return {hv, ov};
}

Tensor fuse(const Tensor& geo, const Tensor& vis) {
  return concat_last_axis(geo, vis);
}

}  // namespace cats
