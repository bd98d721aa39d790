#pragma once

// Full CATS pipeline: category GCNs + visual MLP fusion feeding the scenery
// attention graph, then the temporal head. Owns all learnable parameters;
// forward graphs are rebuilt per video on whatever tape is active.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cats/fusion.hpp"
#include "cats/scene.hpp"
#include "cats/scenery.hpp"
#include "cats/temporal.hpp"
#include "cats/tensor.hpp"

namespace cats {

struct ModelConfig {
  int gcn_layers = 4;
  Index c1 = 512;  // embedded visual width
  Index c2 = 256;  // embedded geometric width
  Index gru_hidden = 256;
  int heads = 1;  // single-head attention; kept as an explicit knob
  double leaky_slope = 0.2;
  double tau_start = 1.0, tau_end = 0.5;
  bool independent_entity = false;  // ablation: identity adjacency per category
  SkeletonSpec skeleton = SkeletonSpec::default_topology(15);
  Index dvis = 16;
  int num_classes = 4;

  Index c3() const { return c1 + c2; }  // fused width, always derived
  void validate() const;
};

class CatsModel {
 public:
  CatsModel(ModelConfig cfg, std::uint64_t init_seed);

  struct Output {
    Tensor logits;  // (T, H, num_classes)
    Tensor loss;    // scalar
    double frame_accuracy = 0.0;
    std::vector<std::pair<Index, Index>> segments;  // boundary runs, 0-based
  };

  // Training mode draws Gumbel boundary noise from boundary_seed and uses
  // temperature tau; eval mode is deterministic and ignores both.
  Output forward(const SceneSequence& seq, bool train_mode, std::uint64_t boundary_seed,
                 double tau);

  // Scenery attention of one frame, (N, N); diagnostics for rendering.
  Tensor attention_matrix(const SceneSequence& seq, Index frame);

  // The adjacency matrices forward() uses for this sequence shape.
  Tensor human_adjacency(Index humans) const;
  Tensor object_adjacency(Index objects) const;

  std::vector<std::pair<std::string, Tensor>>& parameters() { return params_; }
  const ModelConfig& config() const { return cfg_; }
  void zero_grads();

  void save_checkpoint(const std::string& path) const;
  // Loads parameter values into a model built from `cfg`; throws ValueError
  // when the stored architecture disagrees with cfg.
  static CatsModel load_checkpoint(const std::string& path, const ModelConfig& cfg);

 private:
  Tensor fused_nodes(const SceneSequence& seq);  // (T, HJ+2O, C3)
  Tensor param(std::mt19937_64& rng, const std::string& name, Shape shape, double init_scale);
  Tensor& named(const std::string& name);

  ModelConfig cfg_;
  std::vector<std::pair<std::string, Tensor>> params_;

  std::vector<Tensor> gcn_human_, gcn_object_;
  VisualEmbedder visual_;
  Tensor theta_, attention_;
  GruCell gru1_fwd_, gru1_bwd_, gru2_fwd_, gru2_bwd_;
  BoundaryModule boundary_;
  ClassifierHead head_;
};

}  // namespace cats
