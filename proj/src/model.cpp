#include "cats/model.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "cats/geometry.hpp"

namespace cats {

void ModelConfig::validate() const {
  if (gcn_layers < 1) throw ValueError("model: gcn_layers must be >= 1");
  if (c1 < 1 || c2 < 1 || gru_hidden < 1 || dvis < 1 || num_classes < 1)
    throw ValueError("model: widths and class count must be positive");
  if (heads != 1)
    throw ValueError("model: single-head attention only (heads = 1), got " +
                     std::to_string(heads));
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
    throw ValueError("model: leaky_slope must lie in (0,1)");
  if (!(tau_start > 0.0) || !(tau_end > 0.0))
    throw ValueError("model: temperatures must be > 0");
  skeleton.validate();
}

Tensor CatsModel::param(std::mt19937_64& rng, const std::string& name, Shape shape,
                        double init_scale) {
  Tensor t = Tensor::zeros(std::move(shape));
  if (init_scale > 0.0) {
    std::uniform_real_distribution<double> u(-init_scale, init_scale);
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  }
  t.set_requires_grad(true);
  params_.emplace_back(name, t);
  return t;
}

Tensor& CatsModel::named(const std::string& name) {
  for (auto& [n, t] : params_)
    if (n == name) return t;
  throw ValueError("model: unknown parameter '" + name + "'");
}

CatsModel::CatsModel(ModelConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::mt19937_64 rng(init_seed);
  auto linear_scale = [](Index fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };

  const Index c1 = cfg_.c1, c2 = cfg_.c2, c3 = cfg_.c3(), dh = cfg_.gru_hidden;

  for (int cat = 0; cat < 2; ++cat) {
    auto& stack = cat == 0 ? gcn_human_ : gcn_object_;
    const std::string prefix = cat == 0 ? "gcn_human.w" : "gcn_object.w";
    Index in = 4;
    for (int l = 0; l < cfg_.gcn_layers; ++l) {
      stack.push_back(param(rng, prefix + std::to_string(l), {in, c2}, linear_scale(in)));
      in = c2;
    }
  }

  visual_.w1 = param(rng, "visual.w1", {cfg_.dvis, c1}, linear_scale(cfg_.dvis));
  visual_.b1 = param(rng, "visual.b1", {c1}, 0.0);
  visual_.w2 = param(rng, "visual.w2", {c1, c1}, linear_scale(c1));
  visual_.b2 = param(rng, "visual.b2", {c1}, 0.0);

  theta_ = param(rng, "gat.theta", {c3, c3}, linear_scale(c3));
  attention_ = param(rng, "gat.attention", {2 * c3, 1}, linear_scale(2 * c3));

  auto make_cell = [&](const std::string& prefix, Index din) {
    GruCell cell;
    cell.wz = param(rng, prefix + ".wz", {din, dh}, linear_scale(din));
    cell.uz = param(rng, prefix + ".uz", {dh, dh}, linear_scale(dh));
    cell.bz = param(rng, prefix + ".bz", {dh}, 0.0);
    cell.wr = param(rng, prefix + ".wr", {din, dh}, linear_scale(din));
    cell.ur = param(rng, prefix + ".ur", {dh, dh}, linear_scale(dh));
    cell.br = param(rng, prefix + ".br", {dh}, 0.0);
    cell.wh = param(rng, prefix + ".wh", {din, dh}, linear_scale(din));
    cell.uh = param(rng, prefix + ".uh", {dh, dh}, linear_scale(dh));
    cell.bh = param(rng, prefix + ".bh", {dh}, 0.0);
    return cell;
  };
  gru1_fwd_ = make_cell("gru1.fwd", c3);
  gru1_bwd_ = make_cell("gru1.bwd", c3);
  gru2_fwd_ = make_cell("gru2.fwd", 2 * dh);
  gru2_bwd_ = make_cell("gru2.bwd", 2 * dh);

  boundary_.w = param(rng, "boundary.w", {2 * dh, 2}, linear_scale(2 * dh));
  boundary_.b = param(rng, "boundary.b", {2}, 0.0);

  head_.w = param(rng, "classifier.w", {c3 + 2 * dh, cfg_.num_classes},
                  linear_scale(c3 + 2 * dh));
  head_.b = param(rng, "classifier.b", {cfg_.num_classes}, 0.0);
}

Tensor CatsModel::human_adjacency(Index humans) const {
  if (cfg_.independent_entity) return identity_adjacency(humans * cfg_.skeleton.joints);
  return build_human_adjacency(cfg_.skeleton, humans);
}

Tensor CatsModel::object_adjacency(Index objects) const {
  if (cfg_.independent_entity) return identity_adjacency(2 * objects);
  return build_object_adjacency(objects);
}

Tensor CatsModel::fused_nodes(const SceneSequence& seq) {
  if (seq.J != cfg_.skeleton.joints)
    throw ValueError("model: sequence has J=" + std::to_string(seq.J) +
                     " joints but the skeleton expects " + std::to_string(cfg_.skeleton.joints));
  if (seq.dvis != cfg_.dvis)
    throw ValueError("model: sequence visual width " + std::to_string(seq.dvis) +
                     " does not match configured D_vis " + std::to_string(cfg_.dvis));
  GeometricFeatures geo = build_geometry(seq);
  GcnStack human_stack{human_adjacency(seq.H), gcn_human_};
  GcnStack object_stack{object_adjacency(seq.O), gcn_object_};
  Tensor hg = gcn_forward(human_stack, geo.human);
  Tensor og = gcn_forward(object_stack, geo.object);
  auto [hv, ov] = embed_visual(visual_, seq);
  Tensor fused_h = fuse(hg, hv);
  Tensor fused_o = fuse(og, ov);
  return concat<double>({fused_h, fused_o}, 1);
}

CatsModel::Output CatsModel::forward(const SceneSequence& seq, bool train_mode,
                                     std::uint64_t boundary_seed, double tau) {
  seq.validate(cfg_.num_classes);
  Tensor nodes = fused_nodes(seq);
  SceneryGraph graph{nodes, SceneryGraph::full_edges(nodes.extent(1)), theta_, attention_,
                     cfg_.leaky_slope};
  Tensor scene = gat_forward(graph);
  auto [human_summaries, global_summary] = pool_scene(scene, seq.H, seq.J);

  Tensor states = bigru_forward(gru1_fwd_, gru1_bwd_, global_summary);
  BoundaryModule bm = boundary_;
  bm.tau = tau;
  Tensor indicators = gumbel_boundaries(bm, states, boundary_seed, train_mode);
  Output out;
  out.segments = boundary_runs(indicators);
  Tensor ctx = segment_context(gru2_fwd_, gru2_bwd_, states, out.segments);
  out.logits = classify(head_, human_summaries, ctx);

  std::vector<int> truth(static_cast<std::size_t>(seq.T * seq.H));
  for (Index t = 0; t < seq.T; ++t)
    for (Index h = 0; h < seq.H; ++h)
      truth[static_cast<std::size_t>(t * seq.H + h)] = seq.label(h, t);
  out.loss = cross_entropy_mean(
      reshape(out.logits, {seq.T * seq.H, static_cast<Index>(cfg_.num_classes)}), truth);

  const std::vector<int> pred = argmax_classes(out.logits);
  Index hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hits;
  out.frame_accuracy = static_cast<double>(hits) / static_cast<double>(pred.size());
  return out;
}

Tensor CatsModel::attention_matrix(const SceneSequence& seq, Index frame) {
  Tensor nodes = fused_nodes(seq);
  SceneryGraph graph{nodes, SceneryGraph::full_edges(nodes.extent(1)), theta_, attention_,
                     cfg_.leaky_slope};
  return attention_rows(graph, frame);
}

void CatsModel::zero_grads() {
  for (auto& [name, t] : params_) t.zero_grad();
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON with an architecture block and full-precision parameters.

namespace {

nlohmann::json arch_json(const ModelConfig& c) {
  return nlohmann::json{{"gcn_layers", c.gcn_layers},
                        {"c1", c.c1},
                        {"c2", c.c2},
                        {"gru_hidden", c.gru_hidden},
                        {"heads", c.heads},
                        {"leaky_slope", c.leaky_slope},
                        {"independent_entity", c.independent_entity},
                        {"joints", c.skeleton.joints},
                        {"skeleton", c.skeleton.to_string()},
                        {"dvis", c.dvis},
                        {"num_classes", c.num_classes}};
}

}  // namespace

void CatsModel::save_checkpoint(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "cats-checkpoint";
  j["version"] = 1;
  j["arch"] = arch_json(cfg_);
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, t] : params_) {
    params[name] = {{"shape", t.shape()},
                    {"values", std::vector<double>(t.data(), t.data() + t.size())}};
  }
  j["params"] = std::move(params);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f << j.dump() << "\n";
  f.flush();
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

CatsModel CatsModel::load_checkpoint(const std::string& path, const ModelConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValueError("load_checkpoint: malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "cats-checkpoint")
    throw ValueError("load_checkpoint: " + path + " is not a checkpoint file");
  const nlohmann::json want = arch_json(cfg);
  const nlohmann::json have = j.at("arch");
  for (auto it = want.begin(); it != want.end(); ++it) {
    if (!have.contains(it.key()) || have.at(it.key()) != it.value())
      throw ValueError("load_checkpoint: architecture mismatch on '" + it.key() +
                       "' (checkpoint " +
                       (have.contains(it.key()) ? have.at(it.key()).dump() : "<missing>") +
                       ", config " + it.value().dump() + ")");
  }
  CatsModel model(cfg, /*init_seed=*/0);
  const nlohmann::json& params = j.at("params");
  for (auto& [name, t] : model.params_) {
    if (!params.contains(name))
      throw ValueError("load_checkpoint: missing parameter '" + name + "'");
    const nlohmann::json& p = params.at(name);
    const Shape shape = p.at("shape").get<Shape>();
    if (shape != t.shape())
      throw ValueError("load_checkpoint: parameter '" + name + "' has shape " +
                       shape_str(shape) + ", expected " + shape_str(t.shape()));
    const std::vector<double> values = p.at("values").get<std::vector<double>>();
    if (static_cast<Index>(values.size()) != t.size())
      throw ValueError("load_checkpoint: parameter '" + name + "' has wrong value count");
    std::copy(values.begin(), values.end(), t.data());
  }
  return model;
}

}  // namespace cats
