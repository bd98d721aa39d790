#pragma once

// Training loop, per-fold evaluation, and the ablation runners. Everything
// here is deterministic given (config, seed): fixed seed mixing, fixed
// formatting, no wall-clock anywhere.

#include <cstdint>
#include <string>
#include <vector>

#include "cats/config.hpp"
#include "cats/data.hpp"
#include "cats/metrics.hpp"
#include "cats/model.hpp"

namespace cats {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Adam {
 public:
  Adam(std::vector<std::pair<std::string, Tensor>>& params, double lr, double grad_clip);
  void step();

 private:
  std::vector<std::pair<std::string, Tensor>>& params_;
  double lr_, clip_;
  long long t_ = 0;
  std::vector<Eigen::ArrayXd> m_, v_;
};

// Evaluates an eval-mode model over the split's test videos, pooling match
// counts across videos and humans.
F1Report::Fold evaluate_fold(CatsModel& model, const std::vector<SceneSequence>& data,
                             const DatasetSplit& split, int fold_index,
                             const std::vector<double>& thresholds, int background_class);

struct FoldArtifacts {
  int fold_index = 0;
  F1Report report;  // single fold, from the best-validation checkpoint
  double best_train_acc = 0.0;
  double best_val_f1 = 0.0;
  int epochs_run = 0;
  std::string checkpoint_path;
  std::string loss_log_path;
};

struct RunArtifacts {
  std::string dir;
  F1Report aggregate;
  std::vector<FoldArtifacts> folds;
  std::uint64_t fold_checksum = 0;
};

// Loads cfg.dataset_path when set, otherwise synthesizes cfg.scenario.
std::vector<SceneSequence> obtain_dataset(const RunConfig& cfg);

RunArtifacts run_train(const RunConfig& cfg);

// Evaluates the per-fold checkpoints under a run directory produced by
// run_train (fold_<i>/checkpoint.json), aggregated across folds.
F1Report evaluate_run_dir(const RunConfig& cfg, const std::string& run_dir);

// Evaluates one checkpoint file on one fold of the config's dataset.
F1Report evaluate_checkpoint(const RunConfig& cfg, const std::string& checkpoint_path,
                             int fold_index);

struct AblationRow {
  std::string name;
  F1Report report;
  std::uint64_t fold_checksum = 0;
};

std::vector<AblationRow> ablate_gcn_depth(const RunConfig& cfg, const std::vector<int>& depths);
std::vector<AblationRow> ablate_independent_entity(const RunConfig& cfg);
std::string ablation_table(const std::vector<AblationRow>& rows,
                           const std::vector<double>& thresholds);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace cats
