#include "cats/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "cats/render.hpp"

namespace fs = std::filesystem;

namespace cats {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Adam::Adam(std::vector<std::pair<std::string, Tensor>>& params, double lr, double grad_clip)
    : params_(params), lr_(lr), clip_(grad_clip) {
  for (auto& [name, p] : params_) {
    m_.push_back(Eigen::ArrayXd::Zero(p.size()));
    v_.push_back(Eigen::ArrayXd::Zero(p.size()));
  }
}

void Adam::step() {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  double sq = 0.0;
  for (auto& [name, p] : params_)
    if (p.has_grad()) sq += (p.grad() * p.grad()).sum();
  const double norm = std::sqrt(sq);
  const double scale = (clip_ > 0.0 && norm > clip_) ? clip_ / norm : 1.0;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].second;
    if (!p.has_grad()) continue;
    const Eigen::ArrayXd g = p.grad() * scale;
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    p.values() -= lr_ * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + eps);
  }
}

std::vector<SceneSequence> obtain_dataset(const RunConfig& cfg) {
  if (!cfg.dataset_path.empty()) return load_dataset(cfg.dataset_path);
  return synthesize(cfg.scenario);
}

F1Report::Fold evaluate_fold(CatsModel& model, const std::vector<SceneSequence>& data,
                             const DatasetSplit& split, int fold_index,
                             const std::vector<double>& thresholds, int background_class) {
  F1Report::Fold fold;
  fold.index = fold_index;
  fold.at.resize(thresholds.size());
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) fold.at[ti].k = thresholds[ti];
  for (std::int64_t id : split.test_ids) {
    const SceneSequence* seq = find_video(data, id);
    if (!seq) throw ValueError("evaluate_fold: unknown video id " + std::to_string(id));
    CatsModel::Output out = model.forward(*seq, /*train_mode=*/false, 0, 1.0);
    for (Index h = 0; h < seq->H; ++h) {
      const SegmentTimeline pred = decode_timeline(out.logits, h);
      const SegmentTimeline gt = timeline_from_labels(seq->label_track(h), background_class);
      for (std::size_t ti = 0; ti < thresholds.size(); ++ti)
        fold.at[ti].add(f1_at_k(pred, gt, thresholds[ti]));
    }
  }
  return fold;
}

namespace {

double val_f1_at_10(const F1Report::Fold& fold) {
  return 100.0 * fold.at[0].counts.f1();
}

// Deterministic (eval-mode) frame accuracy over a video list.
double eval_frame_accuracy(CatsModel& model, const std::vector<SceneSequence>& data,
                           const std::vector<std::int64_t>& ids) {
  double acc = 0.0;
  for (std::int64_t id : ids) {
    const SceneSequence* seq = find_video(data, id);
    acc += model.forward(*seq, /*train_mode=*/false, 0, 1.0).frame_accuracy;
  }
  return ids.empty() ? 0.0 : acc / static_cast<double>(ids.size());
}

void render_fold_examples(CatsModel& model, const std::vector<SceneSequence>& data,
                          const DatasetSplit& split, const fs::path& dir,
                          int background_class) {
  if (split.test_ids.empty()) return;
  const SceneSequence* seq = find_video(data, split.test_ids.front());
  if (!seq) return;
  CatsModel::Output out = model.forward(*seq, false, 0, 1.0);
  for (Index h = 0; h < seq->H; ++h) {
    const SegmentTimeline pred = decode_timeline(out.logits, h);
    const SegmentTimeline gt = timeline_from_labels(seq->label_track(h), background_class);
    write_text_file((dir / ("timeline_h" + std::to_string(h) + ".svg")).string(),
                    render_timeline_svg(gt, pred));
    write_text_file((dir / ("timeline_h" + std::to_string(h) + ".txt")).string(),
                    render_timeline_text(gt, pred));
  }
  const Tensor alpha = model.attention_matrix(*seq, seq->T / 2);
  write_text_file((dir / "attention.svg").string(), render_attention_svg(alpha));
}

}  // namespace

RunArtifacts run_train(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.finalize();
  if (!cfg.seed_set) throw ConfigError("train: --seed is required");

  const std::vector<SceneSequence> data = obtain_dataset(cfg);
  for (const SceneSequence& s : data) s.validate(cfg.scenario.num_classes);
  const std::vector<DatasetSplit> folds = make_folds(data, parse_fold_policy(cfg.fold_policy));

  RunArtifacts artifacts;
  artifacts.dir = cfg.out_dir;
  artifacts.fold_checksum = folds_checksum(folds);
  fs::create_directories(cfg.out_dir);
  write_text_file((fs::path(cfg.out_dir) / "config.ini").string(), cfg.snapshot());

  const std::vector<double>& ks = standard_thresholds();
  std::vector<F1Report> fold_reports;

  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    const DatasetSplit& split = folds[fi];
    const fs::path fold_dir = fs::path(cfg.out_dir) / ("fold_" + std::to_string(fi));
    fs::create_directories(fold_dir);

    CatsModel model(cfg.model, mix_seed(cfg.seed, 1000 + fi));
    Adam opt(model.parameters(), cfg.lr, cfg.grad_clip);
    std::mt19937_64 train_rng(mix_seed(cfg.seed, 2000 + fi));

    FoldArtifacts fa;
    fa.fold_index = static_cast<int>(fi);
    fa.checkpoint_path = (fold_dir / "checkpoint.json").string();
    fa.loss_log_path = (fold_dir / "loss_log.txt").string();

    std::vector<std::string> log_lines;
    // Untrained baseline doubles as the epochs=0 artifact.
    F1Report::Fold val = evaluate_fold(model, data, split, static_cast<int>(fi), ks,
                                       cfg.background_class);
    fa.best_val_f1 = val_f1_at_10(val);
    model.save_checkpoint(fa.checkpoint_path);

    std::vector<std::int64_t> order = split.train_ids;
    const double tau_span = cfg.model.tau_end - cfg.model.tau_start;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      const double tau = cfg.epochs <= 1
                             ? cfg.model.tau_start
                             : cfg.model.tau_start +
                                   tau_span * (static_cast<double>(epoch) /
                                               static_cast<double>(cfg.epochs - 1));
      std::shuffle(order.begin(), order.end(), train_rng);
      double loss_sum = 0.0, acc_sum = 0.0;
      for (std::int64_t id : order) {
        const SceneSequence* seq = find_video(data, id);
        const std::uint64_t bseed = train_rng();
        Tape tape;
        CatsModel::Output out;
        {
          TapeScope scope(tape);
          out = model.forward(*seq, /*train_mode=*/true, bseed, tau);
          if (!std::isfinite(out.loss.item()))
            throw NumericError("train: non-finite loss at fold " + std::to_string(fi) +
                               ", epoch " + std::to_string(epoch) + ", video " +
                               std::to_string(id) + " (tau=" + std::to_string(tau) + ")");
          model.zero_grads();
          backward(out.loss);
        }
        opt.step();
        loss_sum += out.loss.item();
        acc_sum += out.frame_accuracy;
      }
      const double mean_loss = loss_sum / static_cast<double>(order.size());
      const double sampled_acc = acc_sum / static_cast<double>(order.size());
      const double train_acc = eval_frame_accuracy(model, data, split.train_ids);
      fa.best_train_acc = std::max(fa.best_train_acc, train_acc);
      fa.epochs_run = epoch + 1;

      val = evaluate_fold(model, data, split, static_cast<int>(fi), ks, cfg.background_class);
      const double vf1 = val_f1_at_10(val);
      if (vf1 > fa.best_val_f1) {
        fa.best_val_f1 = vf1;
        model.save_checkpoint(fa.checkpoint_path);
      }

      char line[224];
      std::snprintf(
          line, sizeof(line),
          "epoch=%04d loss=%.12g train_acc=%.6f sampled_acc=%.6f val_f1_10=%.6f tau=%.6f",
          epoch, mean_loss, train_acc, sampled_acc, vf1, tau);
      log_lines.emplace_back(line);

      if (cfg.early_stop_train_acc > 0.0 && train_acc >= cfg.early_stop_train_acc) break;
    }

    std::string log_text;
    for (const std::string& l : log_lines) log_text += l + "\n";
    write_text_file(fa.loss_log_path, log_text);

    // Final fold report comes from the best-validation checkpoint.
    CatsModel best = CatsModel::load_checkpoint(fa.checkpoint_path, cfg.model);
    F1Report rep;
    rep.thresholds = ks;
    rep.folds.push_back(
        evaluate_fold(best, data, split, static_cast<int>(fi), ks, cfg.background_class));
    fa.report = rep;
    fold_reports.push_back(rep);
    render_fold_examples(best, data, split, fold_dir, cfg.background_class);
    write_text_file((fold_dir / "report.txt").string(),
                    rep.table("fold " + std::to_string(fi)));
    artifacts.folds.push_back(std::move(fa));
  }

  artifacts.aggregate = aggregate_folds(fold_reports);
  write_text_file((fs::path(cfg.out_dir) / "report.txt").string(),
                  artifacts.aggregate.table("CATS (" + cfg.fold_policy + ")"));
  write_text_file((fs::path(cfg.out_dir) / "records.jsonl").string(),
                  artifacts.aggregate.records());
  return artifacts;
}

F1Report evaluate_run_dir(const RunConfig& cfg_in, const std::string& run_dir) {
  RunConfig cfg = cfg_in;
  cfg.finalize();
  const std::vector<SceneSequence> data = obtain_dataset(cfg);
  const std::vector<DatasetSplit> folds = make_folds(data, parse_fold_policy(cfg.fold_policy));
  const std::vector<double>& ks = standard_thresholds();
  std::vector<F1Report> reports;
  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    const fs::path ckpt = fs::path(run_dir) / ("fold_" + std::to_string(fi)) / "checkpoint.json";
    if (!fs::exists(ckpt))
      throw ValueError("eval: missing checkpoint " + ckpt.string());
    CatsModel model = CatsModel::load_checkpoint(ckpt.string(), cfg.model);
    F1Report rep;
    rep.thresholds = ks;
    rep.folds.push_back(evaluate_fold(model, data, folds[fi], static_cast<int>(fi), ks,
                                      cfg.background_class));
    reports.push_back(std::move(rep));
  }
  return aggregate_folds(reports);
}

F1Report evaluate_checkpoint(const RunConfig& cfg_in, const std::string& checkpoint_path,
                             int fold_index) {
  RunConfig cfg = cfg_in;
  cfg.finalize();
  const std::vector<SceneSequence> data = obtain_dataset(cfg);
  const std::vector<DatasetSplit> folds = make_folds(data, parse_fold_policy(cfg.fold_policy));
  if (fold_index < 0 || fold_index >= static_cast<int>(folds.size()))
    throw ValueError("eval: fold index " + std::to_string(fold_index) + " out of range");
  CatsModel model = CatsModel::load_checkpoint(checkpoint_path, cfg.model);
  const std::vector<double>& ks = standard_thresholds();
  F1Report rep;
  rep.thresholds = ks;
  rep.folds.push_back(evaluate_fold(model, data, folds[static_cast<std::size_t>(fold_index)],
                                    fold_index, ks, cfg.background_class));
  return rep;
}

std::vector<AblationRow> ablate_gcn_depth(const RunConfig& cfg, const std::vector<int>& depths) {
  std::vector<AblationRow> rows;
  for (int d : depths) {
    RunConfig variant = cfg;
    variant.model.gcn_layers = d;
    variant.out_dir = (fs::path(cfg.out_dir) / ("depth_" + std::to_string(d))).string();
    RunArtifacts art = run_train(variant);
    rows.push_back({std::to_string(d) + "-layer GCN", art.aggregate, art.fold_checksum});
  }
  return rows;
}

std::vector<AblationRow> ablate_independent_entity(const RunConfig& cfg) {
  std::vector<AblationRow> rows;
  for (int indep = 1; indep >= 0; --indep) {
    RunConfig variant = cfg;
    variant.model.independent_entity = indep != 0;
    variant.out_dir =
        (fs::path(cfg.out_dir) / (indep ? "independent_entity" : "cats")).string();
    RunArtifacts art = run_train(variant);
    rows.push_back({indep ? "Independent-entity architecture" : "CATS", art.aggregate,
                    art.fold_checksum});
  }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows,
                           const std::vector<double>& thresholds) {
  std::ostringstream os;
  char buf[64];
  os << "model                             ";
  for (double k : thresholds) {
    std::snprintf(buf, sizeof(buf), "F1@%-13.0f", k * 100);
    os << buf;
  }
  os << "fold_checksum\n";
  for (const AblationRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-34s", r.name.c_str());
    os << buf;
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      std::snprintf(buf, sizeof(buf), "%-16s",
                    format_mean_std(r.report.mean_f1(ti), r.report.stddev_f1(ti)).c_str());
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(r.fold_checksum));
    os << buf << "\n";
  }
  return os.str();
}

}  // namespace cats
