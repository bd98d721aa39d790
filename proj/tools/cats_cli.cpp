// cats: synthetic-data HOI recognition experiments.
//
// Subcommands: synth, train, eval, ablate-depth, ablate-independent, render.
// Configuration comes from an INI-style file (--config=...) plus --key=value
// overrides; --seed is mandatory for training. Errors print one
// machine-parsable line "E_<CODE>: <text>" to stderr and exit nonzero.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cats/config.hpp"
#include "cats/render.hpp"
#include "cats/train.hpp"

namespace fs = std::filesystem;
using namespace cats;

namespace {

constexpr const char* kUsage = R"(usage: cats <subcommand> [--config=FILE] [--key=value ...]

subcommands:
  synth               generate a synthetic dataset      (--out=FILE required)
  train               train across cross-validation folds (--seed=N required)
  eval                evaluate checkpoints               (--checkpoint=RUN_DIR | FILE --fold=I)
  ablate-depth        GCN depth ablation                 (--depths=1,2,3,4,5)
  ablate-independent  independent-entity vs CATS ablation
  render              render timelines + attention       (--checkpoint=FILE --video=ID --out=DIR)

configuration keys (INI sections are organizational; --key=value overrides any):
  scenario: preset num_subjects humans objects_min objects_max joints frames_min
            frames_max num_classes videos_per_group motion_noise visual_noise
            occlusion_prob sync_humans dvis scenario_seed dur_min dur_max
  model:    gcn_layers c1 c2 gru_hidden heads leaky_slope tau_start tau_end
            independent_entity skeleton
  train:    epochs lr grad_clip early_stop_train_acc seed fold_policy background_class
  io:       dataset out_dir
)";

struct CliArgs {
  RunConfig cfg;
  std::string out, checkpoint, depths = "1,2,3,4,5";
  std::int64_t video = -1;
  int fold = -1;
  Index frame = -1;
  double k = 0.5;
};

CliArgs parse_cli(const std::vector<std::string>& args) {
  CliArgs a;
  // --config loads first so later flags override file values.
  for (const auto& [key, value] : parse_flag_overrides(args))
    if (key == "config") a.cfg = RunConfig::from_file(value);
  for (const auto& [key, value] : parse_flag_overrides(args)) {
    if (key == "config") continue;
    if (key == "out")
      a.out = value;
    else if (key == "checkpoint")
      a.checkpoint = value;
    else if (key == "depths")
      a.depths = value;
    else if (key == "video")
      a.video = std::stoll(value);
    else if (key == "fold")
      a.fold = std::stoi(value);
    else if (key == "frame")
      a.frame = std::stoll(value);
    else if (key == "k")
      a.k = std::stod(value);
    else
      a.cfg.apply_override(key, value);
  }
  return a;
}

int cmd_synth(CliArgs& a) {
  if (a.out.empty()) throw ConfigError("synth: --out=FILE is required");
  a.cfg.finalize();
  const auto data = synthesize(a.cfg.scenario);
  if (const fs::path dir = fs::path(a.out).parent_path(); !dir.empty())
    fs::create_directories(dir);
  save_dataset(a.out, data);
  std::cout << "wrote " << data.size() << " videos to " << a.out << "\n";
  return 0;
}

int cmd_train(CliArgs& a) {
  if (!a.cfg.seed_set) throw ConfigError("train: --seed=N is required");
  if (!a.out.empty()) a.cfg.out_dir = a.out;
  RunArtifacts art = run_train(a.cfg);
  std::cout << art.aggregate.table("CATS (" + a.cfg.fold_policy + ")");
  std::cout << "run directory: " << art.dir << "\n";
  return 0;
}

int cmd_eval(CliArgs& a) {
  if (a.checkpoint.empty()) throw ConfigError("eval: --checkpoint=PATH is required");
  F1Report rep;
  if (fs::is_directory(a.checkpoint)) {
    rep = evaluate_run_dir(a.cfg, a.checkpoint);
  } else {
    if (a.fold < 0)
      throw ConfigError("eval: --fold=I is required with a single checkpoint file");
    rep = evaluate_checkpoint(a.cfg, a.checkpoint, a.fold);
  }
  std::cout << rep.table("evaluation");
  std::cout << rep.records();
  return 0;
}

std::vector<int> parse_depths(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw ConfigError("ablate-depth: empty --depths list");
  return out;
}

int cmd_ablate_depth(CliArgs& a) {
  if (!a.cfg.seed_set) throw ConfigError("ablate-depth: --seed=N is required");
  if (!a.out.empty()) a.cfg.out_dir = a.out;
  const auto rows = ablate_gcn_depth(a.cfg, parse_depths(a.depths));
  const std::string table = ablation_table(rows, standard_thresholds());
  fs::create_directories(a.cfg.out_dir);
  write_text_file((fs::path(a.cfg.out_dir) / "ablation_depth.txt").string(), table);
  std::cout << table;
  return 0;
}

int cmd_ablate_independent(CliArgs& a) {
  if (!a.cfg.seed_set) throw ConfigError("ablate-independent: --seed=N is required");
  if (!a.out.empty()) a.cfg.out_dir = a.out;
  const auto rows = ablate_independent_entity(a.cfg);
  const std::string table = ablation_table(rows, standard_thresholds());
  fs::create_directories(a.cfg.out_dir);
  write_text_file((fs::path(a.cfg.out_dir) / "ablation_independent.txt").string(), table);
  std::cout << table;
  return 0;
}

int cmd_render(CliArgs& a) {
  if (a.checkpoint.empty()) throw ConfigError("render: --checkpoint=FILE is required");
  if (a.out.empty()) throw ConfigError("render: --out=DIR is required");
  a.cfg.finalize();
  const auto data = obtain_dataset(a.cfg);
  const SceneSequence* seq = a.video < 0 ? &data.front() : find_video(data, a.video);
  if (!seq) throw ValueError("render: unknown video id " + std::to_string(a.video));
  CatsModel model = CatsModel::load_checkpoint(a.checkpoint, a.cfg.model);
  CatsModel::Output out = model.forward(*seq, false, 0, 1.0);
  fs::create_directories(a.out);
  for (Index h = 0; h < seq->H; ++h) {
    const SegmentTimeline pred = decode_timeline(out.logits, h);
    const SegmentTimeline gt =
        timeline_from_labels(seq->label_track(h), a.cfg.background_class);
    const std::string stem = "video" + std::to_string(seq->video_id) + "_h" + std::to_string(h);
    write_text_file((fs::path(a.out) / (stem + ".svg")).string(),
                    render_timeline_svg(gt, pred, a.k));
    write_text_file((fs::path(a.out) / (stem + ".txt")).string(),
                    render_timeline_text(gt, pred, a.k));
  }
  const Index frame = a.frame < 0 ? seq->T / 2 : a.frame;
  write_text_file((fs::path(a.out) / "attention.svg").string(),
                  render_attention_svg(model.attention_matrix(*seq, frame)));
  std::cout << "rendered video " << seq->video_id << " to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "E_USAGE: missing subcommand\n" << kUsage;
    return 2;
  }
  const std::string cmd = argv[1];
  std::vector<std::string> raw(argv + 2, argv + argc);
  try {
    CliArgs args = parse_cli(raw);
    if (cmd == "synth") return cmd_synth(args);
    if (cmd == "train") return cmd_train(args);
    if (cmd == "eval") return cmd_eval(args);
    if (cmd == "ablate-depth") return cmd_ablate_depth(args);
    if (cmd == "ablate-independent") return cmd_ablate_independent(args);
    if (cmd == "render") return cmd_render(args);
    if (cmd == "--help" || cmd == "help") {
      std::cout << kUsage;
      return 0;
    }
    std::cerr << "E_USAGE: unknown subcommand '" << cmd << "'\n" << kUsage;
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "E_CONFIG: " << e.what() << "\n";
  } catch (const NumericError& e) {
    std::cerr << "E_NUMERIC: " << e.what() << "\n";
  } catch (const ShapeError& e) {
    std::cerr << "E_DATA: " << e.what() << "\n";
  } catch (const ValueError& e) {
    std::cerr << "E_DATA: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "E_IO: " << e.what() << "\n";
  }
  return 1;
}
