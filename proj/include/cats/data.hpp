#pragma once

// Synthetic multi-person HOI sequences: a controllable, deterministic
// stand-in mirroring the structure of paired-subject HOI video datasets.
// Joints follow class-dependent piecewise-linear trajectories (constant
// velocity within a sub-activity), object boxes move with class-dependent
// velocities tied to an anchor human, and per-entity visual vectors are
// class-conditioned prototypes plus noise.

#include <cstdint>
#include <string>
#include <vector>

#include "cats/scene.hpp"

namespace cats {

struct ActivityScript {
  std::vector<int> classes;  // cycled to fill the video; adjacent entries differ
  Index dur_min = 12;
  Index dur_max = 20;
};

struct ScenarioSpec {
  int num_subjects = 8;
  Index humans = 2;  // group size for subject pairing
  Index objects_min = 2, objects_max = 4;
  Index joints = 15;
  Index frames_min = 80, frames_max = 120;
  int num_classes = 4;
  int videos_per_group = 4;
  std::vector<ActivityScript> scripts;  // empty -> default scripts for num_classes
  double motion_noise = 0.004;          // stddev as a fraction of the frame size
  double visual_noise = 0.2;            // stddev around the class prototype
  double occlusion_prob = 0.0;          // per joint per frame
  bool sync_humans = true;              // humans enact the script with shared step durations
  Index dvis = 16;
  std::uint64_t seed = 42;

  // The default scenario: 8 paired subjects, 2 humans, 2-4 objects,
  // 4 classes, T in [80, 120], seed 42.
  static ScenarioSpec defaults() { return ScenarioSpec{}; }

  // Heavily fragmented timelines (many short segments), more classes, and
  // high noise; an untrained model scores near zero F1 here.
  static ScenarioSpec hard();

  std::vector<ActivityScript> effective_scripts() const;
  void validate() const;
};

std::vector<SceneSequence> synthesize(const ScenarioSpec& spec);

// Line-delimited JSON, one video per record, schema version field included.
// All reals round-trip bit-exactly.
void save_dataset(const std::string& path, const std::vector<SceneSequence>& data);
std::vector<SceneSequence> load_dataset(const std::string& path);

struct DatasetSplit {
  std::vector<std::int64_t> train_ids, test_ids;
  std::vector<int> held_out_subjects;
};

enum class FoldPolicy { LeaveOneSubjectOut, LeaveTwoSubjectsOut };

FoldPolicy parse_fold_policy(const std::string& name);
std::string to_string(FoldPolicy policy);

// One fold per held-out subject (or subject pair present in the data),
// ordered by subject id. Test = all videos featuring a held-out subject.
std::vector<DatasetSplit> make_folds(const std::vector<SceneSequence>& data, FoldPolicy policy);

// Order-sensitive FNV-1a digest of the fold structure; equal folds hash equal.
std::uint64_t folds_checksum(const std::vector<DatasetSplit>& folds);

const SceneSequence* find_video(const std::vector<SceneSequence>& data, std::int64_t id);

}  // namespace cats
