#include "cats/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cats {

ScenarioSpec ScenarioSpec::hard() {
  ScenarioSpec s;
  s.num_classes = 10;
  s.frames_min = 120;
  s.frames_max = 160;
  s.motion_noise = 0.02;
  s.visual_noise = 1.25;
  s.occlusion_prob = 0.05;
  s.sync_humans = false;  // per-human step durations drift apart
  s.scripts = s.effective_scripts();  // default class orders, short segments
  for (ActivityScript& scr : s.scripts) {
    scr.dur_min = 4;
    scr.dur_max = 8;
  }
  return s;
}

std::vector<ActivityScript> ScenarioSpec::effective_scripts() const {
  if (!scripts.empty()) return scripts;
  const int nc = num_classes;
  std::vector<ActivityScript> out;
  ActivityScript fwd, rev, inter;
  for (int c = 0; c < nc; ++c) fwd.classes.push_back(c);
  for (int c = nc - 1; c >= 0; --c) rev.classes.push_back(c);
  for (int c = 0; c < nc; c += 2) inter.classes.push_back(c);
  for (int c = 1; c < nc; c += 2) inter.classes.push_back(c);
  out = {fwd, rev, inter};
  if (nc == 1) out = {ActivityScript{{0}, 12, 20}};
  return out;
}

void ScenarioSpec::validate() const {
  if (num_subjects < 1 || humans < 1 || joints < 1 || num_classes < 1 ||
      videos_per_group < 1 || dvis < 1)
    throw ValueError("scenario: counts must be positive");
  if (objects_min < 1 || objects_max < objects_min)
    throw ValueError("scenario: invalid object count range");
  if (frames_min < 2 || frames_max < frames_min)
    throw ValueError("scenario: invalid frame count range");
  if (num_subjects % humans != 0)
    throw ValueError("scenario: num_subjects must be a multiple of the group size (humans)");
  for (const ActivityScript& s : effective_scripts()) {
    if (s.classes.empty()) throw ValueError("scenario: empty activity script");
    if (s.dur_min < 1 || s.dur_max < s.dur_min)
      throw ValueError("scenario: script duration range must be >= 1 frame");
    if (static_cast<Index>(s.classes.size()) * s.dur_min > frames_max)
      throw ValueError("scenario: script longer than the maximum video length");
    for (std::size_t i = 0; i < s.classes.size(); ++i) {
      const int c = s.classes[i];
      if (c < 0 || c >= num_classes)
        throw ValueError("scenario: script class " + std::to_string(c) + " outside [0, " +
                         std::to_string(num_classes) + ")");
      if (s.classes.size() > 1 && c == s.classes[(i + 1) % s.classes.size()])
        throw ValueError("scenario: script repeats a class across adjacent steps");
    }
  }
}

namespace {

constexpr int kObjectTypes = 4;
constexpr double kCenterMargin = 0.25;

struct ClassTables {
  // Velocities are fractions of the frame size per frame.
  std::vector<std::array<double, 2>> human_vel;              // [class]
  std::vector<std::vector<std::array<double, 2>>> joint_vel; // [class][joint]
  std::vector<std::vector<std::array<double, 2>>> object_vel;  // [class][type]
  std::vector<std::vector<double>> proto_human;              // [class][dvis]
  std::vector<std::vector<double>> proto_object;             // [class][dvis]
};

ClassTables build_tables(const ScenarioSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> speed(0.0025, 0.005);
  std::uniform_real_distribution<double> jv(-0.0018, 0.0018);
  std::normal_distribution<double> normal(0.0, 1.0);
  ClassTables t;
  const int nc = spec.num_classes;
  t.human_vel.resize(nc);
  t.joint_vel.resize(nc);
  t.object_vel.resize(nc);
  t.proto_human.resize(nc);
  t.proto_object.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const double a = angle(rng), s = speed(rng);
    t.human_vel[c] = {s * std::cos(a), s * std::sin(a)};
    t.joint_vel[c].resize(static_cast<std::size_t>(spec.joints));
    for (Index j = 0; j < spec.joints; ++j) t.joint_vel[c][j] = {jv(rng), jv(rng)};
    t.object_vel[c].resize(kObjectTypes);
    for (int k = 0; k < kObjectTypes; ++k) {
      const double oa = angle(rng), os = speed(rng);
      t.object_vel[c][k] = {os * std::cos(oa), os * std::sin(oa)};
    }
    t.proto_human[c].resize(static_cast<std::size_t>(spec.dvis));
    t.proto_object[c].resize(static_cast<std::size_t>(spec.dvis));
    for (Index d = 0; d < spec.dvis; ++d) t.proto_human[c][d] = normal(rng);
    for (Index d = 0; d < spec.dvis; ++d) t.proto_object[c][d] = normal(rng);
  }
  return t;
}

std::vector<int> sample_label_track(const ActivityScript& script, Index frames,
                                    std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> dur(script.dur_min, script.dur_max);
  std::vector<int> track;
  track.reserve(static_cast<std::size_t>(frames));
  std::size_t step = 0;
  while (static_cast<Index>(track.size()) < frames) {
    const int cls = script.classes[step % script.classes.size()];
    const Index d = dur(rng);
    for (Index i = 0; i < d && static_cast<Index>(track.size()) < frames; ++i)
      track.push_back(cls);
    ++step;
  }
  return track;
}

// Flips each velocity component whose extrapolated endpoint would leave the
// margin band; keeps trajectories inside the frame without clamping.
std::array<double, 2> steer(const std::array<double, 2>& vel, double cx, double cy, Index len) {
  std::array<double, 2> v = vel;
  const double ex = cx + v[0] * static_cast<double>(len);
  if (ex > 1.0 - kCenterMargin) v[0] = -std::abs(v[0]);
  if (ex < kCenterMargin) v[0] = std::abs(v[0]);
  const double ey = cy + v[1] * static_cast<double>(len);
  if (ey > 1.0 - kCenterMargin) v[1] = -std::abs(v[1]);
  if (ey < kCenterMargin) v[1] = std::abs(v[1]);
  return v;
}

struct Run {
  int cls;
  Index start, len;
};

std::vector<Run> runs_of(const std::vector<int>& track) {
  std::vector<Run> runs;
  Index t = 0;
  const Index n = static_cast<Index>(track.size());
  while (t < n) {
    Index e = t;
    while (e + 1 < n && track[e + 1] == track[t]) ++e;
    runs.push_back({track[t], t, e - t + 1});
    t = e + 1;
  }
  return runs;
}

SceneSequence synthesize_video(const ScenarioSpec& spec, const ClassTables& tables,
                               std::int64_t video_id, const std::vector<int>& subjects,
                               std::uint64_t video_seed) {
  std::mt19937_64 rng(video_seed);
  std::uniform_int_distribution<Index> frames_dist(spec.frames_min, spec.frames_max);
  std::uniform_int_distribution<Index> objects_dist(spec.objects_min, spec.objects_max);
  const auto scripts = spec.effective_scripts();
  std::uniform_int_distribution<std::size_t> script_dist(0, scripts.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SceneSequence seq;
  seq.video_id = video_id;
  seq.subject_ids = subjects;
  seq.T = frames_dist(rng);
  seq.H = spec.humans;
  seq.J = spec.joints;
  seq.O = objects_dist(rng);
  seq.dvis = spec.dvis;
  seq.allocate();
  const ActivityScript& script = scripts[script_dist(rng)];
  const double fw = seq.frame_width, fh = seq.frame_height;
  const double scale = std::min(fw, fh);

  const std::vector<int> shared_track = sample_label_track(script, seq.T, rng);
  for (Index h = 0; h < seq.H; ++h) {
    const std::vector<int> track =
        spec.sync_humans ? shared_track : sample_label_track(script, seq.T, rng);
    for (Index t = 0; t < seq.T; ++t) seq.label(h, t) = track[static_cast<std::size_t>(t)];

    double cx = (static_cast<double>(h) + 1.0) / (static_cast<double>(seq.H) + 1.0) +
                0.08 * (unit(rng) - 0.5);
    double cy = 0.5 + 0.08 * (unit(rng) - 0.5);
    for (const Run& run : runs_of(track)) {
      const auto v = steer(tables.human_vel[run.cls], cx, cy, run.len);
      for (Index i = 0; i < run.len; ++i) {
        const Index t = run.start + i;
        for (Index j = 0; j < seq.J; ++j) {
          const double phi = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(seq.J);
          const auto& jv = tables.joint_vel[run.cls][j];
          double px = cx + v[0] * i + 0.10 * std::cos(phi) + jv[0] * i;
          double py = cy + v[1] * i + 0.10 * std::sin(phi) + jv[1] * i;
          if (spec.motion_noise > 0.0) {
            px += spec.motion_noise * normal(rng);
            py += spec.motion_noise * normal(rng);
          }
          seq.joint_coord(t, h, j, 0) = std::clamp(px, 0.0, 1.0) * fw;
          seq.joint_coord(t, h, j, 1) = std::clamp(py, 0.0, 1.0) * fh;
        }
      }
      cx += v[0] * run.len;
      cy += v[1] * run.len;
    }
  }

  for (Index o = 0; o < seq.O; ++o) {
    std::uniform_int_distribution<int> type_dist(0, kObjectTypes - 1);
    const int type = type_dist(rng);
    const Index anchor = o % seq.H;
    const double bw = (0.05 + 0.05 * unit(rng));
    const double bh = (0.05 + 0.05 * unit(rng));
    double cx = 0.3 + 0.4 * unit(rng);
    double cy = 0.3 + 0.4 * unit(rng);
    for (const Run& run : runs_of(seq.label_track(anchor))) {
      const auto v = steer(tables.object_vel[run.cls][type], cx, cy, run.len);
      for (Index i = 0; i < run.len; ++i) {
        const Index t = run.start + i;
        const double ox = cx + v[0] * i, oy = cy + v[1] * i;
        seq.box_coord(t, o, 0) = std::max(0.0, ox - bw / 2) * scale;
        seq.box_coord(t, o, 1) = std::max(0.0, oy - bh / 2) * scale;
        seq.box_coord(t, o, 2) = std::min(1.0, ox + bw / 2) * scale;
        seq.box_coord(t, o, 3) = std::min(1.0, oy + bh / 2) * scale;
      }
      cx += v[0] * run.len;
      cy += v[1] * run.len;
    }
  }

  for (Index t = 0; t < seq.T; ++t) {
    for (Index h = 0; h < seq.H; ++h) {
      const auto& proto = tables.proto_human[seq.label(h, t)];
      for (Index d = 0; d < seq.dvis; ++d)
        seq.vis_human(t, h, d) = proto[static_cast<std::size_t>(d)] +
                                 spec.visual_noise * normal(rng);
    }
    for (Index o = 0; o < seq.O; ++o) {
      const auto& proto = tables.proto_object[seq.label(o % seq.H, t)];
      for (Index d = 0; d < seq.dvis; ++d)
        seq.vis_object(t, o, d) = proto[static_cast<std::size_t>(d)] +
                                  spec.visual_noise * normal(rng);
    }
  }

  if (spec.occlusion_prob > 0.0) {
    for (Index t = 0; t < seq.T; ++t)
      for (Index h = 0; h < seq.H; ++h)
        for (Index j = 0; j < seq.J; ++j)
          if (unit(rng) < spec.occlusion_prob) {
            seq.joint_coord(t, h, j, 0) = kOccludedCoord;
            seq.joint_coord(t, h, j, 1) = kOccludedCoord;
          }
  }
  return seq;
}

}  // namespace

std::vector<SceneSequence> synthesize(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 master(spec.seed);
  const ClassTables tables = build_tables(spec, master);
  std::vector<SceneSequence> out;
  const int groups = spec.num_subjects / static_cast<int>(spec.humans);
  std::int64_t video_id = 0;
  for (int g = 0; g < groups; ++g) {
    std::vector<int> subjects;
    for (Index h = 0; h < spec.humans; ++h)
      subjects.push_back(g * static_cast<int>(spec.humans) + static_cast<int>(h));
    for (int v = 0; v < spec.videos_per_group; ++v) {
      const std::uint64_t vseed = master();
      out.push_back(synthesize_video(spec, tables, video_id++, subjects, vseed));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: one JSON record per line, schema version 1.

namespace {

constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const SceneSequence& s) {
  nlohmann::json j;
  j["version"] = kSchemaVersion;
  j["video_id"] = s.video_id;
  j["subject_ids"] = s.subject_ids;
  j["T"] = s.T;
  j["H"] = s.H;
  j["J"] = s.J;
  j["O"] = s.O;
  auto joints = nlohmann::json::array();
  for (Index t = 0; t < s.T; ++t) {
    auto jt = nlohmann::json::array();
    for (Index h = 0; h < s.H; ++h) {
      auto jh = nlohmann::json::array();
      for (Index k = 0; k < s.J; ++k)
        jh.push_back({s.joint_coord(t, h, k, 0), s.joint_coord(t, h, k, 1)});
      jt.push_back(std::move(jh));
    }
    joints.push_back(std::move(jt));
  }
  j["joints"] = std::move(joints);
  auto boxes = nlohmann::json::array();
  for (Index t = 0; t < s.T; ++t) {
    auto bt = nlohmann::json::array();
    for (Index o = 0; o < s.O; ++o)
      bt.push_back({s.box_coord(t, o, 0), s.box_coord(t, o, 1), s.box_coord(t, o, 2),
                    s.box_coord(t, o, 3)});
    boxes.push_back(std::move(bt));
  }
  j["boxes"] = std::move(boxes);
  auto labels = nlohmann::json::array();
  for (Index h = 0; h < s.H; ++h) labels.push_back(s.label_track(h));
  j["labels"] = std::move(labels);
  auto vh = nlohmann::json::array();
  auto vo = nlohmann::json::array();
  for (Index t = 0; t < s.T; ++t) {
    auto vht = nlohmann::json::array();
    for (Index h = 0; h < s.H; ++h) {
      auto row = nlohmann::json::array();
      for (Index d = 0; d < s.dvis; ++d) row.push_back(s.vis_human(t, h, d));
      vht.push_back(std::move(row));
    }
    vh.push_back(std::move(vht));
    auto vot = nlohmann::json::array();
    for (Index o = 0; o < s.O; ++o) {
      auto row = nlohmann::json::array();
      for (Index d = 0; d < s.dvis; ++d) row.push_back(s.vis_object(t, o, d));
      vot.push_back(std::move(row));
    }
    vo.push_back(std::move(vot));
  }
  j["visual_human"] = std::move(vh);
  j["visual_object"] = std::move(vo);
  return j;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& path_msg) {
  throw ValueError("dataset: parse error at line " + std::to_string(line) + ": " + path_msg);
}

const nlohmann::json& field(const nlohmann::json& j, const char* name, std::size_t line) {
  auto it = j.find(name);
  if (it == j.end()) parse_fail(line, std::string("missing field '") + name + "'");
  return *it;
}

SceneSequence from_json(const nlohmann::json& j, std::size_t line) {
  SceneSequence s;
  const int version = field(j, "version", line).get<int>();
  if (version != kSchemaVersion)
    parse_fail(line, "unsupported schema version " + std::to_string(version));
  s.video_id = field(j, "video_id", line).get<std::int64_t>();
  s.subject_ids = field(j, "subject_ids", line).get<std::vector<int>>();
  s.T = field(j, "T", line).get<Index>();
  s.H = field(j, "H", line).get<Index>();
  s.J = field(j, "J", line).get<Index>();
  s.O = field(j, "O", line).get<Index>();

  const auto& joints = field(j, "joints", line);
  const auto& boxes = field(j, "boxes", line);
  const auto& labels = field(j, "labels", line);
  const auto& vh = field(j, "visual_human", line);
  const auto& vo = field(j, "visual_object", line);
  if (static_cast<Index>(joints.size()) != s.T) parse_fail(line, "joints: wrong frame count");
  if (static_cast<Index>(boxes.size()) != s.T) parse_fail(line, "boxes: wrong frame count");
  if (static_cast<Index>(labels.size()) != s.H) parse_fail(line, "labels: wrong track count");
  if (static_cast<Index>(vh.size()) != s.T) parse_fail(line, "visual_human: wrong frame count");
  if (static_cast<Index>(vo.size()) != s.T) parse_fail(line, "visual_object: wrong frame count");
  s.dvis = s.T > 0 && s.H > 0 ? static_cast<Index>(vh.at(0).at(0).size()) : 0;
  s.allocate();

  try {
    for (Index t = 0; t < s.T; ++t) {
      const auto& jt = joints.at(static_cast<std::size_t>(t));
      if (static_cast<Index>(jt.size()) != s.H)
        parse_fail(line, "joints[" + std::to_string(t) + "]: wrong human count");
      for (Index h = 0; h < s.H; ++h) {
        const auto& jh = jt.at(static_cast<std::size_t>(h));
        if (static_cast<Index>(jh.size()) != s.J)
          parse_fail(line, "joints[" + std::to_string(t) + "][" + std::to_string(h) +
                               "]: wrong joint count");
        for (Index k = 0; k < s.J; ++k) {
          const auto& p = jh.at(static_cast<std::size_t>(k));
          if (p.size() != 2)
            parse_fail(line, "joints[" + std::to_string(t) + "][" + std::to_string(h) + "][" +
                                 std::to_string(k) + "]: expected 2 coordinates");
          s.joint_coord(t, h, k, 0) = p.at(0).get<double>();
          s.joint_coord(t, h, k, 1) = p.at(1).get<double>();
        }
      }
      const auto& bt = boxes.at(static_cast<std::size_t>(t));
      if (static_cast<Index>(bt.size()) != s.O)
        parse_fail(line, "boxes[" + std::to_string(t) + "]: wrong object count");
      for (Index o = 0; o < s.O; ++o) {
        const auto& bo = bt.at(static_cast<std::size_t>(o));
        if (bo.size() != 4)
          parse_fail(line, "boxes[" + std::to_string(t) + "][" + std::to_string(o) +
                               "]: expected 4 coordinates");
        for (Index c = 0; c < 4; ++c) s.box_coord(t, o, c) = bo.at(static_cast<std::size_t>(c)).get<double>();
      }
      const auto& vht = vh.at(static_cast<std::size_t>(t));
      const auto& vot = vo.at(static_cast<std::size_t>(t));
      if (static_cast<Index>(vht.size()) != s.H)
        parse_fail(line, "visual_human[" + std::to_string(t) + "]: wrong entity count");
      if (static_cast<Index>(vot.size()) != s.O)
        parse_fail(line, "visual_object[" + std::to_string(t) + "]: wrong entity count");
      for (Index h = 0; h < s.H; ++h) {
        const auto& row = vht.at(static_cast<std::size_t>(h));
        if (static_cast<Index>(row.size()) != s.dvis)
          parse_fail(line, "visual_human[" + std::to_string(t) + "][" + std::to_string(h) +
                               "]: wrong feature width");
        for (Index d = 0; d < s.dvis; ++d) s.vis_human(t, h, d) = row.at(static_cast<std::size_t>(d)).get<double>();
      }
      for (Index o = 0; o < s.O; ++o) {
        const auto& row = vot.at(static_cast<std::size_t>(o));
        if (static_cast<Index>(row.size()) != s.dvis)
          parse_fail(line, "visual_object[" + std::to_string(t) + "][" + std::to_string(o) +
                               "]: wrong feature width");
        for (Index d = 0; d < s.dvis; ++d) s.vis_object(t, o, d) = row.at(static_cast<std::size_t>(d)).get<double>();
      }
    }
    for (Index h = 0; h < s.H; ++h) {
      const auto& track = labels.at(static_cast<std::size_t>(h));
      if (static_cast<Index>(track.size()) != s.T)
        parse_fail(line, "labels[" + std::to_string(h) + "]: wrong frame count");
      for (Index t = 0; t < s.T; ++t) s.label(h, t) = track.at(static_cast<std::size_t>(t)).get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    parse_fail(line, e.what());
  }
  s.validate();
  return s;
}

}  // namespace

void save_dataset(const std::string& path, const std::vector<SceneSequence>& data) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_dataset: cannot open " + path);
  for (const SceneSequence& s : data) f << to_json(s).dump() << "\n";
  f.flush();
  if (!f) throw std::runtime_error("save_dataset: write failed for " + path);
}

std::vector<SceneSequence> load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_dataset: cannot open " + path);
  std::vector<SceneSequence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      parse_fail(lineno, e.what());
    }
    out.push_back(from_json(j, lineno));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation folds

FoldPolicy parse_fold_policy(const std::string& name) {
  if (name == "leave_one_subject_out") return FoldPolicy::LeaveOneSubjectOut;
  if (name == "leave_two_subjects_out") return FoldPolicy::LeaveTwoSubjectsOut;
  throw ValueError("fold policy must be leave_one_subject_out or leave_two_subjects_out, got '" +
                   name + "'");
}

std::string to_string(FoldPolicy policy) {
  return policy == FoldPolicy::LeaveOneSubjectOut ? "leave_one_subject_out"
                                                  : "leave_two_subjects_out";
}

std::vector<DatasetSplit> make_folds(const std::vector<SceneSequence>& data, FoldPolicy policy) {
  if (data.empty()) throw ValueError("make_folds: empty dataset");
  std::vector<std::vector<int>> held_sets;
  if (policy == FoldPolicy::LeaveOneSubjectOut) {
    std::set<int> subjects;
    for (const SceneSequence& s : data) subjects.insert(s.subject_ids.begin(), s.subject_ids.end());
    if (subjects.size() < 2)
      throw ValueError("make_folds: leave-one-subject-out needs at least 2 subjects");
    for (int s : subjects) held_sets.push_back({s});
  } else {
    std::set<std::vector<int>> pairs;
    for (const SceneSequence& s : data) {
      std::vector<int> ids = s.subject_ids;
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      if (ids.size() != 2)
        throw ValueError("make_folds: leave-two-subjects-out requires paired-subject videos; "
                         "video " + std::to_string(s.video_id) + " has " +
                         std::to_string(ids.size()) + " distinct subjects");
      pairs.insert(ids);
    }
    if (pairs.size() < 2)
      throw ValueError("make_folds: leave-two-subjects-out needs at least 2 subject pairs");
    for (const auto& p : pairs) held_sets.push_back(p);
  }

  std::vector<DatasetSplit> folds;
  for (const auto& held : held_sets) {
    DatasetSplit split;
    split.held_out_subjects = held;
    for (const SceneSequence& s : data) {
      const bool hit = std::any_of(s.subject_ids.begin(), s.subject_ids.end(), [&](int id) {
        return std::find(held.begin(), held.end(), id) != held.end();
      });
      (hit ? split.test_ids : split.train_ids).push_back(s.video_id);
    }
    folds.push_back(std::move(split));
  }
  return folds;
}

std::uint64_t folds_checksum(const std::vector<DatasetSplit>& folds) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(folds.size());
  for (const DatasetSplit& f : folds) {
    mix(0x5155aa33);
    for (int s : f.held_out_subjects) mix(static_cast<std::uint64_t>(s));
    mix(f.train_ids.size());
    for (auto id : f.train_ids) mix(static_cast<std::uint64_t>(id));
    mix(f.test_ids.size());
    for (auto id : f.test_ids) mix(static_cast<std::uint64_t>(id));
  }
  return h;
}

const SceneSequence* find_video(const std::vector<SceneSequence>& data, std::int64_t id) {
  for (const SceneSequence& s : data)
    if (s.video_id == id) return &s;
  return nullptr;
}

}  // namespace cats
