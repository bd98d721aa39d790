#include "cats/config.hpp"

#include <fstream>
#include <sstream>

namespace cats {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

void RunConfig::apply_override(const std::string& raw_key, const std::string& value) {
  // Section prefixes are organizational; strip one if present.
  std::string key = raw_key;
  const auto dot = key.rfind('.');
  if (dot != std::string::npos) key = key.substr(dot + 1);

  if (key == "preset") {
    if (value == "default")
      scenario = ScenarioSpec::defaults();
    else if (value == "hard")
      scenario = ScenarioSpec::hard();
    else
      throw ConfigError("config: preset must be 'default' or 'hard', got '" + value + "'");
  } else if (key == "num_subjects") {
    scenario.num_subjects = static_cast<int>(to_int(key, value));
  } else if (key == "humans") {
    scenario.humans = to_int(key, value);
  } else if (key == "objects_min") {
    scenario.objects_min = to_int(key, value);
  } else if (key == "objects_max") {
    scenario.objects_max = to_int(key, value);
  } else if (key == "joints") {
    scenario.joints = to_int(key, value);
  } else if (key == "frames_min") {
    scenario.frames_min = to_int(key, value);
  } else if (key == "frames_max") {
    scenario.frames_max = to_int(key, value);
  } else if (key == "num_classes") {
    scenario.num_classes = static_cast<int>(to_int(key, value));
  } else if (key == "videos_per_group") {
    scenario.videos_per_group = static_cast<int>(to_int(key, value));
  } else if (key == "motion_noise") {
    scenario.motion_noise = to_real(key, value);
  } else if (key == "visual_noise") {
    scenario.visual_noise = to_real(key, value);
  } else if (key == "occlusion_prob") {
    scenario.occlusion_prob = to_real(key, value);
  } else if (key == "sync_humans") {
    scenario.sync_humans = to_bool(key, value);
  } else if (key == "dvis") {
    scenario.dvis = to_int(key, value);
  } else if (key == "scenario_seed") {
    scenario.seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "dur_min") {
    scenario.scripts = scenario.effective_scripts();
    for (auto& s : scenario.scripts) s.dur_min = to_int(key, value);
  } else if (key == "dur_max") {
    scenario.scripts = scenario.effective_scripts();
    for (auto& s : scenario.scripts) s.dur_max = to_int(key, value);
  } else if (key == "gcn_layers") {
    model.gcn_layers = static_cast<int>(to_int(key, value));
  } else if (key == "c1") {
    model.c1 = to_int(key, value);
  } else if (key == "c2") {
    model.c2 = to_int(key, value);
  } else if (key == "c3") {
    throw ConfigError("config: c3 is derived as c1 + c2 and cannot be set");
  } else if (key == "gru_hidden") {
    model.gru_hidden = to_int(key, value);
  } else if (key == "heads") {
    model.heads = static_cast<int>(to_int(key, value));
  } else if (key == "leaky_slope") {
    model.leaky_slope = to_real(key, value);
  } else if (key == "tau_start") {
    model.tau_start = to_real(key, value);
  } else if (key == "tau_end") {
    model.tau_end = to_real(key, value);
  } else if (key == "independent_entity") {
    model.independent_entity = to_bool(key, value);
  } else if (key == "skeleton") {
    skeleton_text = value;
  } else if (key == "epochs") {
    epochs = static_cast<int>(to_int(key, value));
  } else if (key == "lr") {
    lr = to_real(key, value);
  } else if (key == "grad_clip") {
    grad_clip = to_real(key, value);
  } else if (key == "early_stop_train_acc") {
    early_stop_train_acc = to_real(key, value);
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(to_int(key, value));
    seed_set = true;
  } else if (key == "fold_policy") {
    fold_policy = value;
  } else if (key == "background_class") {
    background_class = static_cast<int>(to_int(key, value));
  } else if (key == "dataset") {
    dataset_path = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else {
    throw ConfigError("config: unknown key '" + raw_key + "'");
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  RunConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      cfg.apply_override(section.empty() ? key : section + "." + key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (" + path + ":" + std::to_string(lineno) + ")");
    }
  }
  return cfg;
}

void RunConfig::finalize() {
  model.skeleton = SkeletonSpec::parse(skeleton_text, scenario.joints);
  model.dvis = scenario.dvis;
  model.num_classes = scenario.num_classes;
  scenario.validate();
  model.validate();
  if (epochs < 0) throw ConfigError("config: epochs must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("config: lr must be > 0");
  if (grad_clip < 0.0) throw ConfigError("config: grad_clip must be >= 0");
  parse_fold_policy(fold_policy);
}

std::string RunConfig::snapshot() const {
  std::ostringstream os;
  os << "[scenario]\n";
  os << "num_subjects = " << scenario.num_subjects << "\n";
  os << "humans = " << scenario.humans << "\n";
  os << "objects_min = " << scenario.objects_min << "\n";
  os << "objects_max = " << scenario.objects_max << "\n";
  os << "joints = " << scenario.joints << "\n";
  os << "frames_min = " << scenario.frames_min << "\n";
  os << "frames_max = " << scenario.frames_max << "\n";
  os << "num_classes = " << scenario.num_classes << "\n";
  os << "videos_per_group = " << scenario.videos_per_group << "\n";
  os << "motion_noise = " << scenario.motion_noise << "\n";
  os << "visual_noise = " << scenario.visual_noise << "\n";
  os << "occlusion_prob = " << scenario.occlusion_prob << "\n";
  os << "sync_humans = " << (scenario.sync_humans ? "true" : "false") << "\n";
  os << "dvis = " << scenario.dvis << "\n";
  os << "scenario_seed = " << scenario.seed << "\n";
  os << "\n[model]\n";
  os << "gcn_layers = " << model.gcn_layers << "\n";
  os << "c1 = " << model.c1 << "\n";
  os << "c2 = " << model.c2 << "\n";
  os << "gru_hidden = " << model.gru_hidden << "\n";
  os << "heads = " << model.heads << "\n";
  os << "leaky_slope = " << model.leaky_slope << "\n";
  os << "tau_start = " << model.tau_start << "\n";
  os << "tau_end = " << model.tau_end << "\n";
  os << "independent_entity = " << (model.independent_entity ? "true" : "false") << "\n";
  os << "skeleton = " << skeleton_text << "\n";
  os << "\n[train]\n";
  os << "epochs = " << epochs << "\n";
  os << "lr = " << lr << "\n";
  os << "grad_clip = " << grad_clip << "\n";
  os << "early_stop_train_acc = " << early_stop_train_acc << "\n";
  os << "seed = " << seed << "\n";
  os << "fold_policy = " << fold_policy << "\n";
  os << "background_class = " << background_class << "\n";
  os << "\n[io]\n";
  os << "dataset = " << dataset_path << "\n";
  os << "out_dir = " << out_dir << "\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> parse_flag_overrides(
    const std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& a : args) {
    if (a.rfind("--", 0) != 0)
      throw ConfigError("config: expected --key=value flag, got '" + a + "'");
    const auto eq = a.find('=');
    if (eq == std::string::npos)
      out.emplace_back(a.substr(2), "true");
    else
      out.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
  }
  return out;
}

}  // namespace cats
