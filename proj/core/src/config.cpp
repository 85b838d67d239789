#include "rescom/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rescom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap ConfigMap::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  ConfigMap map;
  map.parse_stream(is, path);
  return map;
}

void ConfigMap::parse_stream(std::istream& is, const std::string& origin) {
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw std::runtime_error("config: empty section at " + origin + ":" +
                                 std::to_string(lineno));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at " + origin + ":" +
                               std::to_string(lineno));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key at " + origin + ":" +
                               std::to_string(lineno));
    entries_[section.empty() ? key : section + "." + key] = value;
  }
}

void ConfigMap::apply_set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("--set expects section.key=value, got: " + assignment);
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw std::runtime_error("--set: empty key");
  entries_[key] = trim(assignment.substr(eq + 1));
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number for " + key + ": " + it->second);
  }
}

long ConfigMap::get_int(const std::string& key, long fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const long v = std::stol(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + key + ": " + it->second);
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::runtime_error("config: bad boolean for " + key + ": " + it->second);
}

std::vector<std::size_t> ConfigMap::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  auto it = entries_.find(key);
  if (it == entries_.end()) return out;
  std::stringstream ss(it->second);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoul(cell)));
  }
  return out;
}

ExperimentConfig experiment_from_config(const ConfigMap& map) {
  ExperimentConfig exp;
  TrainConfig& t = exp.train;
  t.lambda = map.get_double("train.lambda", 0.5);
  t.epochs = static_cast<std::size_t>(map.get_int("train.epochs", 30));
  t.batch_size = static_cast<std::size_t>(map.get_int("train.batch_size", 64));
  t.seed = static_cast<std::uint64_t>(map.get_int("train.seed", 0));
  t.noise_sigma = map.get_double("train.noise_sigma", 0.3);
  t.dropout_p = map.get_double("train.dropout_p", 0.1);
  t.eval_every_epoch = map.get_bool("train.eval_every_epoch", true);
  t.sgd.momentum = map.get_double("train.momentum", 0.9);
  exp.variant = train_variant_from_string(map.get_string("train.variant", "rescom"));

  const std::string lr_kind = map.get_string("train.lr_kind", "cosine");
  if (lr_kind == "cosine")
    t.lr.kind = LrScheduleKind::Cosine;
  else if (lr_kind == "multistep")
    t.lr.kind = LrScheduleKind::Multistep;
  else
    throw std::runtime_error("config: unknown lr_kind: " + lr_kind);
  t.lr.base_lr = map.get_double("train.base_lr", 0.1);
  t.lr.total_epochs = t.epochs;
  t.lr.milestones = map.get_size_list("train.milestones");
  t.lr.decay = map.get_double("train.decay", 0.1);

  t.contrastive.temperature = map.get_double("contrastive.temperature", 0.2);
  t.contrastive.beta = map.get_double("contrastive.beta", 0.0);
  t.contrastive.q_pos = static_cast<std::size_t>(map.get_int("contrastive.q_pos", 8));
  t.contrastive.q_neg =
      static_cast<std::size_t>(map.get_int("contrastive.q_neg", 64));
  t.queue_per_class = static_cast<std::size_t>(map.get_int("queue.per_class", 16));

  t.dims.hidden = static_cast<std::size_t>(map.get_int("model.hidden", 64));
  t.dims.feature = static_cast<std::size_t>(map.get_int("model.feature", 64));
  t.dims.projection = static_cast<std::size_t>(map.get_int("model.projection", 32));

  t.groups.hi = static_cast<std::size_t>(map.get_int("eval.many_threshold", 100));
  t.groups.lo = static_cast<std::size_t>(map.get_int("eval.few_threshold", 20));

  const std::string kind = map.get_string("data.kind", "synthetic");
  if (kind == "synthetic") {
    exp.synthetic = true;
    exp.synth.num_classes = static_cast<std::size_t>(map.get_int("data.classes", 10));
    exp.synth.dim = static_cast<std::size_t>(map.get_int("data.dim", 16));
    exp.synth.imbalance_factor = map.get_double("data.imbalance_factor", 100.0);
    exp.synth.n_max = static_cast<std::size_t>(map.get_int("data.n_max", 500));
    exp.synth.class_separation = map.get_double("data.separation", 3.0);
    exp.synth.seed = t.seed;
    exp.test_per_class =
        static_cast<std::size_t>(map.get_int("data.test_per_class", 50));
  } else if (kind == "csv") {
    exp.synthetic = false;
    exp.train_csv = map.get_string("data.train_path", "");
    exp.test_csv = map.get_string("data.test_path", "");
    if (exp.train_csv.empty())
      throw std::runtime_error("config: data.train_path required for csv data");
  } else {
    throw std::runtime_error("config: unknown data.kind: " + kind);
  }
  return exp;
}

void write_manifest(std::ostream& os, const ConfigMap& map,
                    const std::vector<std::string>& artifacts) {
  os << "[resolved]\n";
  for (const auto& [key, value] : map.entries()) os << key << " = " << value << "\n";
  os << "\n[artifacts]\n";
  for (std::size_t i = 0; i < artifacts.size(); ++i)
    os << "path" << i << " = " << artifacts[i] << "\n";
  os << "\n[tool]\nversion = 1.0.0\n";
}

}  // namespace rescom
