#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rescom/data.hpp"
#include "rescom/trainer.hpp"

namespace rescom {

// Flat "key = value" lines under [section] headers; keys are addressed as
// "section.key". Later assignments win, as do --set overrides.
class ConfigMap {
 public:
  static ConfigMap from_file(const std::string& path);
  void parse_stream(std::istream& is, const std::string& origin);
  // "section.key=value"
  void apply_set(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct ExperimentConfig {
  TrainConfig train;
  TrainVariant variant = TrainVariant::ResCom;
  // data source: synthetic spec or csv paths
  bool synthetic = true;
  SyntheticSpec synth;
  std::size_t test_per_class = 50;
  std::string train_csv;
  std::string test_csv;
};

ExperimentConfig experiment_from_config(const ConfigMap& map);

// Resolved key = value snapshot plus artifact paths.
void write_manifest(std::ostream& os, const ConfigMap& map,
                    const std::vector<std::string>& artifacts);

}  // namespace rescom
