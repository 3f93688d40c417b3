#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "padme/model.hpp"
#include "padme/trainer.hpp"

namespace padme {

// Flat `section.key = value` settings. Every key has a default; unknown keys
// and ill-typed values are rejected. `[section]` headers prefix the keys that
// follow them.
class RunConfig {
 public:
  RunConfig();
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool has_key(const std::string& key) const;
  static std::vector<std::string> known_keys();

  std::string str(const std::string& key) const { return get(key); }
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  // Sorted `key = value` lines; parse(to_text()) reproduces the config.
  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  std::uint64_t seed() const { return count("run.seed"); }
  ModelConfig model_config(std::size_t n_tasks, std::vector<std::string> protein_vocabulary) const;
  TrainConfig train_config() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace padme
