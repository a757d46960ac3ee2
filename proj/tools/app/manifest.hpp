#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "app/config.hpp"

namespace graphletqa::app {

/// Lifecycle record of one stage run, kept at <out>/manifests/<stage>.json.
/// Written with status "running" on construction and rewritten with output
/// checksums by complete().
///
/// Timestamps honour SOURCE_DATE_EPOCH so that reproducibility checks can
/// pin them.
class StageManifest {
 public:
  StageManifest(const PipelineConfig& config, std::string stage, const std::vector<std::filesystem::path>& inputs);

  /// Stage-specific metadata.
  void set(const std::string& key, nlohmann::json value);
  void add_output(const std::filesystem::path& path);
  void complete();

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void write() const;

  std::filesystem::path out_dir_;
  std::filesystem::path path_;
  nlohmann::json doc_;
  std::vector<std::filesystem::path> outputs_;
};

/// ISO-8601 UTC timestamp; SOURCE_DATE_EPOCH wins over the clock.
std::string timestamp_now();

}  // namespace graphletqa::app
