#include "app/manifest.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include "graphletqa/errors.hpp"
#include "graphletqa/util/hash.hpp"
#include "graphletqa/util/io.hpp"
#include "graphletqa/version.hpp"

namespace graphletqa::app {

namespace fs = std::filesystem;

std::string timestamp_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

StageManifest::StageManifest(const PipelineConfig& config, std::string stage, const std::vector<fs::path>& inputs)
    : out_dir_(config.out_dir), path_(config.out_dir / "manifests" / (stage + ".json")) {
  nlohmann::json checksums = nlohmann::json::object();
  for (const auto& p : inputs) {
    if (p.empty()) continue;
    if (!fs::exists(p)) throw PathError(p, "input for stage '" + stage + "' does not exist");
    auto key = p.lexically_relative(out_dir_);
    const bool inside = !key.empty() && *key.begin() != "..";
    checksums[inside ? key.generic_string() : p.filename().string()] = util::sha256_file(p);
  }
  doc_ = {{"stage", stage},
          {"tool_version", kVersion},
          {"seed", config.seed},
          {"status", "running"},
          {"started_at", timestamp_now()},
          {"completed_at", nullptr},
          {"config", config.snapshot()},
          {"inputs", checksums},
          {"outputs", nlohmann::json::object()}};
  write();
}

void StageManifest::set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

void StageManifest::add_output(const fs::path& path) { outputs_.push_back(path); }

void StageManifest::complete() {
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& p : outputs_) outputs[p.lexically_relative(out_dir_).generic_string()] = util::sha256_file(p);
  doc_["outputs"] = outputs;
  doc_["status"] = "complete";
  doc_["completed_at"] = timestamp_now();
  write();
}

void StageManifest::write() const { util::write_text_file(path_, doc_.dump(2) + "\n"); }

}  // namespace graphletqa::app
