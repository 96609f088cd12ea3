#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "assoc/config.hpp"

namespace assocnorms {

using nlohmann::json;

inline constexpr const char* kVersion = ASSOC_VERSION;

std::string file_sha256(const std::filesystem::path& path);

// Exclusive owner of an output directory for the lifetime of the object.
// Files are written to a temporary name and renamed into place.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }
  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const json& value);

  // (name, sha256) of every file written, in write order.
  const std::vector<std::pair<std::string, std::string>>& outputs() const { return outputs_; }

 private:
  std::filesystem::path dir_;
  std::filesystem::path lock_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

class Manifest {
 public:
  Manifest(std::string subcommand, const assoc::PipelineConfig& config);

  void input(const std::string& role, const std::filesystem::path& path);
  json& parameters() { return parameters_; }

  // Writes <subcommand>.manifest.json listing everything written so far.
  void finish(OutputDir& out);

 private:
  std::string subcommand_;
  const assoc::PipelineConfig& config_;
  json inputs_ = json::array();
  json parameters_ = json::object();
};

}  // namespace assocnorms
