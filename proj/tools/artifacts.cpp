#include "artifacts.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "assoc/clients.hpp"
#include "assoc/error.hpp"
#include "assoc/text.hpp"

namespace assocnorms {

namespace fs = std::filesystem;

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw assoc::ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return assoc::sha256_hex(ss.str());
}

OutputDir::OutputDir(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw assoc::ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  lock_ = dir_ / ".assocnorms.lock";
  const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    const std::string reason = errno == EEXIST ? "locked by another run (remove " + lock_.string() + " if stale)"
                                               : std::strerror(errno);
    lock_.clear();
    throw assoc::ConfigError("output directory " + dir_.string() + " " + reason);
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputDir::~OutputDir() {
  if (!lock_.empty()) {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
}

void OutputDir::write(const std::string& name, const std::string& content) {
  const auto target = dir_ / name;
  const auto tmp = dir_ / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw assoc::ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw assoc::ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
  for (auto& [n, sha] : outputs_) {
    if (n == name) {
      sha = assoc::sha256_hex(content);
      return;
    }
  }
  outputs_.emplace_back(name, assoc::sha256_hex(content));
}

void OutputDir::write_json(const std::string& name, const json& value) { write(name, value.dump(2) + "\n"); }

Manifest::Manifest(std::string subcommand, const assoc::PipelineConfig& config)
    : subcommand_(std::move(subcommand)), config_(config) {}

void Manifest::input(const std::string& role, const fs::path& path) {
  inputs_.push_back({{"role", role}, {"path", path.string()}, {"sha256", file_sha256(path)}});
}

void Manifest::finish(OutputDir& out) {
  json outputs = json::array();
  for (const auto& [name, sha] : out.outputs()) outputs.push_back({{"name", name}, {"sha256", sha}});
  json config = json::object();
  for (const auto& line : assoc::text::split(config_.canonical(), '\n')) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  const json manifest = {
      {"schema", "assocnorms-manifest/1"},
      {"tool", "assocnorms"},
      {"version", kVersion},
      {"subcommand", subcommand_},
      {"seed", config_.seed},
      {"split_seed", config_.split_seed},
      {"config_hash", config_.hash()},
      {"config", config},
      {"parameters", parameters_},
      {"inputs", inputs_},
      {"outputs", outputs},
  };
  out.write_json(subcommand_ + ".manifest.json", manifest);
}

}  // namespace assocnorms
