#pragma once

// Artifact writer: files land in one output directory and are recorded with
// their SHA-256 digests in manifest.json.

#include <filesystem>
#include <map>
#include <string>

#include <openssl/evp.h>

#include "snse/cli/config.hpp"
#include "snse/io.hpp"

namespace snse::cli {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

/// Hash of the canonical config; changes iff a key the command reads changes.
inline std::string config_hash(const ExperimentConfig& c) { return sha256_hex(canonical_config(c).dump()); }

class ArtifactSink {
 public:
  explicit ArtifactSink(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  const std::filesystem::path& dir() const noexcept { return dir_; }

  void write(const std::string& name, const std::string& bytes) {
    write_text_file((dir_ / name).string(), bytes);
    digests_[name] = {sha256_hex(bytes), bytes.size()};
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  /// manifest.json with artifacts in name order.
  void finish(const ExperimentConfig& c) {
    Json arts = Json::array();
    for (const auto& [name, d] : digests_) arts.push_back(Json{{"path", name}, {"sha256", d.first}, {"bytes", d.second}});
    Json m{{"command", c.command},
           {"config_hash", config_hash(c)},
           {"master_seed", c.master_seed},
           {"config", canonical_config(c)},
           {"artifacts", arts}};
    write_text_file((dir_ / "manifest.json").string(), m.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::pair<std::string, std::size_t>> digests_;
};

}  // namespace snse::cli
