#pragma once

// Run manifest: every output file of a run with its git-style content hash,
// together with the canonical config text and the seed.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tns {

/// SHA-1 of "blob <size>\0" + content, as `git hash-object` computes it.
std::string git_blob_sha1(std::string_view content);
std::string file_git_sha1(const std::string& path);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha1;
  std::uint64_t bytes = 0;
};

class Manifest {
 public:
  Manifest(std::string out_dir, std::string subcommand, std::string config_text, std::uint64_t seed);

  /// Hashes `relative` (inside the output directory); each path at most once.
  void add_file(const std::string& relative);
  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }

  /// Writes manifest.json, the only file holding timestamps.
  void write() const;

 private:
  std::string out_dir_, subcommand_, config_text_;
  std::uint64_t seed_;
  std::vector<ManifestEntry> entries_;
};

}  // namespace tns
