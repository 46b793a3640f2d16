#include "tns/manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"

namespace tns {

std::string git_blob_sha1(std::string_view content) {
  const std::string header = fmt::format("blob {}", content.size());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const char nul = '\0';
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 || EVP_DigestUpdate(ctx.get(), &nul, 1) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("SHA-1 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

std::string file_git_sha1(const std::string& path) { return git_blob_sha1(read_file(path)); }

Manifest::Manifest(std::string out_dir, std::string subcommand, std::string config_text, std::uint64_t seed)
    : out_dir_(std::move(out_dir)), subcommand_(std::move(subcommand)), config_text_(std::move(config_text)), seed_(seed) {}

void Manifest::add_file(const std::string& relative) {
  for (const auto& e : entries_)
    if (e.path == relative) throw std::logic_error(fmt::format("manifest already lists '{}'", relative));
  const std::string content = read_file((std::filesystem::path(out_dir_) / relative).string());
  entries_.push_back({relative, git_blob_sha1(content), content.size()});
}

void Manifest::write() const {
  nlohmann::ordered_json j;
  j["tool"] = "tnscatter";
  j["subcommand"] = subcommand_;
  j["seed"] = seed_;
  j["config"] = config_text_;
  j["config_sha1"] = git_blob_sha1(config_text_);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["created"] = buf;
  auto& files = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) files.push_back({{"path", e.path}, {"sha1", e.sha1}, {"bytes", e.bytes}});
  std::ofstream f(std::filesystem::path(out_dir_) / "manifest.json", std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write manifest in '{}'", out_dir_));
  f << j.dump(2) << '\n';
}

}  // namespace tns
