// SPDX-License-Identifier: Apache-2.0
#include "glav/manifest.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace glav {

using nlohmann::json;

std::string fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open for fingerprinting: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  return hex64(h);
}

std::string RunManifest::hash() const {
  std::uint64_t h = fnv1a(subcommand);
  h = fnv1a(config_text, h);
  h = fnv1a(dataset_fingerprint, h);
  h = fnv1a(std::to_string(seed), h);
  h = fnv1a(version, h);
  return hex64(h).substr(8);
}

std::string RunManifest::to_json() const {
  return json{{"subcommand", subcommand},
              {"command_line", command_line},
              {"config", config_text},
              {"dataset_path", dataset_path},
              {"dataset_fingerprint", dataset_fingerprint},
              {"seed", seed},
              {"version", version},
              {"hash", hash()}}
      .dump(2);
}

std::string create_run_dir(const std::string& out_root, const RunManifest& manifest) {
  namespace fs = std::filesystem;
  const std::string base = out_root + "/" + manifest.subcommand + "-" + manifest.hash();
  std::string dir = base;
  const std::string payload = manifest.to_json();
  for (int attempt = 2; fs::exists(dir); ++attempt) {
    // Same content may resume in place; different content must not clobber.
    std::ifstream existing(dir + "/manifest.json");
    std::stringstream ss;
    ss << existing.rdbuf();
    if (ss.str() == payload) break;
    dir = base + "-" + std::to_string(attempt);
  }
  fs::create_directories(dir);
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw ArgumentError("cannot write manifest in " + dir);
  out << payload;
  return dir;
}

}  // namespace glav
