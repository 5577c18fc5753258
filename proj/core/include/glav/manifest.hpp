// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/types.hpp"

#include <string>

namespace glav {

constexpr const char* kVersion = "0.1.0";

/// Everything needed to reproduce a run: the resolved configuration, the
/// dataset fingerprint, the seed and the exact command line.
struct RunManifest {
  std::string subcommand;
  std::string command_line;
  std::string config_text;
  std::string dataset_path;
  std::string dataset_fingerprint;  // fnv64 of file bytes, hex
  std::uint64_t seed = 0;
  std::string version = kVersion;

  /// Stable content hash over everything that determines results.
  std::string hash() const;
  std::string to_json() const;
};

std::string fingerprint_file(const std::string& path);

/// Creates `<out_root>/<subcommand>-<hash8>` (suffixing -2, -3, ... if a
/// different run already owns the directory), writes manifest.json, and
/// returns the directory path.
std::string create_run_dir(const std::string& out_root, const RunManifest& manifest);

}  // namespace glav
