// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace avsyn {

// Run manifests: ordered key=value lines, '#' for comments. Every
// artifact-producing command writes one next to its outputs so a rerun can be
// checked against inputs, seed, and checkpoint identities.
using ManifestEntries = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const std::filesystem::path& path, const ManifestEntries& entries);
ManifestEntries read_manifest(const std::filesystem::path& path);

// First value for `key`, or throw ConfigError.
const std::string& manifest_get(const ManifestEntries& entries, const std::string& key);

}  // namespace avsyn
