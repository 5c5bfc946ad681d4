// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace avsyn {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// All regular files under `dir` with the given extension (".png", ".mid"),
// sorted lexicographically by filename for deterministic ingestion order.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              const std::string& extension);

// FNV-1a 64 hash of a byte buffer rendered as 16 hex digits; used as the
// identity of checkpoints and other artifacts in manifests.
std::string content_identity(std::span<const std::uint8_t> bytes);

}  // namespace avsyn
