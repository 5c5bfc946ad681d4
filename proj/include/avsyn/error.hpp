// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avsyn {

// Shape mismatch between tensors, layers, or latent dimensions.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input value outside its documented domain (pitch range, empty series, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed binary input (MIDI, PNG, checkpoint). Carries the byte offset at
// which parsing failed.
struct ParseError : std::runtime_error {
  ParseError(const std::string& message, std::size_t byte_offset)
      : std::runtime_error(message + " (at byte " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  std::size_t offset;
};

// A caller broke an operation's contract (untrained model, stale cache,
// incompatible checkpoints).
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid run configuration (empty dataset, unreadable path, bad flag combo).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace avsyn
