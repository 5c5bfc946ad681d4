// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avsyn/translator.hpp"
#include "avsyn/vae.hpp"

namespace avsyn {

// Binary model container: 8-byte magic "AVSYN001", a length-prefixed list of
// "key=value" header fields, then a list of row-major float32 tensors with
// u32 row/col prefixes. All integers little-endian.
inline constexpr char kCheckpointMagic[8] = {'A', 'V', 'S', 'Y', 'N', '0', '0', '1'};

struct CheckpointField {
  std::string key;
  std::string value;
};

struct Checkpoint {
  std::vector<CheckpointField> fields;
  std::vector<MatF> tensors;  // biases stored as single-column matrices
};

struct CheckpointMeta {
  std::vector<CheckpointField> fields;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> tensor_shapes;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

// Header and shapes only; tensor payloads are bounds-checked but not loaded.
CheckpointMeta read_checkpoint_meta(std::span<const std::uint8_t> bytes);

// Missing key is a contract error naming the field.
const std::string& field_value(const std::vector<CheckpointField>& fields,
                               const std::string& key);

std::vector<std::uint8_t> save_image_vae(const ImageVae& vae);
std::vector<std::uint8_t> save_melody_vae(const MelodyVae& vae);
std::vector<std::uint8_t> save_translator(const Translator& translator);

ImageVae load_image_vae(std::span<const std::uint8_t> bytes);
MelodyVae load_melody_vae(std::span<const std::uint8_t> bytes);
Translator load_translator(std::span<const std::uint8_t> bytes);

// Cross-checkpoint compatibility: kinds, latent dims against translator
// endpoint dims, and bar counts. Throws a contract error naming the field.
void validate_model_set(const CheckpointMeta& image, const CheckpointMeta& melody,
                        const CheckpointMeta& translator);

// Latent-pair sets use a sibling container: magic "AVSYNPR1", u32 count and
// dims, then per pair an origin byte and both float32 vectors.
std::vector<std::uint8_t> save_pairs(const std::vector<LatentPair>& pairs, int d_image,
                                     int d_melody);
std::vector<LatentPair> load_pairs(std::span<const std::uint8_t> bytes);

}  // namespace avsyn
