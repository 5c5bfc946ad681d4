// SPDX-License-Identifier: Apache-2.0
#include "avsyn/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <sstream>

#include "avsyn/error.hpp"

static_assert(std::numeric_limits<float>::is_iec559, "float32 serialization needs IEEE 754");

namespace avsyn {

namespace {

constexpr std::uint32_t kMaxListLength = 1u << 20;
constexpr std::uint32_t kMaxTensorSide = 1u << 27;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct Cursor {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (data.size() - pos < n) throw ParseError(std::string("checkpoint truncated in ") + what, pos);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data[pos + static_cast<std::size_t>(i)];
    pos += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
};

std::vector<CheckpointField> parse_fields(Cursor& c) {
  const std::uint32_t n = c.u32("field count");
  if (n > kMaxListLength) throw ParseError("field count out of range", c.pos - 4);
  std::vector<CheckpointField> fields;
  fields.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t len = c.u32("field length");
    if (len > kMaxListLength) throw ParseError("field length out of range", c.pos - 4);
    c.need(len, "field body");
    const std::string body(reinterpret_cast<const char*>(c.data.data() + c.pos), len);
    c.pos += len;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("field is not key=value", c.pos - len);
    fields.push_back({body.substr(0, eq), body.substr(eq + 1)});
  }
  return fields;
}

void check_magic(Cursor& c) {
  c.need(sizeof(kCheckpointMagic), "magic");
  if (std::memcmp(c.data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw ParseError("bad checkpoint magic", 0);
  c.pos += sizeof(kCheckpointMagic);
}

std::pair<std::uint32_t, std::uint32_t> tensor_shape(Cursor& c) {
  const std::uint32_t rows = c.u32("tensor rows");
  const std::uint32_t cols = c.u32("tensor cols");
  if (rows == 0 || cols == 0 || rows > kMaxTensorSide || cols > kMaxTensorSide ||
      static_cast<std::uint64_t>(rows) * cols > kMaxTensorSide)
    throw ParseError("tensor shape out of range", c.pos - 8);
  return {rows, cols};
}

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ContractError("checkpoint field '" + key + "' is not an integer: " + value);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ContractError("checkpoint field '" + key + "' is not an integer: " + value);
  return out;
}

// Floats render with nine significant digits so the text round trip is exact.
std::string float_text(float value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(value));
  return buf;
}

float to_float(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const float out = std::strtof(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty() || !std::isfinite(out))
    throw ContractError("checkpoint field '" + key + "' is not a finite real: " + value);
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::string join_dims(const DenseNet<float>& net) {
  std::string out = std::to_string(net.layers.front().weight.cols());
  for (const auto& layer : net.layers) {
    out += ',';
    out += std::to_string(layer.weight.rows());
  }
  return out;
}

std::string join_acts(const DenseNet<float>& net) {
  std::string out;
  for (const auto& layer : net.layers) {
    if (!out.empty()) out += ',';
    out += activation_name(layer.activation);
  }
  return out;
}

void append_net_tensors(const DenseNet<float>& net, std::vector<MatF>& tensors) {
  for (const auto& layer : net.layers) {
    tensors.push_back(layer.weight);
    tensors.emplace_back(layer.bias);
  }
}

// Rebuilds one net from dims/acts fields, consuming tensors from `next`.
DenseNet<float> net_from_checkpoint(const Checkpoint& ckpt, const std::string& prefix,
                                    std::size_t& next) {
  const auto dims_text = split_csv(field_value(ckpt.fields, prefix + "_dims"));
  const auto acts_text = split_csv(field_value(ckpt.fields, prefix + "_acts"));
  if (dims_text.size() < 2 || acts_text.size() + 1 != dims_text.size())
    throw ContractError("checkpoint field '" + prefix + "_dims' does not match '" + prefix +
                        "_acts'");
  std::vector<int> dims;
  for (const auto& d : dims_text) dims.push_back(to_int(prefix + "_dims", d));
  std::vector<Activation> acts;
  for (const auto& a : acts_text) acts.push_back(activation_from_name(a));

  DenseNet<float> net = make_dense_net<float>(dims, acts);
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    if (next + 2 > ckpt.tensors.size())
      throw ContractError("checkpoint is missing tensors for " + prefix);
    const MatF& w = ckpt.tensors[next++];
    const MatF& b = ckpt.tensors[next++];
    if (w.rows() != net.layers[k].weight.rows() || w.cols() != net.layers[k].weight.cols())
      throw ContractError("tensor shape mismatch in " + prefix + " layer " + std::to_string(k) +
                          " weight");
    if (b.rows() != net.layers[k].bias.size() || b.cols() != 1)
      throw ContractError("tensor shape mismatch in " + prefix + " layer " + std::to_string(k) +
                          " bias");
    net.layers[k].weight = w;
    net.layers[k].bias = b.col(0);
  }
  return net;
}

const std::string& require_kind(const CheckpointMeta& meta, const std::string& expected,
                                const char* role) {
  const std::string& kind = field_value(meta.fields, "kind");
  if (kind != expected)
    throw ContractError(std::string(role) + " checkpoint kind mismatch: expected " + expected +
                        ", found " + kind);
  return kind;
}

void expect_kind(const Checkpoint& ckpt, const std::string& expected) {
  const std::string& kind = field_value(ckpt.fields, "kind");
  if (kind != expected)
    throw ContractError("checkpoint kind mismatch: expected " + expected + ", found " + kind);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + sizeof(kCheckpointMagic));
  put_u32(out, static_cast<std::uint32_t>(checkpoint.fields.size()));
  for (const auto& field : checkpoint.fields) {
    const std::string body = field.key + "=" + field.value;
    put_u32(out, static_cast<std::uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
  }
  put_u32(out, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const MatF& tensor : checkpoint.tensors) {
    put_u32(out, static_cast<std::uint32_t>(tensor.rows()));
    put_u32(out, static_cast<std::uint32_t>(tensor.cols()));
    for (Eigen::Index r = 0; r < tensor.rows(); ++r)
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) put_f32(out, tensor(r, c));
  }
  return out;
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  Cursor c{bytes};
  check_magic(c);
  Checkpoint ckpt;
  ckpt.fields = parse_fields(c);
  const std::uint32_t n_tensors = c.u32("tensor count");
  if (n_tensors > kMaxListLength) throw ParseError("tensor count out of range", c.pos - 4);
  ckpt.tensors.reserve(n_tensors);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto [rows, cols] = tensor_shape(c);
    MatF tensor(rows, cols);
    c.need(std::size_t(4) * rows * cols, "tensor data");
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t col = 0; col < cols; ++col) tensor(r, col) = c.f32("tensor data");
    ckpt.tensors.push_back(std::move(tensor));
  }
  if (c.pos != bytes.size()) throw ParseError("trailing bytes after checkpoint", c.pos);
  return ckpt;
}

CheckpointMeta read_checkpoint_meta(std::span<const std::uint8_t> bytes) {
  Cursor c{bytes};
  check_magic(c);
  CheckpointMeta meta;
  meta.fields = parse_fields(c);
  const std::uint32_t n_tensors = c.u32("tensor count");
  if (n_tensors > kMaxListLength) throw ParseError("tensor count out of range", c.pos - 4);
  meta.tensor_shapes.reserve(n_tensors);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto shape = tensor_shape(c);
    const std::size_t payload = std::size_t(4) * shape.first * shape.second;
    c.need(payload, "tensor data");
    c.pos += payload;
    meta.tensor_shapes.push_back(shape);
  }
  if (c.pos != bytes.size()) throw ParseError("trailing bytes after checkpoint", c.pos);
  return meta;
}

const std::string& field_value(const std::vector<CheckpointField>& fields,
                               const std::string& key) {
  for (const auto& field : fields)
    if (field.key == key) return field.value;
  throw ContractError("checkpoint missing field '" + key + "'");
}

std::vector<std::uint8_t> save_image_vae(const ImageVae& vae) {
  Checkpoint ckpt;
  ckpt.fields = {{"kind", "image-vae"},
                 {"bars", std::to_string(vae.bars)},
                 {"latent_dim", std::to_string(vae.core.latent_dim)},
                 {"seed", std::to_string(vae.seed)},
                 {"epochs", std::to_string(vae.epochs_trained)},
                 {"input_shift", float_text(vae.core.input_shift)},
                 {"enc_dims", join_dims(vae.core.encoder)},
                 {"enc_acts", join_acts(vae.core.encoder)},
                 {"dec_dims", join_dims(vae.core.decoder)},
                 {"dec_acts", join_acts(vae.core.decoder)}};
  append_net_tensors(vae.core.encoder, ckpt.tensors);
  append_net_tensors(vae.core.decoder, ckpt.tensors);
  return serialize_checkpoint(ckpt);
}

std::vector<std::uint8_t> save_melody_vae(const MelodyVae& vae) {
  Checkpoint ckpt;
  ckpt.fields = {{"kind", "melody-vae"},
                 {"bars", std::to_string(vae.bars)},
                 {"latent_dim", std::to_string(vae.core.latent_dim)},
                 {"seed", std::to_string(vae.seed)},
                 {"epochs", std::to_string(vae.epochs_trained)},
                 {"input_shift", float_text(vae.core.input_shift)},
                 {"enc_dims", join_dims(vae.core.encoder)},
                 {"enc_acts", join_acts(vae.core.encoder)},
                 {"dec_dims", join_dims(vae.core.decoder)},
                 {"dec_acts", join_acts(vae.core.decoder)}};
  append_net_tensors(vae.core.encoder, ckpt.tensors);
  append_net_tensors(vae.core.decoder, ckpt.tensors);
  return serialize_checkpoint(ckpt);
}

std::vector<std::uint8_t> save_translator(const Translator& translator) {
  Checkpoint ckpt;
  ckpt.fields = {{"kind", "translator"},
                 {"bars", std::to_string(translator.bars)},
                 {"d_image", std::to_string(translator_d_image(translator))},
                 {"d_melody", std::to_string(translator_d_melody(translator))},
                 {"seed", std::to_string(translator.seed)},
                 {"stage", std::to_string(translator.stage)},
                 {"i2m_dims", join_dims(translator.i2m)},
                 {"i2m_acts", join_acts(translator.i2m)},
                 {"m2i_dims", join_dims(translator.m2i)},
                 {"m2i_acts", join_acts(translator.m2i)}};
  append_net_tensors(translator.i2m, ckpt.tensors);
  append_net_tensors(translator.m2i, ckpt.tensors);
  return serialize_checkpoint(ckpt);
}

namespace {

VaeNet<float> vae_core_from_checkpoint(const Checkpoint& ckpt) {
  VaeNet<float> core;
  core.latent_dim = to_int("latent_dim", field_value(ckpt.fields, "latent_dim"));
  core.input_shift = to_float("input_shift", field_value(ckpt.fields, "input_shift"));
  std::size_t next = 0;
  core.encoder = net_from_checkpoint(ckpt, "enc", next);
  core.decoder = net_from_checkpoint(ckpt, "dec", next);
  if (next != ckpt.tensors.size()) throw ContractError("checkpoint has extra tensors");
  if (core.encoder.layers.back().weight.rows() != 2 * core.latent_dim)
    throw ContractError("encoder output dim does not equal 2*latent_dim");
  if (core.decoder.layers.front().weight.cols() != core.latent_dim)
    throw ContractError("decoder input dim does not equal latent_dim");
  return core;
}

}  // namespace

ImageVae load_image_vae(std::span<const std::uint8_t> bytes) {
  const Checkpoint ckpt = parse_checkpoint(bytes);
  expect_kind(ckpt, "image-vae");
  ImageVae vae;
  vae.bars = to_int("bars", field_value(ckpt.fields, "bars"));
  vae.seed = to_u64("seed", field_value(ckpt.fields, "seed"));
  vae.epochs_trained = to_int("epochs", field_value(ckpt.fields, "epochs"));
  vae.core = vae_core_from_checkpoint(ckpt);
  if (vae.core.encoder.layers.front().weight.cols() != kImageChannels)
    throw ContractError("image checkpoint input dim is not a 64x64 RGB image");
  return vae;
}

MelodyVae load_melody_vae(std::span<const std::uint8_t> bytes) {
  const Checkpoint ckpt = parse_checkpoint(bytes);
  expect_kind(ckpt, "melody-vae");
  MelodyVae vae;
  vae.bars = to_int("bars", field_value(ckpt.fields, "bars"));
  vae.seed = to_u64("seed", field_value(ckpt.fields, "seed"));
  vae.epochs_trained = to_int("epochs", field_value(ckpt.fields, "epochs"));
  vae.core = vae_core_from_checkpoint(ckpt);
  const int expected = vae.bars * kStepsPerBar * kAlphabetSize;
  if (vae.core.encoder.layers.front().weight.cols() != expected)
    throw ContractError("melody checkpoint input dim does not match bars field");
  return vae;
}

Translator load_translator(std::span<const std::uint8_t> bytes) {
  const Checkpoint ckpt = parse_checkpoint(bytes);
  expect_kind(ckpt, "translator");
  Translator t;
  t.bars = to_int("bars", field_value(ckpt.fields, "bars"));
  t.seed = to_u64("seed", field_value(ckpt.fields, "seed"));
  t.stage = to_int("stage", field_value(ckpt.fields, "stage"));
  std::size_t next = 0;
  t.i2m = net_from_checkpoint(ckpt, "i2m", next);
  t.m2i = net_from_checkpoint(ckpt, "m2i", next);
  if (next != ckpt.tensors.size()) throw ContractError("checkpoint has extra tensors");
  const int d_image = to_int("d_image", field_value(ckpt.fields, "d_image"));
  const int d_melody = to_int("d_melody", field_value(ckpt.fields, "d_melody"));
  if (translator_d_image(t) != d_image || translator_d_melody(t) != d_melody)
    throw ContractError("translator tensor dims do not match d_image/d_melody fields");
  return t;
}

std::vector<std::uint8_t> save_pairs(const std::vector<LatentPair>& pairs, int d_image,
                                     int d_melody) {
  std::vector<std::uint8_t> out = {'A', 'V', 'S', 'Y', 'N', 'P', 'R', '1'};
  put_u32(out, static_cast<std::uint32_t>(pairs.size()));
  put_u32(out, static_cast<std::uint32_t>(d_image));
  put_u32(out, static_cast<std::uint32_t>(d_melody));
  for (const LatentPair& pair : pairs) {
    if (pair.z_image.size() != d_image || pair.z_melody.size() != d_melody)
      throw ShapeError("pair dims do not match the declared dims");
    out.push_back(static_cast<std::uint8_t>(pair.origin));
    for (Eigen::Index i = 0; i < pair.z_image.size(); ++i) put_f32(out, pair.z_image[i]);
    for (Eigen::Index i = 0; i < pair.z_melody.size(); ++i) put_f32(out, pair.z_melody[i]);
  }
  return out;
}

std::vector<LatentPair> load_pairs(std::span<const std::uint8_t> bytes) {
  Cursor c{bytes};
  static constexpr char kPairsMagic[8] = {'A', 'V', 'S', 'Y', 'N', 'P', 'R', '1'};
  c.need(sizeof(kPairsMagic), "magic");
  if (std::memcmp(bytes.data(), kPairsMagic, sizeof(kPairsMagic)) != 0)
    throw ParseError("bad pairs magic", 0);
  c.pos += sizeof(kPairsMagic);
  const std::uint32_t n = c.u32("pair count");
  const std::uint32_t d_image = c.u32("d_image");
  const std::uint32_t d_melody = c.u32("d_melody");
  if (n > kMaxListLength || d_image == 0 || d_melody == 0 || d_image > kMaxTensorSide ||
      d_melody > kMaxTensorSide)
    throw ParseError("pair header out of range", c.pos);
  std::vector<LatentPair> pairs;
  pairs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    LatentPair pair;
    c.need(1, "pair origin");
    const std::uint8_t origin = c.data[c.pos++];
    if (origin > 1) throw ParseError("unknown pair origin", c.pos - 1);
    pair.origin = static_cast<PairOrigin>(origin);
    pair.z_image.resize(d_image);
    for (std::uint32_t k = 0; k < d_image; ++k) pair.z_image[k] = c.f32("pair data");
    pair.z_melody.resize(d_melody);
    for (std::uint32_t k = 0; k < d_melody; ++k) pair.z_melody[k] = c.f32("pair data");
    pairs.push_back(std::move(pair));
  }
  if (c.pos != bytes.size()) throw ParseError("trailing bytes after pairs", c.pos);
  return pairs;
}

void validate_model_set(const CheckpointMeta& image, const CheckpointMeta& melody,
                        const CheckpointMeta& translator) {
  require_kind(image, "image-vae", "image");
  require_kind(melody, "melody-vae", "melody");
  require_kind(translator, "translator", "translator");

  const int d_img = to_int("latent_dim", field_value(image.fields, "latent_dim"));
  const int d_mel = to_int("latent_dim", field_value(melody.fields, "latent_dim"));
  const int t_img = to_int("d_image", field_value(translator.fields, "d_image"));
  const int t_mel = to_int("d_melody", field_value(translator.fields, "d_melody"));
  if (t_img != d_img)
    throw ContractError("translator d_image=" + std::to_string(t_img) +
                        " but image checkpoint latent_dim=" + std::to_string(d_img));
  if (t_mel != d_mel)
    throw ContractError("translator d_melody=" + std::to_string(t_mel) +
                        " but melody checkpoint latent_dim=" + std::to_string(d_mel));

  const int bars_mel = to_int("bars", field_value(melody.fields, "bars"));
  const int bars_img = to_int("bars", field_value(image.fields, "bars"));
  const int bars_t = to_int("bars", field_value(translator.fields, "bars"));
  if (bars_t != bars_mel)
    throw ContractError("translator bars=" + std::to_string(bars_t) +
                        " but melody checkpoint bars=" + std::to_string(bars_mel));
  if (bars_img != bars_mel)
    throw ContractError("image checkpoint bars=" + std::to_string(bars_img) +
                        " but melody checkpoint bars=" + std::to_string(bars_mel));
}

}  // namespace avsyn
