// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. One subcommand per workflow stage; every command
// that produces artifacts also writes a manifest recording inputs, seed, and
// checkpoint identities. Exit codes: 0 ok, 1 usage, 2 data, 3 contract.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "avsyn/checkpoint.hpp"
#include "avsyn/codec.hpp"
#include "avsyn/interp.hpp"
#include "avsyn/io_util.hpp"
#include "avsyn/manifest.hpp"
#include "avsyn/midi.hpp"
#include "avsyn/png_io.hpp"
#include "avsyn/translator.hpp"
#include "avsyn/vae.hpp"

namespace {

using namespace avsyn;
namespace fs = std::filesystem;

std::string numbered(const char* stem, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d%s", stem, index, ext);
  return buf;
}

ImageRgb64 load_image64(const fs::path& path) {
  const ImageRgbFull full = load_png(read_file(path));
  if (full.width == kImageSide && full.height == kImageSide) {
    ImageRgb64 image;
    for (int y = 0; y < kImageSide; ++y)
      for (int x = 0; x < kImageSide; ++x)
        for (int c = 0; c < 3; ++c)
          image.at(x, y, c) = static_cast<float>(full.at(x, y, c)) / 255.0f;
    return image;
  }
  return downsample64(full);
}

void save_image64(const fs::path& path, const ImageRgb64& image) {
  write_file(path, save_png(to_rgb8(image)));
}

TokenGrid first_segment(const fs::path& path, int bars) {
  const MidiData midi = parse_midi(read_file(path));
  const auto segments = segment_midi(midi.events, midi.ticks_per_quarter, bars);
  if (segments.empty())
    throw DomainError(path.string() + " holds no full " + std::to_string(bars) + "-bar segment");
  return segments.front();
}

std::string file_identity(const fs::path& path) { return content_identity(read_file(path)); }

struct ModelPaths {
  std::string image_vae;
  std::string melody_vae;
  std::string translator;
};

void add_model_flags(CLI::App* cmd, ModelPaths& paths, bool need_translator = true) {
  cmd->add_option("--image-vae", paths.image_vae, "image model checkpoint")->required();
  cmd->add_option("--melody-vae", paths.melody_vae, "melody model checkpoint")->required();
  if (need_translator)
    cmd->add_option("--translator", paths.translator, "translator checkpoint")->required();
}

Models load_models(const ModelPaths& paths) {
  Models models;
  models.image_vae = load_image_vae(read_file(paths.image_vae));
  models.melody_vae = load_melody_vae(read_file(paths.melody_vae));
  models.translator = load_translator(read_file(paths.translator));
  check_compatible(models);
  return models;
}

ManifestEntries model_identities(const ModelPaths& paths) {
  ManifestEntries out;
  if (!paths.image_vae.empty()) out.emplace_back("image_vae_id", file_identity(paths.image_vae));
  if (!paths.melody_vae.empty())
    out.emplace_back("melody_vae_id", file_identity(paths.melody_vae));
  if (!paths.translator.empty())
    out.emplace_back("translator_id", file_identity(paths.translator));
  return out;
}

std::vector<ImageRgb64> load_image_dir(const fs::path& dir) {
  std::vector<ImageRgb64> images;
  for (const auto& path : list_files(dir, ".png")) images.push_back(load_image64(path));
  if (images.empty()) throw DomainError("no .png files under " + dir.string());
  return images;
}

std::vector<TokenGrid> load_melody_dir(const fs::path& dir, int bars) {
  std::vector<TokenGrid> grids;
  for (const auto& path : list_files(dir, ".mid")) {
    const MidiData midi = parse_midi(read_file(path));
    for (auto& grid : segment_midi(midi.events, midi.ticks_per_quarter, bars))
      grids.push_back(std::move(grid));
  }
  if (grids.empty()) throw DomainError("no " + std::to_string(bars) + "-bar segments under " +
                                       dir.string());
  return grids;
}

void print_epochs(const std::vector<EpochStats>& history) {
  for (std::size_t e = 0; e < history.size(); ++e)
    std::printf("epoch %zu total %.4f recon %.4f kl %.4f\n", e + 1, history[e].total,
                history[e].recon, history[e].kl);
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

struct GenMelodiesArgs {
  int count = 2000;
  int bars = 2;
  std::uint64_t seed = 7;
  std::string out;
};

void run_gen_melodies(const GenMelodiesArgs& args) {
  const auto melodies = procedural_generate(args.seed, args.bars, args.count);
  const fs::path dir(args.out);
  for (int i = 0; i < static_cast<int>(melodies.size()); ++i)
    write_file(dir / numbered("melody", i, ".mid"), write_midi(melodies[static_cast<std::size_t>(i)]));
  write_manifest(dir / "manifest.txt", {{"command", "gen-melodies"},
                                        {"kind", "melodies"},
                                        {"count", std::to_string(melodies.size())},
                                        {"bars", std::to_string(args.bars)},
                                        {"seed", std::to_string(args.seed)},
                                        {"source", "procedural"}});
  std::printf("wrote %zu melodies to %s\n", melodies.size(), args.out.c_str());
}

struct RenderDatasetArgs {
  std::string melodies;
  std::string out;
  int bars = 2;
  int count = 1000;  // 0 renders everything
};

void run_render_dataset(const RenderDatasetArgs& args) {
  const auto grids = load_melody_dir(args.melodies, args.bars);
  const int limit = args.count > 0 ? std::min<int>(args.count, static_cast<int>(grids.size()))
                                   : static_cast<int>(grids.size());
  const fs::path dir(args.out);
  for (int i = 0; i < limit; ++i)
    save_image64(dir / numbered("image", i, ".png"), melody_to_image(grids[static_cast<std::size_t>(i)]));
  write_manifest(dir / "manifest.txt", {{"command", "render-dataset"},
                                        {"kind", "images"},
                                        {"count", std::to_string(limit)},
                                        {"bars", std::to_string(args.bars)},
                                        {"source", args.melodies}});
  std::printf("rendered %d images to %s\n", limit, args.out.c_str());
}

struct IngestTilesArgs {
  std::string dir;
  std::string out;
};

void run_ingest_tiles(const IngestTilesArgs& args) {
  int written = 0;
  const fs::path out_dir(args.out);
  for (const auto& path : list_files(args.dir, ".png")) {
    const ImageRgbFull full = load_png(read_file(path));
    for (const ImageRgb64& tile : tile64(full))
      save_image64(out_dir / numbered("tile", written++, ".png"), tile);
  }
  if (written == 0) throw DomainError("no 64x64 tiles found under " + args.dir);
  write_manifest(out_dir / "manifest.txt", {{"command", "ingest-tiles"},
                                            {"kind", "tiles"},
                                            {"count", std::to_string(written)},
                                            {"source", args.dir}});
  std::printf("wrote %d tiles to %s\n", written, args.out.c_str());
}

struct TrainVaeArgs {
  std::string data;
  std::string out;
  int bars = 2;
  int latent = kDefaultLatentDim;
  int hidden = kDefaultHiddenDim;
  TrainConfig config;
};

void add_train_flags(CLI::App* cmd, TrainVaeArgs& args) {
  cmd->add_option("--out", args.out, "checkpoint path")->required();
  cmd->add_option("--bars", args.bars, "bars per segment");
  cmd->add_option("--latent", args.latent, "latent dimension");
  cmd->add_option("--hidden", args.hidden, "hidden width");
  cmd->add_option("--epochs", args.config.epochs, "training epochs");
  cmd->add_option("--batch", args.config.batch_size, "minibatch size");
  cmd->add_option("--seed", args.config.seed, "run seed");
  cmd->add_option("--beta", args.config.beta, "KL weight after warmup");
  cmd->add_option("--kl-warmup", args.config.kl_warmup_frac, "warmup fraction of steps");
  cmd->add_option("--lr", args.config.learning_rate, "Adam learning rate");
}

void write_checkpoint_manifest(const fs::path& ckpt_path, const char* command,
                               ManifestEntries extra) {
  ManifestEntries entries = {{"command", command},
                             {"identity", file_identity(ckpt_path)}};
  entries.insert(entries.end(), extra.begin(), extra.end());
  write_manifest(ckpt_path.string() + ".manifest", entries);
}

void run_train_image_vae(const TrainVaeArgs& args) {
  const auto images = load_image_dir(args.data);
  ImageVae vae = make_image_vae(args.latent, args.hidden, args.bars, Rng(args.config.seed));
  print_epochs(train_image_vae(vae, images, args.config));
  write_file(args.out, save_image_vae(vae));
  write_checkpoint_manifest(args.out, "train-image-vae",
                            {{"inputs", args.data},
                             {"count", std::to_string(images.size())},
                             {"seed", std::to_string(args.config.seed)},
                             {"epochs", std::to_string(args.config.epochs)}});
}

void run_train_melody_vae(const TrainVaeArgs& args) {
  const auto melodies = load_melody_dir(args.data, args.bars);
  MelodyVae vae = make_melody_vae(args.latent, args.hidden, args.bars, Rng(args.config.seed));
  print_epochs(train_melody_vae(vae, melodies, args.config));
  write_file(args.out, save_melody_vae(vae));
  write_checkpoint_manifest(args.out, "train-melody-vae",
                            {{"inputs", args.data},
                             {"count", std::to_string(melodies.size())},
                             {"seed", std::to_string(args.config.seed)},
                             {"epochs", std::to_string(args.config.epochs)}});
}

struct SamplePriorArgs {
  std::string model;
  int count = 16;
  std::uint64_t seed = 7;
  std::string out;
};

void run_sample_prior(const SamplePriorArgs& args) {
  const auto bytes = read_file(args.model);
  const std::string kind = field_value(read_checkpoint_meta(bytes).fields, "kind");
  const fs::path dir(args.out);
  if (kind == "image-vae") {
    const ImageVae vae = load_image_vae(bytes);
    const auto images = sample_image_prior(vae, args.count, Rng(args.seed));
    for (int i = 0; i < static_cast<int>(images.size()); ++i)
      save_image64(dir / numbered("sample", i, ".png"), images[static_cast<std::size_t>(i)]);
  } else if (kind == "melody-vae") {
    const MelodyVae vae = load_melody_vae(bytes);
    const auto melodies = sample_melody_prior(vae, args.count, Rng(args.seed));
    for (int i = 0; i < static_cast<int>(melodies.size()); ++i)
      write_file(dir / numbered("sample", i, ".mid"), write_midi(melodies[static_cast<std::size_t>(i)]));
  } else {
    throw ContractError("checkpoint kind mismatch: expected image-vae or melody-vae, found " +
                        kind);
  }
  write_manifest(dir / "manifest.txt", {{"command", "sample-prior"},
                                        {"kind", kind},
                                        {"count", std::to_string(args.count)},
                                        {"seed", std::to_string(args.seed)},
                                        {"model_id", content_identity(bytes)}});
  std::printf("wrote %d prior samples to %s\n", args.count, args.out.c_str());
}

struct MakePairsArgs {
  ModelPaths models;
  int count = 2000;
  std::uint64_t seed = 7;
  std::string out;
};

void run_make_pairs(const MakePairsArgs& args) {
  const ImageVae image_vae = load_image_vae(read_file(args.models.image_vae));
  const MelodyVae melody_vae = load_melody_vae(read_file(args.models.melody_vae));
  const auto pairs = make_synthetic_pairs(image_vae, melody_vae, args.count, Rng(args.seed));
  write_file(args.out,
             save_pairs(pairs, image_vae.core.latent_dim, melody_vae.core.latent_dim));
  ManifestEntries entries = {{"command", "make-pairs"},
                             {"kind", "pairs"},
                             {"count", std::to_string(pairs.size())},
                             {"seed", std::to_string(args.seed)},
                             {"identity", file_identity(args.out)}};
  const ManifestEntries ids = model_identities(args.models);
  ManifestEntries all = entries;
  all.insert(all.end(), ids.begin(), ids.end());
  write_manifest(args.out + ".manifest", all);
  std::printf("wrote %zu pairs to %s\n", pairs.size(), args.out.c_str());
}

struct TrainTranslatorArgs {
  int stage = 1;
  std::string pairs;
  std::string tiles;
  std::string translator_in;
  ModelPaths models;
  int bars = 2;
  std::string out;
  TranslatorTrainConfig config;
};

void run_train_translator(const TrainTranslatorArgs& args) {
  const auto pairs = load_pairs(read_file(args.pairs));
  if (pairs.empty()) throw DomainError("pairs file is empty: " + args.pairs);
  const int d_image = static_cast<int>(pairs.front().z_image.size());
  const int d_melody = static_cast<int>(pairs.front().z_melody.size());

  Translator translator;
  ManifestEntries extra = {{"stage", std::to_string(args.stage)},
                           {"pairs", args.pairs},
                           {"pairs_id", file_identity(args.pairs)},
                           {"seed", std::to_string(args.config.seed)},
                           {"epochs", std::to_string(args.config.epochs)}};
  if (args.stage == 1) {
    translator = make_translator(d_image, d_melody, args.bars, Rng(args.config.seed));
    const auto history = train_stage1(translator, pairs, args.config);
    std::printf("stage1 first i2m %.6f m2i %.6f last i2m %.6f m2i %.6f\n",
                history.front().i2m_mse, history.front().m2i_mse, history.back().i2m_mse,
                history.back().m2i_mse);
  } else {
    if (args.translator_in.empty())
      throw ConfigError("--translator (stage-1 checkpoint) is required for stage 2");
    translator = load_translator(read_file(args.translator_in));
    const ImageVae image_vae = load_image_vae(read_file(args.models.image_vae));
    const MelodyVae melody_vae = load_melody_vae(read_file(args.models.melody_vae));
    std::vector<ImageRgb64> tiles;
    if (!args.tiles.empty()) tiles = load_image_dir(args.tiles);
    const auto history =
        refine_stage2(translator, tiles, image_vae, melody_vae, pairs, args.config);
    if (!history.empty())
      std::printf("stage2 first i2m %.6f m2i %.6f last i2m %.6f m2i %.6f\n",
                  history.front().i2m_mse, history.front().m2i_mse, history.back().i2m_mse,
                  history.back().m2i_mse);
    extra.emplace_back("tiles", args.tiles);
    extra.emplace_back("translator_in_id", file_identity(args.translator_in));
  }
  write_file(args.out, save_translator(translator));
  write_checkpoint_manifest(args.out, "train-translator", extra);
}

struct TranslateArgs {
  std::string mode;
  std::string input;
  std::string output;
  ModelPaths models;
};

void run_translate(const TranslateArgs& args) {
  const Models models = load_models(args.models);
  if (args.mode == "i2m") {
    const TokenGrid melody = translate_image_to_melody(load_image64(args.input), models);
    write_file(args.output, write_midi(melody));
  } else {
    const TokenGrid grid = first_segment(args.input, models.melody_vae.bars);
    save_image64(args.output, translate_melody_to_image(grid, models));
  }
  ManifestEntries entries = {{"command", "translate"},
                             {"mode", args.mode},
                             {"input", args.input},
                             {"input_id", file_identity(args.input)},
                             {"output_id", file_identity(args.output)}};
  const ManifestEntries ids = model_identities(args.models);
  entries.insert(entries.end(), ids.begin(), ids.end());
  write_manifest(args.output + ".manifest", entries);
}

struct InterpolateArgs {
  std::string image_a;
  std::string image_b;
  std::string out_dir;
  ModelPaths models;
  int intermediates = 7;
  int fps = 24;
  int tempo = 120;
};

void run_interpolate(const InterpolateArgs& args) {
  const Models models = load_models(args.models);
  InterpSpec spec;
  spec.image_a = load_image64(args.image_a);
  spec.image_b = load_image64(args.image_b);
  spec.intermediate_count = args.intermediates;
  spec.bars = models.melody_vae.bars;
  spec.fps = args.fps;
  spec.tempo_bpm = args.tempo;
  const InterpResult result = interpolation_sequence(spec, models);

  const fs::path dir(args.out_dir);
  for (int i = 0; i < static_cast<int>(result.frames.size()); ++i)
    save_image64(dir / "frames" / numbered("frame", i, ".png"),
                 result.frames[static_cast<std::size_t>(i)]);
  write_file(dir / "audio.mid", result.midi);

  nlohmann::json manifest;
  manifest["fps"] = spec.fps;
  manifest["frame_count"] = result.frames.size();
  manifest["tempo"] = spec.tempo_bpm;
  manifest["bars"] = spec.bars;
  manifest["segments"] = result.melodies.size();
  manifest["image_vae_id"] = file_identity(args.models.image_vae);
  manifest["melody_vae_id"] = file_identity(args.models.melody_vae);
  manifest["translator_id"] = file_identity(args.models.translator);
  const std::string text = manifest.dump(2) + "\n";
  write_file(dir / "manifest.json",
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  std::printf("wrote %zu frames and %zu segments to %s\n", result.frames.size(),
              result.melodies.size(), args.out_dir.c_str());
}

struct HeterogeneityArgs {
  std::vector<std::string> midis;
  ModelPaths models;
};

void run_heterogeneity(const HeterogeneityArgs& args) {
  const Models models = load_models(args.models);
  for (const auto& path : args.midis) {
    const MidiData midi = parse_midi(read_file(path));
    const SeriesAnalysis analysis = analyze_series(midi, models);
    std::printf("%s n=%d melody=%.6f image=%.6f\n", path.c_str(), analysis.melody.n,
                analysis.melody.heterogeneity, analysis.image.heterogeneity);
  }
}

struct TransposeArgs {
  std::string mode;
  std::string input;
  std::string output;
  int bars = 2;
};

void run_transpose(const TransposeArgs& args) {
  if (args.mode == "image-to-melody") {
    const TokenGrid grid = image_to_melody(load_image64(args.input), args.bars);
    write_file(args.output, write_midi(grid));
  } else {
    const TokenGrid grid = first_segment(args.input, args.bars);
    save_image64(args.output, melody_to_image(grid));
  }
}

void run_gradcheck(std::uint64_t seed) {
  Rng rng = Rng(seed).split("gradcheck");
  double worst = 0.0;

  auto random_input = [&](int n) {
    VecD x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.normal();
    return x;
  };

  // Dense nets of one to three layers against both losses.
  const std::vector<std::vector<int>> dim_sets = {{3, 4}, {4, 5, 3}, {5, 6, 4, 3}};
  const std::vector<std::vector<Activation>> act_sets = {
      {Activation::kTanh},
      {Activation::kRelu, Activation::kIdentity},
      {Activation::kTanh, Activation::kSigmoid, Activation::kIdentity}};
  for (std::size_t k = 0; k < dim_sets.size(); ++k) {
    DenseNet<double> net = make_dense_net<double>(dim_sets[k], act_sets[k]);
    glorot_init(net, rng);
    const int out_dim = dim_sets[k].back();
    LossSpec<double> loss;
    loss.kind = LossKind::kMse;
    loss.target = random_input(out_dim);
    worst = std::max(worst, grad_check(net, loss, MatD(random_input(dim_sets[k].front()))));
    LossSpec<double> ce;
    ce.kind = LossKind::kStepCrossEntropy;
    ce.alphabet = out_dim;
    ce.tokens = {static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(out_dim)))};
    worst = std::max(worst, grad_check(net, ce, MatD(random_input(dim_sets[k].front()))));
  }

  // Miniature models with frozen reparameterization noise, both objectives.
  for (const bool cross_entropy : {false, true}) {
    VaeNet<double> vae;
    vae.latent_dim = 3;
    const int input_dim = cross_entropy ? 8 : 6;
    vae.encoder = make_dense_net<double>({input_dim, 5, 6}, {Activation::kTanh, Activation::kIdentity});
    vae.decoder = make_dense_net<double>({3, 5, input_dim},
                                 {Activation::kTanh,
                                  cross_entropy ? Activation::kIdentity : Activation::kSigmoid});
    glorot_init(vae.encoder, rng);
    glorot_init(vae.decoder, rng);
    MatD batch(input_dim, 2);
    if (cross_entropy) {
      batch.setZero();
      for (int b = 0; b < 2; ++b) {
        batch(static_cast<int>(rng.uniform_int(4)), b) = 1.0;
        batch(4 + static_cast<int>(rng.uniform_int(4)), b) = 1.0;
      }
    } else {
      for (int b = 0; b < 2; ++b) batch.col(b) = random_input(input_dim).cwiseAbs() * 0.1;
    }
    MatD eps(3, 2);
    for (int b = 0; b < 2; ++b) eps.col(b) = random_input(3);
    worst = std::max(worst, vae_grad_check(vae, batch, eps, 0.7,
                                           cross_entropy ? ReconKind::kStepCrossEntropy
                                                         : ReconKind::kSumSquared,
                                           cross_entropy ? 4 : 0));
  }

  std::printf("worst relative gradient error %.3e\n", worst);
  if (worst > 1e-4) throw ContractError("gradient check exceeded 1e-4 relative error");
}

struct ValidateArgs {
  ModelPaths models;
};

void run_validate(const ValidateArgs& args) {
  const auto image_bytes = read_file(args.models.image_vae);
  const auto melody_bytes = read_file(args.models.melody_vae);
  const auto translator_bytes = read_file(args.models.translator);
  const CheckpointMeta image = read_checkpoint_meta(image_bytes);
  const CheckpointMeta melody = read_checkpoint_meta(melody_bytes);
  const CheckpointMeta translator = read_checkpoint_meta(translator_bytes);
  validate_model_set(image, melody, translator);
  std::printf("image-vae   latent_dim=%s bars=%s id=%s\n",
              field_value(image.fields, "latent_dim").c_str(),
              field_value(image.fields, "bars").c_str(), content_identity(image_bytes).c_str());
  std::printf("melody-vae  latent_dim=%s bars=%s id=%s\n",
              field_value(melody.fields, "latent_dim").c_str(),
              field_value(melody.fields, "bars").c_str(), content_identity(melody_bytes).c_str());
  std::printf("translator  d_image=%s d_melody=%s bars=%s stage=%s id=%s\n",
              field_value(translator.fields, "d_image").c_str(),
              field_value(translator.fields, "d_melody").c_str(),
              field_value(translator.fields, "bars").c_str(),
              field_value(translator.fields, "stage").c_str(),
              content_identity(translator_bytes).c_str());
  std::printf("OK\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bidirectional image/melody translation toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-melodies", "procedural training melodies as MIDI");
  GenMelodiesArgs gen_args;
  gen->add_option("--count", gen_args.count, "melody count");
  gen->add_option("--bars", gen_args.bars, "bars per melody");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--out", gen_args.out, "output directory")->required();
  gen->set_config("--config");

  auto* render = app.add_subcommand("render-dataset", "render melodies to training images");
  RenderDatasetArgs render_args;
  render->add_option("--melodies", render_args.melodies, "melody directory")->required();
  render->add_option("--out", render_args.out, "output directory")->required();
  render->add_option("--bars", render_args.bars, "bars per segment");
  render->add_option("--count", render_args.count, "image limit, 0 for all");
  render->set_config("--config");

  auto* ingest = app.add_subcommand("ingest-tiles", "cut source images into 64x64 tiles");
  IngestTilesArgs ingest_args;
  ingest->add_option("dir", ingest_args.dir, "directory of source PNGs")->required();
  ingest->add_option("--out", ingest_args.out, "output directory")->required();
  ingest->set_config("--config");

  auto* train_img = app.add_subcommand("train-image-vae", "train the image model");
  TrainVaeArgs train_img_args;
  train_img->add_option("--images", train_img_args.data, "training image directory")->required();
  add_train_flags(train_img, train_img_args);
  train_img->set_config("--config");

  auto* train_mel = app.add_subcommand("train-melody-vae", "train the melody model");
  TrainVaeArgs train_mel_args;
  train_mel->add_option("--melodies", train_mel_args.data, "training melody directory")
      ->required();
  add_train_flags(train_mel, train_mel_args);
  train_mel->set_config("--config");

  auto* sample = app.add_subcommand("sample-prior", "decode standard-normal latents");
  SamplePriorArgs sample_args;
  sample->add_option("--model", sample_args.model, "model checkpoint")->required();
  sample->add_option("--count", sample_args.count, "sample count");
  sample->add_option("--seed", sample_args.seed, "sampling seed");
  sample->add_option("--out", sample_args.out, "output directory")->required();
  sample->set_config("--config");

  auto* pairs = app.add_subcommand("make-pairs", "synthetic latent pairs from the prior");
  MakePairsArgs pairs_args;
  add_model_flags(pairs, pairs_args.models, false);
  pairs->add_option("--count", pairs_args.count, "pair count");
  pairs->add_option("--seed", pairs_args.seed, "sampling seed");
  pairs->add_option("--out", pairs_args.out, "pairs file")->required();
  pairs->set_config("--config");

  auto* train_tr = app.add_subcommand("train-translator", "train the latent translator");
  TrainTranslatorArgs tr_args;
  train_tr->add_option("--stage", tr_args.stage, "1 pair training, 2 tile refinement")
      ->required()
      ->check(CLI::Range(1, 2));
  train_tr->add_option("--pairs", tr_args.pairs, "synthetic pairs file")->required();
  train_tr->add_option("--tiles", tr_args.tiles, "tile directory (stage 2)");
  train_tr->add_option("--translator", tr_args.translator_in, "stage-1 checkpoint (stage 2)");
  train_tr->add_option("--image-vae", tr_args.models.image_vae, "image model (stage 2)");
  train_tr->add_option("--melody-vae", tr_args.models.melody_vae, "melody model (stage 2)");
  train_tr->add_option("--bars", tr_args.bars, "bars per segment");
  train_tr->add_option("--out", tr_args.out, "checkpoint path")->required();
  train_tr->add_option("--epochs", tr_args.config.epochs, "training epochs");
  train_tr->add_option("--batch", tr_args.config.batch_size, "minibatch size");
  train_tr->add_option("--seed", tr_args.config.seed, "run seed");
  train_tr->add_option("--lr", tr_args.config.learning_rate, "Adam learning rate");
  train_tr->set_config("--config");

  auto* translate = app.add_subcommand("translate", "run a trained translation pipeline");
  TranslateArgs translate_args;
  translate->add_option("mode", translate_args.mode, "i2m or m2i")
      ->required()
      ->check(CLI::IsMember({"i2m", "m2i"}));
  translate->add_option("input", translate_args.input, "input file")->required();
  translate->add_option("output", translate_args.output, "output file")->required();
  add_model_flags(translate, translate_args.models);
  translate->set_config("--config");

  auto* interp = app.add_subcommand("interpolate", "latent interpolation audio and frames");
  InterpolateArgs interp_args;
  interp->add_option("image_a", interp_args.image_a, "start image")->required();
  interp->add_option("image_b", interp_args.image_b, "end image")->required();
  interp->add_option("out_dir", interp_args.out_dir, "output directory")->required();
  add_model_flags(interp, interp_args.models);
  interp->add_option("--intermediates", interp_args.intermediates, "melodies between endpoints");
  interp->add_option("--fps", interp_args.fps, "video frame rate");
  interp->add_option("--tempo", interp_args.tempo, "audio tempo in BPM");
  interp->set_config("--config");

  auto* het = app.add_subcommand("heterogeneity", "latent diversity of MIDI series");
  HeterogeneityArgs het_args;
  het->add_option("midi", het_args.midis, "MIDI files")->required()->expected(-1);
  add_model_flags(het, het_args.models);
  het->set_config("--config");

  auto* transpose = app.add_subcommand("transpose", "pure note-color codec, no models");
  TransposeArgs transpose_args;
  transpose->add_option("mode", transpose_args.mode, "image-to-melody or melody-to-image")
      ->required()
      ->check(CLI::IsMember({"image-to-melody", "melody-to-image"}));
  transpose->add_option("input", transpose_args.input, "input file")->required();
  transpose->add_option("output", transpose_args.output, "output file")->required();
  transpose->add_option("--bars", transpose_args.bars, "bars per segment");
  transpose->set_config("--config");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  std::uint64_t gradcheck_seed = 7;
  gradcheck->add_option("--seed", gradcheck_seed, "probe seed");
  gradcheck->set_config("--config");

  auto* validate = app.add_subcommand("validate", "cross-check a checkpoint triple");
  ValidateArgs validate_args;
  add_model_flags(validate, validate_args.models);
  validate->set_config("--config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) run_gen_melodies(gen_args);
    if (render->parsed()) run_render_dataset(render_args);
    if (ingest->parsed()) run_ingest_tiles(ingest_args);
    if (train_img->parsed()) run_train_image_vae(train_img_args);
    if (train_mel->parsed()) run_train_melody_vae(train_mel_args);
    if (sample->parsed()) run_sample_prior(sample_args);
    if (pairs->parsed()) run_make_pairs(pairs_args);
    if (train_tr->parsed()) run_train_translator(tr_args);
    if (translate->parsed()) run_translate(translate_args);
    if (interp->parsed()) run_interpolate(interp_args);
    if (het->parsed()) run_heterogeneity(het_args);
    if (transpose->parsed()) run_transpose(transpose_args);
    if (gradcheck->parsed()) run_gradcheck(gradcheck_seed);
    if (validate->parsed()) run_validate(validate_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
