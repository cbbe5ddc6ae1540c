#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "freqadapt/adapter.hpp"
#include "freqadapt/cca.hpp"
#include "freqadapt/sda.hpp"
#include "freqadapt/synth.hpp"

// Run configuration shared by the CLI commands.
//
// Config file grammar: one `key = value` per line, `#` starts a comment,
// blank lines are ignored, a later key overrides an earlier one. Command-line
// flags are applied after the file and therefore win.
//
// Keys (all optional):
//   seed          u64
//   alpha         comma list of positive reals (one value broadcasts)
//   dk            key dimension, >= 1
//   cut           radial cut in (0, 1)
//   stage         comma list of i=kind, kind in none|plain|sda|cca
//   text_tokens   number of synthetic text tokens, >= 1
//   text_dim      synthetic text embedding dimension, >= 1
//   text          path to a 2-axis tensor file of text tokens
//   scale_mode    raw | times_c
//   norm_mode     channel | tensor
//   residual      before | after   (relative to the projection)
//   bias          true | false     (output projection bias)
//   weight_scale  positive real, adapter branch weight scale
//   sda_identity  true | false     (force sigma = 1, mu = 0)
//   kind          noise | smooth | checker
//   channels, height, width   >= 1
//   in, out       comma list of paths
//   pgm, csv      output paths
//   suite         spectral | sda | cca | grad | adapter | all (verify), or a comma list
//                 of gradcheck targets
//   probes        >= 1

namespace freqadapt::config {

struct RunConfig {
  std::uint64_t seed = 0;
  std::vector<double> alpha;
  std::size_t key_dim = cca::kDefaultKeyDim;
  double cut = 0.25;
  std::map<std::size_t, adapter::StageKind> stages;
  bool stages_given = false;
  std::size_t text_tokens = 5;
  std::size_t text_dim = 16;
  std::filesystem::path text_path;
  sda::ScaleMode scale_mode = sda::ScaleMode::kTimesC;
  cca::NormMode norm_mode = cca::NormMode::kPerChannel;
  adapter::ResidualOrder residual = adapter::ResidualOrder::kBeforeProjection;
  bool bias = false;
  double weight_scale = 0.5;
  bool sda_identity = false;
  synth::FeatureKind kind = synth::FeatureKind::kNoise;
  std::size_t channels = 4;
  std::size_t height = 16;
  std::size_t width = 16;
  std::vector<std::filesystem::path> in;
  std::vector<std::filesystem::path> out;
  std::filesystem::path pgm;
  std::filesystem::path csv;
  std::string suite = "all";
  std::size_t probes = 50;

  // Validates and applies one key. Throws InvalidArgument on an unknown key
  // or a bad value.
  void set(std::string_view key, std::string_view value);
  void apply(const std::vector<std::pair<std::string, std::string>>& entries);

  // Alpha expanded to `channels` entries (default all ones).
  std::vector<double> alpha_for(std::size_t channels) const;
};

// Throws ParseError on a line without '='.
std::vector<std::pair<std::string, std::string>> parse_config_text(
    std::string_view text);
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path);

// "1=sda,3=cca" -> {1: sda, 3: cca}
std::map<std::size_t, adapter::StageKind> parse_stage_list(std::string_view text);

}  // namespace freqadapt::config
