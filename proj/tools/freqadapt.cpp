// freqadapt: command-line front end.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or shape error,
// 3 I/O or parse error, 4 degenerate input.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "freqadapt/adapter.hpp"
#include "freqadapt/cca.hpp"
#include "freqadapt/config.hpp"
#include "freqadapt/error.hpp"
#include "freqadapt/gradcheck.hpp"
#include "freqadapt/io.hpp"
#include "freqadapt/random.hpp"
#include "freqadapt/sda.hpp"
#include "freqadapt/spectral.hpp"
#include "freqadapt/synth.hpp"
#include "freqadapt/verify.hpp"

namespace fa = freqadapt;

namespace {

enum Exit : int {
  kOk = 0,
  kVerifyFailed = 1,
  kUsage = 2,
  kIo = 3,
  kDegenerate = 4,
};

// Flags that map one-to-one onto config keys. Values stay strings so the
// config layer does all validation in one place.
struct FlagSet {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::vector<std::string> in;
  std::vector<std::string> out;
  CLI::Option* in_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  std::string config_path;
};

void add_flag(CLI::App* cmd, FlagSet& fs, const std::string& key,
              const std::string& name, const std::string& help) {
  // Callbacks are attached in bind_flags, once `values` stops growing.
  fs.values.emplace_back(key, "");
  fs.options.emplace_back(key, cmd->add_option(name, help));
}

void bind_flags(FlagSet& fs) {
  for (std::size_t i = 0; i < fs.options.size(); ++i) {
    auto* opt = fs.options[i].second;
    std::string* slot = &fs.values[i].second;
    opt->each([slot](const std::string& v) { *slot = v; });
  }
}

void add_switch(CLI::App* cmd, FlagSet& fs, const std::string& key,
                const std::string& name, const std::string& help) {
  fs.values.emplace_back(key, "");
  fs.options.emplace_back(key, cmd->add_flag(name, help));
}

FlagSet& common_flags(CLI::App* cmd, FlagSet& fs) {
  cmd->add_option("--config", fs.config_path, "key = value config file");
  add_flag(cmd, fs, "seed", "--seed", "random seed (u64)");
  fs.in_opt = cmd->add_option("--in", fs.in, "input tensor file(s)");
  fs.out_opt = cmd->add_option("--out", fs.out, "output tensor file(s)");
  return fs;
}

// Config file first, then every flag that was given on the command line.
fa::config::RunConfig resolve(const FlagSet& fs) {
  fa::config::RunConfig cfg;
  if (!fs.config_path.empty()) {
    cfg.apply(fa::config::read_config_file(fs.config_path));
  }
  for (std::size_t i = 0; i < fs.options.size(); ++i) {
    const auto* opt = fs.options[i].second;
    if (opt->count() == 0) continue;
    const std::string& key = fs.values[i].first;
    const bool is_switch = opt->get_expected_min() == 0;
    cfg.set(key, is_switch ? "true" : fs.values[i].second);
  }
  if (fs.in_opt->count() > 0) cfg.in.assign(fs.in.begin(), fs.in.end());
  if (fs.out_opt->count() > 0) cfg.out.assign(fs.out.begin(), fs.out.end());
  return cfg;
}

const std::filesystem::path& single(const std::vector<std::filesystem::path>& paths,
                                    const char* flag) {
  if (paths.size() != 1) {
    throw fa::InvalidArgument(std::string("expected exactly one ") + flag +
                              " path, got " + std::to_string(paths.size()));
  }
  return paths.front();
}

std::string summary(const fa::FeatureMap& y) {
  const auto [lo, hi] = std::minmax_element(y.data().begin(), y.data().end());
  char buf[160];
  std::snprintf(buf, sizeof buf, "shape %zux%zux%zu min %.6g max %.6g",
                y.channels(), y.height(), y.width(), *lo, *hi);
  return buf;
}

std::string shift_text(const fa::FeatureMap& before, const fa::FeatureMap& after,
                       double cut) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " hf_shift %+.6g",
                fa::cca::hf_shift(before, after, cut));
  return buf;
}

fa::TokenMatrix text_tokens(const fa::config::RunConfig& cfg, std::uint64_t seed) {
  if (!cfg.text_path.empty()) return fa::io::read_matrix(cfg.text_path);
  return fa::adapter::random_text_tokens(cfg.text_tokens, cfg.text_dim, seed);
}

int cmd_gen(const fa::config::RunConfig& cfg) {
  const auto x = fa::synth::gen_features(cfg.kind, cfg.channels, cfg.height,
                                         cfg.width, cfg.seed);
  fa::io::write_feature_map(single(cfg.out, "--out"), x);
  std::cout << "gen " << fa::synth::kind_name(cfg.kind) << ": " << summary(x)
            << "\n";
  return kOk;
}

int apply_single(const std::string& transform, const fa::config::RunConfig& cfg) {
  const fa::FeatureMap x = fa::io::read_feature_map(single(cfg.in, "--in"));
  const auto& out_path = single(cfg.out, "--out");
  fa::FeatureMap y;
  bool with_shift = true;
  if (transform == "sda") {
    y = cfg.sda_identity
            ? fa::sda::sda_apply(x, fa::sda::AffineStyle::identity(x.channels()))
            : fa::sda::sda_forward(x, cfg.alpha_for(x.channels()), cfg.seed,
                                   cfg.scale_mode);
  } else if (transform == "cca") {
    const fa::TokenMatrix text = text_tokens(cfg, fa::mix_seed(cfg.seed, 2));
    const auto params = fa::cca::AttentionParams::random(
        x.channels(), text.cols(), cfg.key_dim, fa::mix_seed(cfg.seed, 1),
        cfg.bias);
    y = fa::cca::cca_forward(x, text, params, cfg.norm_mode);
  } else {
    const auto w = fa::adapter::AdapterWeights::random(
        x.channels(), fa::mix_seed(cfg.seed, 1), cfg.weight_scale);
    const fa::adapter::Augment pass = [](const fa::FeatureMap& m) { return m; };
    y = fa::adapter::plain_forward(x, w, pass, cfg.residual);
    with_shift = false;
  }
  fa::io::write_feature_map(out_path, y);
  std::cout << "apply " << transform << ": " << summary(y)
            << (with_shift ? shift_text(x, y, cfg.cut) : "") << "\n";
  return kOk;
}

int apply_stack(const fa::config::RunConfig& cfg) {
  if (cfg.in.empty() || cfg.in.size() != cfg.out.size()) {
    throw fa::InvalidArgument("apply stack needs one --out per --in (" +
                              std::to_string(cfg.in.size()) + " in, " +
                              std::to_string(cfg.out.size()) + " out)");
  }
  std::vector<fa::FeatureMap> features;
  for (const auto& p : cfg.in) features.push_back(fa::io::read_feature_map(p));

  auto placement = fa::adapter::PlacementConfig::default_placement();
  if (cfg.stages_given) placement.stage_assignments = cfg.stages;
  placement.stage_count = features.size();
  placement.sda_alpha = cfg.alpha;
  placement.sda_scale = cfg.scale_mode;
  if (!cfg.text_path.empty()) placement.text_tokens = fa::io::read_matrix(cfg.text_path);
  placement.text_token_count = cfg.text_tokens;
  placement.text_dim = placement.text_tokens ? placement.text_tokens->cols()
                                             : cfg.text_dim;
  placement.key_dim = cfg.key_dim;
  placement.attention_bias = cfg.bias;
  placement.norm_mode = cfg.norm_mode;
  placement.adapter_weight_scale = cfg.weight_scale;
  placement.residual = cfg.residual;
  placement.seed = cfg.seed;
  if (placement.sda_alpha.size() == 1) {
    // One value broadcasts to the channel count of the SDA stage.
    for (const auto& [stage, kind] : placement.stage_assignments) {
      if (kind == fa::adapter::StageKind::kSda && stage >= 1 &&
          stage <= features.size()) {
        placement.sda_alpha = cfg.alpha_for(features[stage - 1].channels());
      }
    }
  }

  const auto result = fa::adapter::run_stack(features, placement);
  for (std::size_t i = 0; i < result.size(); ++i) {
    fa::io::write_feature_map(cfg.out[i], result[i]);
    const auto it = placement.stage_assignments.find(i + 1);
    const auto kind = it == placement.stage_assignments.end()
                          ? fa::adapter::StageKind::kNone
                          : it->second;
    std::cout << "apply stack " << (i + 1) << " ("
              << fa::adapter::stage_kind_name(kind) << "): " << summary(result[i])
              << (kind == fa::adapter::StageKind::kNone
                      ? ""
                      : shift_text(features[i], result[i], cfg.cut))
              << "\n";
  }
  return kOk;
}

int cmd_heatmap(const fa::config::RunConfig& cfg) {
  if (cfg.pgm.empty() && cfg.csv.empty()) {
    throw fa::InvalidArgument("heatmap needs --pgm and/or --csv");
  }
  const fa::FeatureMap x = fa::io::read_feature_map(single(cfg.in, "--in"));
  const fa::AmpPhase ap = fa::decompose(fa::fft2(x));
  const fa::Matrix h = fa::heatmap(ap);
  if (!cfg.pgm.empty()) fa::io::write_pgm(cfg.pgm, h);
  if (!cfg.csv.empty()) fa::io::write_text(cfg.csv, fa::io::encode_csv(h));
  std::printf("heatmap %zux%zu: high-band fraction %.6g at cut %g\n", h.rows(),
              h.cols(), fa::band_energy(ap, cfg.cut).high_fraction(), cfg.cut);
  return kOk;
}

int cmd_verify(const fa::config::RunConfig& cfg) {
  const auto results = fa::verify::run_suite(cfg.suite, cfg.seed, cfg.probes);
  std::size_t passed = 0;
  for (const auto& r : results) {
    std::cout << fa::verify::format_result(r) << "\n";
    if (r.passed) ++passed;
  }
  std::cout << "verify " << cfg.suite << ": " << passed << "/" << results.size()
            << " checks passed\n";
  return passed == results.size() ? kOk : kVerifyFailed;
}

int cmd_gradcheck(const fa::config::RunConfig& cfg) {
  std::vector<fa::grad::Target> targets;
  if (cfg.suite == "all") {
    targets = fa::grad::all_targets();
  } else {
    std::string_view rest = cfg.suite;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto name = rest.substr(0, comma);
      const auto t = fa::grad::parse_target(name);
      if (!t) {
        throw fa::InvalidArgument("unknown gradcheck target '" +
                                  std::string(name) + "'");
      }
      targets.push_back(*t);
      rest = comma == std::string_view::npos ? "" : rest.substr(comma + 1);
    }
  }
  const auto reports = fa::grad::run_gradcheck(targets, cfg.seed, cfg.probes);

  bool ok = true;
  std::printf("%-16s %12s %8s %8s %12s\n", "op", "max_rel_err", "probes",
              "step", "convergence");
  std::string csv = "op,max_rel_err,num_probes,step,convergence_fraction\n";
  for (const auto& r : reports) {
    std::printf("%-16s %12.3e %8zu %8.0e %12.2f\n", r.op_name.c_str(),
                r.max_rel_err, r.num_probes, r.step, r.convergence_fraction);
    char line[160];
    std::snprintf(line, sizeof line, "%s,%.17g,%zu,%.17g,%.17g\n",
                  r.op_name.c_str(), r.max_rel_err, r.num_probes, r.step,
                  r.convergence_fraction);
    csv += line;
    ok = ok && r.max_rel_err < 1e-5 && r.convergence_fraction >= 0.9;
  }
  if (!cfg.csv.empty()) fa::io::write_text(cfg.csv, csv);
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain adapter transforms and their verification"};
  app.require_subcommand(1);

  FlagSet gen_fs, apply_fs, heat_fs, verify_fs, grad_fs;

  auto* gen = app.add_subcommand("gen", "Write a synthetic feature map");
  common_flags(gen, gen_fs);
  add_flag(gen, gen_fs, "kind", "--kind", "noise | smooth | checker");
  add_flag(gen, gen_fs, "channels", "--channels", "C");
  add_flag(gen, gen_fs, "height", "--height", "H");
  add_flag(gen, gen_fs, "width", "--width", "W");

  std::string transform;
  auto* apply = app.add_subcommand("apply", "Apply a transform to tensor files");
  apply->add_option("transform", transform, "sda | cca | plain | stack")
      ->required()
      ->check(CLI::IsMember({"sda", "cca", "plain", "stack"}));
  common_flags(apply, apply_fs);
  add_flag(apply, apply_fs, "alpha", "--alpha", "Dirichlet concentration list");
  add_flag(apply, apply_fs, "dk", "--dk", "attention key dimension");
  add_flag(apply, apply_fs, "cut", "--cut", "radial cut for hf_shift");
  add_flag(apply, apply_fs, "stage", "--stage", "placement, e.g. 1=sda,3=cca");
  add_flag(apply, apply_fs, "text_tokens", "--text-tokens", "synthetic text token count");
  add_flag(apply, apply_fs, "text_dim", "--text-dim", "synthetic text dimension");
  add_flag(apply, apply_fs, "text", "--text", "text token tensor file (M x d_t)");
  add_flag(apply, apply_fs, "scale_mode", "--scale-mode", "raw | times_c");
  add_flag(apply, apply_fs, "norm_mode", "--norm-mode", "channel | tensor");
  add_flag(apply, apply_fs, "residual", "--residual", "before | after");
  add_flag(apply, apply_fs, "weight_scale", "--weight-scale", "adapter weight scale");
  add_switch(apply, apply_fs, "bias", "--bias", "output projection bias");
  add_switch(apply, apply_fs, "sda_identity", "--sda-identity",
             "force the identity style (test hook)");

  auto* heat = app.add_subcommand("heatmap", "Centered log-amplitude heatmap");
  common_flags(heat, heat_fs);
  add_flag(heat, heat_fs, "pgm", "--pgm", "binary PGM output");
  add_flag(heat, heat_fs, "csv", "--csv", "CSV output");
  add_flag(heat, heat_fs, "cut", "--cut", "radial cut for the summary");

  auto* ver = app.add_subcommand("verify", "Run the self-check suites");
  common_flags(ver, verify_fs);
  add_flag(ver, verify_fs, "suite", "--suite", "spectral | sda | cca | grad | adapter | all");
  add_flag(ver, verify_fs, "probes", "--probes", "gradient probes per target");
  std::string verify_suite;
  ver->add_option("name", verify_suite, "suite (same as --suite)");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient report");
  common_flags(grad, grad_fs);
  add_flag(grad, grad_fs, "suite", "--suite", "all or a comma list of targets");
  add_flag(grad, grad_fs, "probes", "--probes", "probes per target");
  add_flag(grad, grad_fs, "csv", "--csv", "CSV report path");

  for (FlagSet* fs : {&gen_fs, &apply_fs, &heat_fs, &verify_fs, &grad_fs}) {
    bind_flags(*fs);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(resolve(gen_fs));
    if (apply->parsed()) {
      const auto cfg = resolve(apply_fs);
      return transform == "stack" ? apply_stack(cfg) : apply_single(transform, cfg);
    }
    if (heat->parsed()) return cmd_heatmap(resolve(heat_fs));
    if (ver->parsed()) {
      auto cfg = resolve(verify_fs);
      if (!verify_suite.empty()) cfg.set("suite", verify_suite);
      return cmd_verify(cfg);
    }
    if (grad->parsed()) return cmd_gradcheck(resolve(grad_fs));
  } catch (const fa::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fa::DegenerateSpectrum& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerate;
  } catch (const fa::SymmetryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerate;
  } catch (const fa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
