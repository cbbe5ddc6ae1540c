#include "freqadapt/config.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "freqadapt/error.hpp"
#include "freqadapt/io.hpp"

namespace freqadapt::config {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad(std::string_view key, std::string_view value,
                      std::string_view why) {
  throw InvalidArgument("config: " + std::string(key) + " = '" +
                        std::string(value) + "': " + std::string(why));
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    bad(key, value, "expected an unsigned integer");
  }
  return out;
}

std::size_t to_count(std::string_view key, std::string_view value) {
  const auto v = to_u64(key, value);
  if (v == 0) bad(key, value, "must be >= 1");
  return static_cast<std::size_t>(v);
}

double to_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty() ||
      !std::isfinite(out)) {
    bad(key, value, "expected a finite real number");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad(key, value, "expected true or false");
}

std::vector<std::filesystem::path> to_paths(std::string_view value) {
  std::vector<std::filesystem::path> out;
  for (auto part : split(value, ',')) {
    if (!part.empty()) out.emplace_back(std::string(part));
  }
  return out;
}

}  // namespace

std::map<std::size_t, adapter::StageKind> parse_stage_list(std::string_view text) {
  std::map<std::size_t, adapter::StageKind> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) bad("stage", item, "expected i=kind");
    const std::size_t index = to_count("stage", trim(item.substr(0, eq)));
    const auto kind = adapter::parse_stage_kind(trim(item.substr(eq + 1)));
    if (!kind) bad("stage", item, "kind must be none, plain, sda or cca");
    out[index] = *kind;
  }
  return out;
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "seed") {
    seed = to_u64(key, value);
  } else if (key == "alpha") {
    alpha.clear();
    for (auto part : split(value, ',')) {
      const double a = to_real(key, part);
      if (!(a > 0.0)) bad(key, value, "every concentration must be > 0");
      alpha.push_back(a);
    }
  } else if (key == "dk") {
    key_dim = to_count(key, value);
  } else if (key == "cut") {
    cut = to_real(key, value);
    if (!(cut > 0.0 && cut < 1.0)) bad(key, value, "must lie in (0, 1)");
  } else if (key == "stage") {
    stages = parse_stage_list(value);
    stages_given = true;
  } else if (key == "text_tokens") {
    text_tokens = to_count(key, value);
  } else if (key == "text_dim") {
    text_dim = to_count(key, value);
  } else if (key == "text") {
    text_path = std::string(value);
  } else if (key == "scale_mode") {
    if (value == "raw") {
      scale_mode = sda::ScaleMode::kRaw;
    } else if (value == "times_c") {
      scale_mode = sda::ScaleMode::kTimesC;
    } else {
      bad(key, value, "expected raw or times_c");
    }
  } else if (key == "norm_mode") {
    if (value == "channel") {
      norm_mode = cca::NormMode::kPerChannel;
    } else if (value == "tensor") {
      norm_mode = cca::NormMode::kWholeTensor;
    } else {
      bad(key, value, "expected channel or tensor");
    }
  } else if (key == "residual") {
    if (value == "before") {
      residual = adapter::ResidualOrder::kBeforeProjection;
    } else if (value == "after") {
      residual = adapter::ResidualOrder::kAfterProjection;
    } else {
      bad(key, value, "expected before or after");
    }
  } else if (key == "bias") {
    bias = to_bool(key, value);
  } else if (key == "weight_scale") {
    weight_scale = to_real(key, value);
    if (!(weight_scale > 0.0)) bad(key, value, "must be > 0");
  } else if (key == "sda_identity") {
    sda_identity = to_bool(key, value);
  } else if (key == "kind") {
    const auto k = synth::parse_kind(value);
    if (!k) bad(key, value, "expected noise, smooth or checker");
    kind = *k;
  } else if (key == "channels") {
    channels = to_count(key, value);
  } else if (key == "height") {
    height = to_count(key, value);
  } else if (key == "width") {
    width = to_count(key, value);
  } else if (key == "in") {
    in = to_paths(value);
  } else if (key == "out") {
    out = to_paths(value);
  } else if (key == "pgm") {
    pgm = std::string(value);
  } else if (key == "csv") {
    csv = std::string(value);
  } else if (key == "suite") {
    if (value.empty()) bad(key, value, "must not be empty");
    suite = std::string(value);
  } else if (key == "probes") {
    probes = to_count(key, value);
  } else {
    throw InvalidArgument("config: unknown key '" + std::string(key) + "'");
  }
}

void RunConfig::apply(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [key, value] : entries) set(key, value);
}

std::vector<double> RunConfig::alpha_for(std::size_t count) const {
  if (alpha.empty()) return std::vector<double>(count, 1.0);
  if (alpha.size() == 1) return std::vector<double>(count, alpha.front());
  if (alpha.size() != count) {
    throw ShapeError("alpha has " + std::to_string(alpha.size()) +
                     " values for " + std::to_string(count) + " channels");
  }
  return alpha;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ParseError("config line " + std::to_string(line_no) + ": empty key");
    }
    entries.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return entries;
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  return parse_config_text(std::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace freqadapt::config
