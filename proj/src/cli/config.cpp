#include "sdsr/cli/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdsr/core/errors.hpp"

extern char** environ;

namespace sdsr {

using nlohmann::json;

namespace {

std::string phases_to_string(const std::vector<Phase>& phases) {
  std::string out;
  for (Phase p : phases) {
    if (!out.empty()) out += ",";
    out += p == Phase::kSynthetic ? "synthetic" : "real";
  }
  return out;
}

std::vector<Phase> phases_from_string(const std::string& s, const std::string& path) {
  std::vector<Phase> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "synthetic") {
      out.push_back(Phase::kSynthetic);
    } else if (tok == "real") {
      out.push_back(Phase::kReal);
    } else {
      throw ConfigError("config error at " + path + ": unknown phase '" + tok +
                        "' (expected synthetic|real)");
    }
  }
  if (out.empty())
    throw ConfigError("config error at " + path + ": alternation pattern is empty");
  return out;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["ablation"] = c.ablation;
  j["data"] = {{"mode", c.data.mode},
               {"root", c.data.root},
               {"n_textures", c.data.n_textures},
               {"texture_size", c.data.texture_size},
               {"channels", c.data.channels},
               {"split", {c.data.split.train, c.data.split.val, c.data.split.test}},
               {"patch_hr", c.data.patch_hr},
               {"scale", c.data.scale}};
  j["oracle"] = {{"sigma_range", {c.oracle.sigma_lo, c.oracle.sigma_hi}}};
  j["ensemble"] = {{"families", c.ensemble.families},
                   {"width", c.ensemble.width},
                   {"input_dependent_sigma", c.ensemble.input_dependent_sigma},
                   {"content_skip", c.ensemble.content_skip},
                   {"freeze_sigma", c.ensemble.freeze_sigma}};
  j["degrader"] = {{"adv_weight", c.degrader.adv_weight},
                   {"cycle_weight", c.degrader.cycle_weight},
                   {"lowpass_weight", c.degrader.lowpass_weight},
                   {"blur_std", c.degrader.blur_std},
                   {"steps", c.degrader.steps},
                   {"lr", c.degrader.lr},
                   {"beta1", c.degrader.beta1},
                   {"beta2", c.degrader.beta2},
                   {"batch", c.degrader.batch},
                   {"divergence_threshold", c.degrader.divergence_threshold},
                   {"snapshot_every", c.degrader.snapshot_every}};
  j["collab"] = {{"lambda_sup", c.collab.lambda_sup},
                 {"lambda_col", c.collab.lambda_col},
                 {"lambda_ada", c.collab.lambda_ada},
                 {"ramp_max", c.collab.ramp_max},
                 {"steps", c.collab.steps},
                 {"k", c.collab.k},
                 {"alternation", phases_to_string(c.collab.alternation)},
                 {"batch", c.collab.batch},
                 {"lr", c.collab.lr},
                 {"eval_every", c.collab.eval_every},
                 {"pseudo_refresh", c.collab.pseudo_refresh}};
  j["sr_model"] = {{"blocks", c.sr_model.blocks}, {"width", c.sr_model.width}};
  j["metrics"] = {{"border_crop", c.metrics.border_crop},
                  {"fidelity_samples", c.metrics.fidelity_samples},
                  {"robust_grid", c.metrics.robust_grid}};
  j["io"] = {{"prepare_dir", c.io.prepare_dir},
             {"degraders_dir", c.io.degraders_dir},
             {"sr_dir", c.io.sr_dir}};
  return j;
}

template <typename T>
T get_as(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config error at " + path + ": wrong value type");
  }
}

void apply_section(ExperimentConfig& c, const std::string& section, const json& obj);

void apply_json(ExperimentConfig& c, const json& j, const std::string& prefix) {
  if (!j.is_object()) throw ConfigError("config error at " + prefix + ": expected an object");
  for (const auto& [key, val] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (key == "preset") {
      c.preset = get_as<std::string>(val, path);
    } else if (key == "seed") {
      c.seed = get_as<uint64_t>(val, path);
    } else if (key == "out_dir") {
      c.out_dir = get_as<std::string>(val, path);
    } else if (key == "ablation") {
      c.ablation = get_as<std::string>(val, path);
    } else if (key == "data" || key == "oracle" || key == "ensemble" || key == "degrader" ||
               key == "collab" || key == "sr_model" || key == "metrics" || key == "io") {
      if (!val.is_object())
        throw ConfigError("config error at " + path + ": expected an object");
      apply_section(c, key, val);
    } else {
      throw ConfigError("config error at " + path + ": unknown key");
    }
  }
}

void apply_section(ExperimentConfig& c, const std::string& section, const json& obj) {
  for (const auto& [key, val] : obj.items()) {
    const std::string path = section + "." + key;
    bool known = true;
    if (section == "data") {
      if (key == "mode") c.data.mode = get_as<std::string>(val, path);
      else if (key == "root") c.data.root = get_as<std::string>(val, path);
      else if (key == "n_textures") c.data.n_textures = get_as<int>(val, path);
      else if (key == "texture_size") c.data.texture_size = get_as<int>(val, path);
      else if (key == "channels") c.data.channels = get_as<int>(val, path);
      else if (key == "split") {
        const auto v = get_as<std::vector<double>>(val, path);
        if (v.size() != 3)
          throw ConfigError("config error at " + path + ": need 3 ratios");
        c.data.split = {v[0], v[1], v[2]};
      } else if (key == "patch_hr") c.data.patch_hr = get_as<int>(val, path);
      else if (key == "scale") c.data.scale = get_as<int>(val, path);
      else known = false;
    } else if (section == "oracle") {
      if (key == "sigma_range") {
        const auto v = get_as<std::vector<double>>(val, path);
        if (v.size() != 2)
          throw ConfigError("config error at " + path + ": need [lo, hi]");
        c.oracle.sigma_lo = v[0];
        c.oracle.sigma_hi = v[1];
      } else known = false;
    } else if (section == "ensemble") {
      if (key == "families") c.ensemble.families = get_as<std::vector<std::string>>(val, path);
      else if (key == "width") c.ensemble.width = get_as<int>(val, path);
      else if (key == "input_dependent_sigma")
        c.ensemble.input_dependent_sigma = get_as<bool>(val, path);
      else if (key == "content_skip") c.ensemble.content_skip = get_as<bool>(val, path);
      else if (key == "freeze_sigma") c.ensemble.freeze_sigma = get_as<bool>(val, path);
      else known = false;
    } else if (section == "degrader") {
      if (key == "adv_weight") c.degrader.adv_weight = get_as<double>(val, path);
      else if (key == "cycle_weight") c.degrader.cycle_weight = get_as<double>(val, path);
      else if (key == "lowpass_weight") c.degrader.lowpass_weight = get_as<double>(val, path);
      else if (key == "blur_std") c.degrader.blur_std = get_as<double>(val, path);
      else if (key == "steps") c.degrader.steps = get_as<int64_t>(val, path);
      else if (key == "lr") c.degrader.lr = get_as<double>(val, path);
      else if (key == "beta1") c.degrader.beta1 = get_as<double>(val, path);
      else if (key == "beta2") c.degrader.beta2 = get_as<double>(val, path);
      else if (key == "batch") c.degrader.batch = get_as<int>(val, path);
      else if (key == "divergence_threshold")
        c.degrader.divergence_threshold = get_as<double>(val, path);
      else if (key == "snapshot_every") c.degrader.snapshot_every = get_as<int64_t>(val, path);
      else known = false;
    } else if (section == "collab") {
      if (key == "lambda_sup") c.collab.lambda_sup = get_as<double>(val, path);
      else if (key == "lambda_col") c.collab.lambda_col = get_as<double>(val, path);
      else if (key == "lambda_ada") c.collab.lambda_ada = get_as<double>(val, path);
      else if (key == "ramp_max") c.collab.ramp_max = get_as<int64_t>(val, path);
      else if (key == "steps") c.collab.steps = get_as<int64_t>(val, path);
      else if (key == "k") c.collab.k = get_as<int>(val, path);
      else if (key == "alternation")
        c.collab.alternation = phases_from_string(get_as<std::string>(val, path), path);
      else if (key == "batch") c.collab.batch = get_as<int>(val, path);
      else if (key == "lr") c.collab.lr = get_as<double>(val, path);
      else if (key == "eval_every") c.collab.eval_every = get_as<int64_t>(val, path);
      else if (key == "pseudo_refresh") c.collab.pseudo_refresh = get_as<int64_t>(val, path);
      else known = false;
    } else if (section == "sr_model") {
      if (key == "blocks") c.sr_model.blocks = get_as<int>(val, path);
      else if (key == "width") c.sr_model.width = get_as<int>(val, path);
      else known = false;
    } else if (section == "metrics") {
      if (key == "border_crop") c.metrics.border_crop = get_as<int>(val, path);
      else if (key == "fidelity_samples") c.metrics.fidelity_samples = get_as<int>(val, path);
      else if (key == "robust_grid") c.metrics.robust_grid = get_as<std::vector<double>>(val, path);
      else known = false;
    } else if (section == "io") {
      if (key == "prepare_dir") c.io.prepare_dir = get_as<std::string>(val, path);
      else if (key == "degraders_dir") c.io.degraders_dir = get_as<std::string>(val, path);
      else if (key == "sr_dir") c.io.sr_dir = get_as<std::string>(val, path);
      else known = false;
    }
    if (!known) throw ConfigError("config error at " + path + ": unknown key");
  }
}

json env_overrides() {
  json patch = json::object();
  const std::string prefix = kEnvPrefix;
  for (char** env = environ; *env; ++env) {
    const std::string entry = *env;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string keypath = entry.substr(prefix.size(), eq - prefix.size());
    const std::string value = entry.substr(eq + 1);

    // SECTION__KEY, lowercased
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
      const auto sep = keypath.find("__", pos);
      parts.push_back(keypath.substr(pos, sep - pos));
      if (sep == std::string::npos) break;
      pos = sep + 2;
    }
    for (auto& p : parts)
      for (auto& ch : p) ch = char(std::tolower(uint8_t(ch)));

    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // plain string
    }
    json* node = &patch;
    for (size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    (*node)[parts.back()] = parsed;
  }
  return patch;
}

}  // namespace

std::string ExperimentConfig::to_json_text() const { return config_to_json(*this).dump(2); }

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& path, const std::string& why) {
    throw ConfigError("config error at " + path + ": " + why);
  };
  if (data.mode != "oracle" && data.mode != "folder") fail("data.mode", "must be oracle|folder");
  if (data.mode == "folder" && data.root.empty()) fail("data.root", "required in folder mode");
  if (data.n_textures < 1) fail("data.n_textures", "must be >= 1");
  if (data.channels != 1 && data.channels != 3) fail("data.channels", "must be 1 or 3");
  if (data.scale != 2 && data.scale != 4) fail("data.scale", "must be 2 or 4");
  if (data.patch_hr % data.scale != 0) fail("data.patch_hr", "must be divisible by scale");
  if (data.texture_size % data.scale != 0) fail("data.texture_size", "must be divisible by scale");
  if (data.texture_size < data.patch_hr) fail("data.texture_size", "smaller than patch_hr");
  const double rsum = data.split.train + data.split.val + data.split.test;
  if (std::abs(rsum - 1.0) > 1e-9) fail("data.split", "ratios must sum to 1");
  if (oracle.sigma_lo < 0 || oracle.sigma_hi < oracle.sigma_lo)
    fail("oracle.sigma_range", "need 0 <= lo <= hi");
  if (ensemble.families.empty()) fail("ensemble.families", "need at least one family");
  for (const auto& f : ensemble.families) {
    bool ok = false;
    for (const auto& known : DegradationGenerator::families()) ok |= (f == known);
    if (!ok) fail("ensemble.families", "unknown family '" + f + "'");
  }
  if (ensemble.width < 4) fail("ensemble.width", "must be >= 4");
  if (degrader.adv_weight < 0 || degrader.cycle_weight < 0 || degrader.lowpass_weight < 0)
    fail("degrader", "loss weights must be >= 0");
  if (degrader.steps < 0) fail("degrader.steps", "must be >= 0");
  if (degrader.batch < 1) fail("degrader.batch", "must be >= 1");
  if (degrader.lr <= 0) fail("degrader.lr", "must be > 0");
  if (collab.lambda_sup < 0 || collab.lambda_col < 0 || collab.lambda_ada < 0)
    fail("collab", "lambdas must be >= 0");
  if (collab.ramp_max < 1) fail("collab.ramp_max", "must be >= 1");
  if (collab.steps < 0) fail("collab.steps", "must be >= 0");
  if (collab.k < 1) fail("collab.k", "must be >= 1");
  if (collab.batch < 1) fail("collab.batch", "must be >= 1");
  if (collab.lr <= 0) fail("collab.lr", "must be > 0");
  if (sr_model.blocks < 1) fail("sr_model.blocks", "must be >= 1");
  if (sr_model.width < 4) fail("sr_model.width", "must be >= 4");
  if (metrics.border_crop < 0) fail("metrics.border_crop", "must be >= 0");
  if (metrics.fidelity_samples < 100) fail("metrics.fidelity_samples", "must be >= 100");
  for (size_t i = 0; i < metrics.robust_grid.size(); ++i) {
    if (metrics.robust_grid[i] < 0) fail("metrics.robust_grid", "sigmas must be >= 0");
    if (i > 0 && metrics.robust_grid[i] <= metrics.robust_grid[i - 1])
      fail("metrics.robust_grid", "must be strictly increasing");
  }
  if (ablation != "cl" && ablation != "cl_no_ada" && ablation != "naive" &&
      ablation != "single" && ablation != "bicubic")
    fail("ablation", "must be cl|cl_no_ada|naive|single|bicubic");
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= uint64_t(uint8_t(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

uint64_t ExperimentConfig::data_hash() const {
  const json j = config_to_json(*this);
  json sub;
  sub["seed"] = seed;
  sub["data"] = j["data"];
  sub["oracle"] = j["oracle"];
  return fnv1a64(sub.dump());
}

uint64_t ExperimentConfig::degrader_hash() const {
  const json j = config_to_json(*this);
  json sub;
  sub["base"] = hash_hex(data_hash());
  sub["ensemble"] = j["ensemble"];
  sub["degrader"] = j["degrader"];
  return fnv1a64(sub.dump());
}

uint64_t ExperimentConfig::sr_hash() const {
  const json j = config_to_json(*this);
  json sub;
  sub["base"] = hash_hex(degrader_hash());
  sub["collab"] = j["collab"];
  sub["sr_model"] = j["sr_model"];
  sub["ablation"] = ablation;
  return fnv1a64(sub.dump());
}

ExperimentConfig make_preset(const std::string& name) {
  ExperimentConfig c;  // struct defaults are the desk profile
  c.preset = name;
  if (name == "desk") {
    return c;
  }
  if (name == "paper") {
    // §-verbatim second-stage hyperparameters at the published scale
    c.collab.lambda_sup = 1.0;
    c.collab.lambda_col = 0.01;
    c.collab.lambda_ada = 10.0;
    c.collab.ramp_max = 1000000;
    c.collab.steps = 1000000;
    c.collab.batch = 16;
    c.collab.lr = 1e-5;
    c.data.scale = 4;
    c.data.patch_hr = 64;
    c.degrader.batch = 16;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected desk|paper)");
}

ExperimentConfig load_experiment_config(const std::optional<std::string>& config_path,
                                        const std::optional<std::string>& preset_override,
                                        const std::optional<uint64_t>& seed_override,
                                        const std::optional<std::string>& out_override) {
  json file_json = json::object();
  if (config_path) {
    std::ifstream is(*config_path);
    if (!is) throw MissingInputError("cannot open config file: " + *config_path);
    try {
      is >> file_json;
    } catch (const json::exception& e) {
      throw ConfigError("config error at <root>: invalid JSON (" + std::string(e.what()) + ")");
    }
  }

  std::string preset = "desk";
  if (file_json.contains("preset")) preset = get_as<std::string>(file_json["preset"], "preset");
  if (preset_override) preset = *preset_override;

  ExperimentConfig cfg = make_preset(preset);
  apply_json(cfg, file_json, "");
  cfg.preset = preset;
  apply_json(cfg, env_overrides(), "");
  if (seed_override) cfg.seed = *seed_override;
  if (out_override) cfg.out_dir = *out_override;
  cfg.validate();

  // stage seeds derive from the master seed
  cfg.degrader.seed = derive_seed(cfg.seed, "stage_degrader");
  cfg.collab.seed = derive_seed(cfg.seed, "stage_collab");
  return cfg;
}

OracleDegradation oracle_from_config(const ExperimentConfig& cfg) {
  OracleDegradation o;
  o.scale = cfg.data.scale;
  o.sigma_lo = cfg.oracle.sigma_lo;
  o.sigma_hi = cfg.oracle.sigma_hi;
  o.seed = derive_seed(cfg.seed, "oracle_stream");
  return o;
}

std::vector<GeneratorDesc> generator_descs(const ExperimentConfig& cfg) {
  std::vector<GeneratorDesc> descs;
  for (size_t i = 0; i < cfg.ensemble.families.size(); ++i) {
    GeneratorDesc d;
    d.family = cfg.ensemble.families[i];
    d.arch_id = d.family + "-g" + std::to_string(i);
    d.scale = cfg.data.scale;
    d.width = cfg.ensemble.width;
    d.sigma_mode = cfg.ensemble.input_dependent_sigma ? nn::SigmaMode::kInputDependent
                                                      : nn::SigmaMode::kSharedSpatial;
    d.content_skip = cfg.ensemble.content_skip;
    d.init_seed = derive_seed(cfg.seed, "gen_desc", uint64_t(i));
    descs.push_back(d);
  }
  return descs;
}

}  // namespace sdsr
