#include "sdsr/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sdsr/cli/manifest.hpp"
#include "sdsr/core/errors.hpp"
#include "sdsr/core/image_io.hpp"
#include "sdsr/data/textures.hpp"
#include "sdsr/metrics/fidelity.hpp"
#include "sdsr/metrics/plot.hpp"
#include "sdsr/metrics/report.hpp"
#include "sdsr/metrics/robustness.hpp"
#include "sdsr/nn/checkpoint.hpp"

namespace fs = std::filesystem;

namespace sdsr {

using nlohmann::json;

namespace {

std::string stem_name(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%04zu", i);
  return buf;
}

std::string run_dir_name(const std::string& stage, uint64_t hash, uint64_t seed,
                         const std::string& suffix = "") {
  std::string name = stage + "-" + hash_hex(hash).substr(8) + "-s" + std::to_string(seed);
  if (!suffix.empty()) name += "-" + suffix;
  return name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(ExitCode::kFailure, "cannot write " + path.string());
  os << text;
  if (text.empty() || text.back() != '\n') os << "\n";
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void require_stage_dir(const std::string& dir, const std::string& expected_hash,
                       const std::string& what) {
  if (!fs::is_directory(dir))
    throw MissingInputError(what + " directory not found: " + dir +
                            " (run the upstream stage first)");
  const RunManifest m = read_manifest(dir);
  if (m.config_hash != expected_hash)
    throw StaleArtifactError(what + " at " + dir + " was built under config hash " +
                             m.config_hash + ", current config expects " + expected_hash);
}

UnpairedCorpus load_prepared_corpus(const ExperimentConfig& cfg) {
  const std::string dir = resolve_prepare_dir(cfg);
  require_stage_dir(dir, hash_hex(cfg.data_hash()), "prepared corpus");
  return load_corpus(dir, cfg.data.split, cfg.seed, cfg.data.patch_hr, cfg.data.scale);
}

GeneratorEnsemble load_trained_ensemble(const ExperimentConfig& cfg, int members_used) {
  const std::string dir = resolve_degraders_dir(cfg);
  require_stage_dir(dir, hash_hex(cfg.degrader_hash()), "degrader checkpoints");
  auto descs = generator_descs(cfg);
  if (members_used >= 0 && size_t(members_used) < descs.size()) descs.resize(size_t(members_used));
  GeneratorEnsemble ens = build_ensemble(descs);
  if (cfg.ensemble.freeze_sigma)
    for (auto& m : ens.members) m->freeze_deterministic();
  for (auto& m : ens.members) {
    const fs::path ckpt = fs::path(dir) / "checkpoints" / ("gen-" + m->arch_id() + ".ckpt");
    if (!fs::exists(ckpt)) throw MissingInputError("missing generator checkpoint: " + ckpt.string());
    auto params = m->params();
    nn::load_checkpoint(ckpt.string(), params);
  }
  return ens;
}

std::vector<SRModelDesc> sr_descs(const ExperimentConfig& cfg, int k) {
  std::vector<SRModelDesc> descs;
  for (int i = 0; i < k; ++i) {
    SRModelDesc d;
    d.model_id = "sr-m" + std::to_string(i);
    d.blocks = cfg.sr_model.blocks;
    d.width = cfg.sr_model.width;
    d.scale = cfg.data.scale;
    d.init_seed = derive_seed(cfg.seed, "sr_desc", uint64_t(i));
    descs.push_back(d);
  }
  return descs;
}

std::vector<std::unique_ptr<SRModel>> load_trained_models(const ExperimentConfig& cfg) {
  const std::string dir = resolve_sr_dir(cfg);
  const ArmSetup arm = apply_ablation_arm(cfg);
  require_stage_dir(dir, hash_hex(cfg.sr_hash()), "SR checkpoints");
  std::vector<std::unique_ptr<SRModel>> models;
  for (const auto& d : sr_descs(cfg, arm.collab.k)) {
    auto model = std::make_unique<SRModel>(d);
    const fs::path ckpt = fs::path(dir) / "checkpoints" / (d.model_id + ".ckpt");
    if (!fs::exists(ckpt)) throw MissingInputError("missing SR checkpoint: " + ckpt.string());
    auto params = model->params();
    const nn::CheckpointMeta meta = nn::load_checkpoint(ckpt.string(), params);
    if (meta.config_hash != cfg.sr_hash())
      throw StaleArtifactError("SR checkpoint " + ckpt.string() +
                               " does not match the current config (stale artifact)");
    models.push_back(std::move(model));
  }
  return models;
}

}  // namespace

std::string resolve_prepare_dir(const ExperimentConfig& cfg) {
  if (!cfg.io.prepare_dir.empty()) return cfg.io.prepare_dir;
  return (fs::path(cfg.out_dir) / run_dir_name("prepare", cfg.data_hash(), cfg.seed)).string();
}

std::string resolve_degraders_dir(const ExperimentConfig& cfg) {
  if (!cfg.io.degraders_dir.empty()) return cfg.io.degraders_dir;
  return (fs::path(cfg.out_dir) / run_dir_name("degraders", cfg.degrader_hash(), cfg.seed))
      .string();
}

std::string resolve_sr_dir(const ExperimentConfig& cfg) {
  if (!cfg.io.sr_dir.empty()) return cfg.io.sr_dir;
  return (fs::path(cfg.out_dir) / run_dir_name("sr", cfg.sr_hash(), cfg.seed, cfg.ablation))
      .string();
}

ArmSetup apply_ablation_arm(const ExperimentConfig& cfg) {
  ArmSetup arm;
  arm.collab = cfg.collab;
  arm.data_mode = CollabDataMode::kPerModel;
  arm.generators_used = -1;
  const std::string& a = cfg.ablation;
  if (a == "cl") {
    return arm;
  }
  if (a == "cl_no_ada") {
    arm.collab.lambda_ada = 0.0;
    arm.collab.alternation = {Phase::kSynthetic};
    return arm;
  }
  arm.collab.k = 1;
  arm.collab.lambda_col = 0.0;
  arm.collab.lambda_ada = 0.0;
  arm.collab.alternation = {Phase::kSynthetic};
  if (a == "naive") {
    arm.data_mode = CollabDataMode::kPooled;
  } else if (a == "single") {
    arm.data_mode = CollabDataMode::kPerModel;
    arm.generators_used = 1;
  } else if (a == "bicubic") {
    arm.data_mode = CollabDataMode::kCleanBicubic;
    arm.generators_used = 0;
  } else {
    throw ConfigError("unknown ablation arm '" + a + "'");
  }
  return arm;
}

int cmd_prepare(const ExperimentConfig& cfg) {
  Timer timer;
  const fs::path dir = resolve_prepare_dir(cfg);
  fs::create_directories(dir / "hr");
  fs::create_directories(dir / "lr");
  const OracleDegradation oracle = oracle_from_config(cfg);

  RunManifest manifest;
  manifest.stage = "prepare";
  manifest.config_hash = hash_hex(cfg.data_hash());
  manifest.seed = cfg.seed;

  std::vector<std::string> stems;
  if (cfg.data.mode == "oracle") {
    for (int i = 0; i < cfg.data.n_textures; ++i) {
      const std::string stem = stem_name(size_t(i));
      const ImageBatch hr = make_texture(cfg.data.texture_size, cfg.data.channels,
                                         derive_seed(cfg.seed, "corpus"), uint64_t(i));
      save_image((dir / "hr" / (stem + ".png")).string(), hr);
      // degrade the quantized image that later stages will actually load
      const ImageBatch hr_q = load_image((dir / "hr" / (stem + ".png")).string());
      const ImageBatch lr = oracle_degrade(hr_q, oracle, derive_seed(cfg.seed, "prepare_lr",
                                                                      uint64_t(i)));
      save_image((dir / "lr" / (stem + ".png")).string(), lr);
      stems.push_back(stem);
    }
  } else {
    const fs::path src_hr = fs::path(cfg.data.root) / "hr";
    const fs::path src_lr = fs::path(cfg.data.root) / "lr";
    if (!fs::is_directory(src_hr) || !fs::is_directory(src_lr))
      throw MissingInputError("data.root must contain hr/ and lr/: " + cfg.data.root);
    for (const auto& e : fs::directory_iterator(src_hr)) {
      if (e.path().extension() != ".png") continue;
      const std::string stem = e.path().stem().string();
      const fs::path lr_src = src_lr / (stem + ".png");
      if (!fs::exists(lr_src))
        throw MissingInputError("missing LR counterpart for " + e.path().string());
      fs::copy_file(e.path(), dir / "hr" / (stem + ".png"),
                    fs::copy_options::overwrite_existing);
      fs::copy_file(lr_src, dir / "lr" / (stem + ".png"),
                    fs::copy_options::overwrite_existing);
      stems.push_back(stem);
    }
    if (stems.empty()) throw MissingInputError("no PNG images under " + src_hr.string());
    std::sort(stems.begin(), stems.end());
  }

  const SplitManifest splits = split_stems(stems, cfg.data.split, cfg.seed);
  json sj;
  sj["train"] = splits.train;
  sj["val"] = splits.val;
  sj["test"] = splits.test;
  write_text(dir / "splits.json", sj.dump(2));
  write_text(dir / "config.json", cfg.to_json_text());

  for (const auto& stem : stems) {
    manifest.outputs.push_back("hr/" + stem + ".png");
    manifest.outputs.push_back("lr/" + stem + ".png");
  }
  manifest.outputs.push_back("splits.json");
  manifest.outputs.push_back("config.json");
  manifest.wall_clock_s = timer.seconds();
  write_manifest(dir.string(), manifest);
  std::printf("prepare: %zu images under %s\n", stems.size(), dir.string().c_str());
  return 0;
}

int cmd_train_degraders(const ExperimentConfig& cfg) {
  Timer timer;
  const UnpairedCorpus corpus = load_prepared_corpus(cfg);
  const fs::path dir = resolve_degraders_dir(cfg);
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "logs");

  GeneratorEnsemble ens = build_ensemble(generator_descs(cfg));
  if (cfg.ensemble.freeze_sigma)
    for (auto& m : ens.members) m->freeze_deterministic();

  const auto results = train_ensemble(ens, corpus, cfg.degrader);

  RunManifest manifest;
  manifest.stage = "train-degraders";
  manifest.config_hash = hash_hex(cfg.degrader_hash());
  manifest.seed = cfg.seed;
  manifest.inputs.push_back(resolve_prepare_dir(cfg));

  bool diverged = false;
  for (int k = 0; k < ens.size(); ++k) {
    auto& gen = ens.member(k);
    nn::CheckpointMeta meta;
    meta.arch_id = gen.arch_id();
    meta.scale = gen.scale();
    meta.config_hash = cfg.degrader_hash();
    auto params = gen.params();
    const std::string ckpt = "checkpoints/gen-" + gen.arch_id() + ".ckpt";
    const std::string log = "logs/gen-" + gen.arch_id() + ".csv";
    nn::save_checkpoint((dir / ckpt).string(), meta, params);
    write_degrader_log_csv((dir / log).string(), results[size_t(k)].log);
    manifest.outputs.push_back(ckpt);
    manifest.outputs.push_back(log);
    if (results[size_t(k)].diverged) {
      diverged = true;
      std::fprintf(stderr, "member %s diverged at step %lld; last-good checkpoint written to %s\n",
                   gen.arch_id().c_str(),
                   static_cast<long long>(results[size_t(k)].abort_step), ckpt.c_str());
    }
  }
  write_text(dir / "config.json", cfg.to_json_text());
  manifest.outputs.push_back("config.json");
  manifest.wall_clock_s = timer.seconds();
  write_manifest(dir.string(), manifest);
  std::printf("train-degraders: %d member(s) -> %s\n", ens.size(), dir.string().c_str());
  return diverged ? int(ExitCode::kDivergence) : 0;
}

int cmd_train_sr(const ExperimentConfig& cfg) {
  Timer timer;
  const UnpairedCorpus corpus = load_prepared_corpus(cfg);
  const ArmSetup arm = apply_ablation_arm(cfg);
  GeneratorEnsemble ens;
  if (arm.generators_used != 0) ens = load_trained_ensemble(cfg, arm.generators_used);

  const fs::path dir = resolve_sr_dir(cfg);
  fs::create_directories(dir / "checkpoints");

  std::vector<std::unique_ptr<SRModel>> owned;
  std::vector<SRModel*> models;
  for (const auto& d : sr_descs(cfg, arm.collab.k)) {
    owned.push_back(std::make_unique<SRModel>(d));
    models.push_back(owned.back().get());
  }

  CollabConfig ccfg = arm.collab;
  ccfg.data_mode = arm.data_mode;
  const CollabTrainResult result = train_collab(models, ens, corpus, ccfg);

  RunManifest manifest;
  manifest.stage = "train-sr";
  manifest.config_hash = hash_hex(cfg.sr_hash());
  manifest.seed = cfg.seed;
  manifest.inputs.push_back(resolve_prepare_dir(cfg));
  if (arm.generators_used != 0) manifest.inputs.push_back(resolve_degraders_dir(cfg));

  for (auto* m : models) {
    nn::CheckpointMeta meta;
    meta.arch_id = m->model_id();
    meta.scale = m->scale();
    meta.config_hash = cfg.sr_hash();
    auto params = m->params();
    const std::string ckpt = "checkpoints/" + m->model_id() + ".ckpt";
    nn::save_checkpoint((dir / ckpt).string(), meta, params);
    manifest.outputs.push_back(ckpt);
  }
  write_curves_csv((dir / "curves.csv").string(), result.curves);
  manifest.outputs.push_back("curves.csv");
  if (!result.curves.empty()) {
    std::vector<PlotSeries> series(models.size());
    for (size_t i = 0; i < models.size(); ++i) {
      series[i].label = models[i]->model_id();
      for (const auto& row : result.curves) {
        series[i].x.push_back(double(row.iteration));
        series[i].y.push_back(row.psnr[i]);
      }
    }
    render_line_plot((dir / "curves.png").string(), series);
    manifest.outputs.push_back("curves.png");
  }
  write_text(dir / "config.json", cfg.to_json_text());
  manifest.outputs.push_back("config.json");
  manifest.wall_clock_s = timer.seconds();
  write_manifest(dir.string(), manifest);
  std::printf("train-sr[%s]: %lld steps -> %s\n", cfg.ablation.c_str(),
              static_cast<long long>(result.steps_done), dir.string().c_str());
  return result.aborted ? int(ExitCode::kDivergence) : 0;
}

int cmd_evaluate(const ExperimentConfig& cfg) {
  Timer timer;
  const UnpairedCorpus corpus = load_prepared_corpus(cfg);
  auto models = load_trained_models(cfg);

  const fs::path dir =
      fs::path(cfg.out_dir) / run_dir_name("evaluate", cfg.sr_hash(), cfg.seed, cfg.ablation);
  fs::create_directories(dir);

  std::vector<MetricReport> reports;
  for (auto& m : models) {
    std::vector<ImageBatch> outputs;
    for (const auto& lr : corpus.val.lr) outputs.push_back(m->restore(lr));
    MetricReport rep = evaluate_pairs(m->model_id(), corpus.val.names, outputs, corpus.val.hr,
                                      cfg.metrics.border_crop);
    rep.config_hash = hash_hex(cfg.sr_hash());
    rep.seed = cfg.seed;
    rep.dataset_id = run_dir_name("prepare", cfg.data_hash(), cfg.seed) + "/val";
    reports.push_back(std::move(rep));
  }
  size_t best = 0;
  for (size_t i = 1; i < reports.size(); ++i)
    if (reports[i].mean_psnr_db > reports[best].mean_psnr_db) best = i;

  RunManifest manifest;
  manifest.stage = "evaluate";
  manifest.config_hash = hash_hex(cfg.sr_hash());
  manifest.seed = cfg.seed;
  manifest.inputs.push_back(resolve_prepare_dir(cfg));
  manifest.inputs.push_back(resolve_sr_dir(cfg));

  write_text(dir / "metrics.json", report_to_json(reports, reports[best].model_id));
  write_report_csv((dir / "metrics.csv").string(), reports);
  manifest.outputs.push_back("metrics.json");
  manifest.outputs.push_back("metrics.csv");

  // distributional fidelity of the trained degraders, when available
  const std::string deg_dir = resolve_degraders_dir(cfg);
  const ArmSetup arm = apply_ablation_arm(cfg);
  if (arm.generators_used != 0 && fs::is_directory(deg_dir)) {
    GeneratorEnsemble ens = load_trained_ensemble(cfg, arm.generators_used);
    const OracleDegradation oracle = oracle_from_config(cfg);
    json fj;
    for (auto& g : ens.members) {
      const FidelityReport rep =
          degrader_fidelity(*g, oracle, corpus.val.hr, cfg.metrics.fidelity_samples,
                            derive_seed(cfg.seed, "fidelity"));
      json it;
      it["wasserstein1"] = rep.w1;
      it["mean_l1_to_clean"] = rep.mean_l1_to_clean;
      it["used_paired_fallback"] = rep.used_paired_fallback;
      fj[g->arch_id()] = it;
    }
    write_text(dir / "fidelity.json", fj.dump(2));
    manifest.outputs.push_back("fidelity.json");
    manifest.inputs.push_back(deg_dir);
  }

  write_text(dir / "config.json", cfg.to_json_text());
  manifest.outputs.push_back("config.json");
  manifest.wall_clock_s = timer.seconds();
  write_manifest(dir.string(), manifest);
  std::printf("evaluate[%s]: best %s %.3f dB / %.4f ssim -> %s\n", cfg.ablation.c_str(),
              reports[best].model_id.c_str(), reports[best].mean_psnr_db,
              reports[best].mean_ssim, dir.string().c_str());
  return 0;
}

int cmd_robustness(const ExperimentConfig& cfg) {
  Timer timer;
  const UnpairedCorpus corpus = load_prepared_corpus(cfg);
  auto models = load_trained_models(cfg);

  const fs::path dir =
      fs::path(cfg.out_dir) / run_dir_name("robustness", cfg.sr_hash(), cfg.seed, cfg.ablation);
  fs::create_directories(dir);

  std::vector<ValPair> pairs;
  for (size_t i = 0; i < corpus.val.lr.size(); ++i)
    pairs.push_back({corpus.val.lr[i], corpus.val.hr[i]});

  RunManifest manifest;
  manifest.stage = "robustness";
  manifest.config_hash = hash_hex(cfg.sr_hash());
  manifest.seed = cfg.seed;
  manifest.inputs.push_back(resolve_prepare_dir(cfg));
  manifest.inputs.push_back(resolve_sr_dir(cfg));

  std::vector<PlotSeries> series;
  for (auto& m : models) {
    const RobustnessCurve curve = robustness_sweep(
        [&](const ImageBatch& lr) { return m->restore(lr); }, pairs, cfg.metrics.robust_grid,
        derive_seed(cfg.seed, "robust"));
    const std::string base = "robustness-" + m->model_id();
    write_text(dir / (base + ".json"), robustness_to_json(curve));
    write_robustness_csv((dir / (base + ".csv")).string(), curve);
    manifest.outputs.push_back(base + ".json");
    manifest.outputs.push_back(base + ".csv");
    PlotSeries s;
    s.label = m->model_id();
    s.x = curve.sigma_grid;
    s.y = curve.psnr_at_sigma;
    series.push_back(std::move(s));
  }
  render_line_plot((dir / "robustness.png").string(), series);
  manifest.outputs.push_back("robustness.png");
  write_text(dir / "config.json", cfg.to_json_text());
  manifest.outputs.push_back("config.json");
  manifest.wall_clock_s = timer.seconds();
  write_manifest(dir.string(), manifest);
  std::printf("robustness[%s]: %zu model(s) -> %s\n", cfg.ablation.c_str(), models.size(),
              dir.string().c_str());
  return 0;
}

int cmd_ablate(const ExperimentConfig& cfg) {
  Timer timer;
  const std::vector<std::string> arms = {"single", "naive", "cl_no_ada", "cl"};
  json summary = json::object();
  for (const auto& arm : arms) {
    ExperimentConfig arm_cfg = cfg;
    arm_cfg.ablation = arm;
    const int train_rc = cmd_train_sr(arm_cfg);
    if (train_rc != 0) return train_rc;
    const int eval_rc = cmd_evaluate(arm_cfg);
    if (eval_rc != 0) return eval_rc;

    const fs::path eval_dir = fs::path(cfg.out_dir) /
                              run_dir_name("evaluate", arm_cfg.sr_hash(), arm_cfg.seed, arm);
    std::ifstream is(eval_dir / "metrics.json");
    json m;
    is >> m;
    const std::string best = m.at("best_model").get<std::string>();
    for (const auto& model : m.at("models")) {
      if (model.at("model_id").get<std::string>() != best) continue;
      summary[arm] = {{"best_model", best},
                      {"mean_psnr_db", model.at("mean_psnr_db")},
                      {"mean_ssim", model.at("mean_ssim")}};
    }
  }

  const fs::path dir = fs::path(cfg.out_dir) / run_dir_name("ablate", cfg.sr_hash(), cfg.seed);
  fs::create_directories(dir);
  RunManifest manifest;
  manifest.stage = "ablate";
  manifest.config_hash = hash_hex(cfg.sr_hash());
  manifest.seed = cfg.seed;
  write_text(dir / "ablation-summary.json", summary.dump(2));
  manifest.outputs.push_back("ablation-summary.json");
  {
    std::ofstream os(dir / "ablation-summary.csv");
    os << "arm,best_model,mean_psnr_db,mean_ssim\n";
    os.precision(17);
    for (const auto& arm : arms)
      os << arm << "," << summary[arm]["best_model"].get<std::string>() << ","
         << summary[arm]["mean_psnr_db"].get<double>() << ","
         << summary[arm]["mean_ssim"].get<double>() << "\n";
  }
  manifest.outputs.push_back("ablation-summary.csv");
  write_text(dir / "config.json", cfg.to_json_text());
  manifest.outputs.push_back("config.json");
  manifest.wall_clock_s = timer.seconds();
  write_manifest(dir.string(), manifest);
  std::printf("ablate: summary -> %s\n", dir.string().c_str());
  return 0;
}

}  // namespace sdsr
