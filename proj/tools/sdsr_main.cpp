#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sdsr/cli/commands.hpp"
#include "sdsr/core/errors.hpp"

namespace {

struct GlobalOpts {
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
};

void add_global_opts(CLI::App* app, GlobalOpts& g) {
  app->add_option("--config", [&g](const std::vector<std::string>& v) {
       g.config = v.front();
       return true;
     }, "experiment config file (JSON)");
  app->add_option("--preset", [&g](const std::vector<std::string>& v) {
       g.preset = v.front();
       return true;
     }, "configuration preset: desk|paper");
  app->add_option("--seed", [&g](const std::vector<std::string>& v) {
       g.seed = std::stoull(v.front());
       return true;
     }, "master seed");
  app->add_option("--out", [&g](const std::vector<std::string>& v) {
       g.out = v.front();
       return true;
     }, "output root directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic degradation modeling and collaborative SR toolkit"};
  app.require_subcommand(1);
  GlobalOpts g;

  struct Verb {
    const char* name;
    const char* help;
    int (*run)(const sdsr::ExperimentConfig&);
  };
  const Verb verbs[] = {
      {"prepare", "build the corpus (oracle textures or folder import) and split manifest",
       sdsr::cmd_prepare},
      {"train-degraders", "stage 1: adversarial training of the degradation generators",
       sdsr::cmd_train_degraders},
      {"train-sr", "stage 2: collaborative training of the SR models", sdsr::cmd_train_sr},
      {"evaluate", "PSNR/SSIM report on the held-out pairs plus degrader fidelity",
       sdsr::cmd_evaluate},
      {"robustness", "test-time noise sweep over the validation LR images",
       sdsr::cmd_robustness},
      {"ablate", "run the single/naive/cl_no_ada/cl arms and summarize", sdsr::cmd_ablate},
  };

  for (const auto& verb : verbs) {
    CLI::App* sub = app.add_subcommand(verb.name, verb.help);
    add_global_opts(sub, g);
    sub->callback([&g, &verb]() {
      const sdsr::ExperimentConfig cfg =
          sdsr::load_experiment_config(g.config, g.preset, g.seed, g.out);
      const int rc = verb.run(cfg);
      if (rc != 0) throw sdsr::Error(sdsr::ExitCode(rc), "stage finished with errors");
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const sdsr::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return int(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
