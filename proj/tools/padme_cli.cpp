// padme command-line front end. Talks to the library only through padme.h.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "padme/padme.h"

namespace {

struct Common {
  std::string config;
  std::optional<unsigned long long> seed;
  std::string data_dir = ".";
  std::string out_dir = "padme-out";
  std::optional<std::string> scheme;
  std::optional<std::size_t> k;
  std::optional<std::size_t> repetitions;
  std::optional<std::string> variant;
  std::vector<std::string> overrides;
};

int report(padme_status s, const char* what) {
  if (s == PADME_OK) return 0;
  std::fprintf(stderr, "padme %s: %s: %s\n", what, padme_status_name(s), padme_last_error());
  return static_cast<int>(s);
}

class Config {
 public:
  ~Config() { padme_config_free(cfg_); }
  padme_config* get() const { return cfg_; }

  padme_status build(const Common& c) {
    padme_status s = c.config.empty() ? padme_config_create(&cfg_) : padme_config_load(c.config.c_str(), &cfg_);
    if (s != PADME_OK) return s;
    auto set = [&](const char* key, const std::string& value) {
      if (s == PADME_OK) s = padme_config_set(cfg_, key, value.c_str());
    };
    for (const auto& kv : c.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "--set expects key=value, got '%s'\n", kv.c_str());
        return PADME_ERR_INVALID_ARGUMENT;
      }
      set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
    }
    if (c.seed) set("run.seed", std::to_string(*c.seed));
    if (c.scheme) set("split.scheme", *c.scheme);
    if (c.k) set("split.k", std::to_string(*c.k));
    if (c.repetitions) set("split.repetitions", std::to_string(*c.repetitions));
    if (c.variant) set("model.variant", *c.variant);
    return s;
  }

  std::string value(const char* key) const {
    std::size_t needed = 0;
    padme_config_get(cfg_, key, nullptr, 0, &needed);
    std::string v(needed, '\0');
    padme_config_get(cfg_, key, v.data(), v.size(), nullptr);
    v.resize(needed ? needed - 1 : 0);
    return v;
  }

 private:
  padme_config* cfg_ = nullptr;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Run configuration file");
  app->add_option("--seed", c.seed, "Seed for every stochastic step");
  app->add_option("--data-dir,--data", c.data_dir, "Directory with interactions.csv and sequences.tsv");
  app->add_option("--out-dir,--out", c.out_dir, "Output directory");
  app->add_option("--scheme", c.scheme, "warm, cold-drug, cold-target, cold-cluster or random");
  app->add_option("--k", c.k, "Number of folds");
  app->add_option("--repetitions", c.repetitions, "Repeated splittings for cv");
  app->add_option("--variant", c.variant,
                  "padme-ecfp, padme-graphconv, compound-only-ecfp or compound-only-graphconv");
  app->add_option("--set", c.overrides, "Override a config key (key=value), repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drug-target interaction regression with fingerprint or graph-convolution compound features"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(padme_version()));

  Common common;
  int rc = 0;

  bool as_graph = false, as_ecfp = false;
  std::optional<std::size_t> radius, bits;
  auto* featurize = app.add_subcommand("featurize", "Write compound and protein feature files");
  add_common(featurize, common);
  auto* graph_flag = featurize->add_flag("--graph", as_graph, "Per-atom graph features");
  featurize->add_flag("--ecfp", as_ecfp, "Circular fingerprints")->excludes(graph_flag);
  featurize->add_option("--radius", radius, "Fingerprint radius");
  featurize->add_option("--bits", bits, "Fingerprint length");
  featurize->callback([&] {
    if (as_graph) common.overrides.push_back("model.variant=padme-graphconv");
    if (as_ecfp) common.overrides.push_back("model.variant=padme-ecfp");
    if (radius) common.overrides.push_back("model.ecfp_radius=" + std::to_string(*radius));
    if (bits) common.overrides.push_back("model.ecfp_bits=" + std::to_string(*bits));
    Config cfg;
    if ((rc = report(cfg.build(common), "featurize"))) return;
    rc = report(padme_featurize(cfg.get(), common.data_dir.c_str(), common.out_dir.c_str()), "featurize");
    if (!rc) std::printf("features written to %s\n", common.out_dir.c_str());
  });

  auto* split = app.add_subcommand("split", "Write a fold assignment CSV");
  add_common(split, common);
  split->callback([&] {
    Config cfg;
    if ((rc = report(cfg.build(common), "split"))) return;
    const std::string scheme = cfg.value("split.scheme");
    const auto k = std::stoull(cfg.value("split.k"));
    const auto seed = std::stoull(cfg.value("run.seed"));
    char path[4096] = {0};
    rc = report(padme_split(cfg.get(), common.data_dir.c_str(), common.out_dir.c_str(), scheme.c_str(), k, seed, path,
                            sizeof path),
                "split");
    if (!rc) std::printf("%s\n", path);
  });

  std::string space;
  std::optional<std::size_t> budget;
  std::optional<std::string> strategy;
  auto* tune = app.add_subcommand("tune", "Hyperparameter search on a 90/10 holdout");
  add_common(tune, common);
  tune->add_option("--space", space, "Search space file");
  tune->add_option("--budget", budget, "Number of trials");
  tune->add_option("--strategy", strategy, "gp or random");
  tune->callback([&] {
    if (budget) common.overrides.push_back("tune.budget=" + std::to_string(*budget));
    if (strategy) common.overrides.push_back("tune.strategy=" + *strategy);
    Config cfg;
    if ((rc = report(cfg.build(common), "tune"))) return;
    rc = report(padme_tune(cfg.get(), common.data_dir.c_str(), common.out_dir.c_str(), space.empty() ? nullptr : space.c_str()),
                "tune");
    if (!rc) std::printf("trial log and best.cfg written to %s\n", common.out_dir.c_str());
  });

  auto* train = app.add_subcommand("train", "Train one model with early stopping");
  add_common(train, common);
  train->callback([&] {
    Config cfg;
    if ((rc = report(cfg.build(common), "train"))) return;
    rc = report(padme_train(cfg.get(), common.data_dir.c_str(), common.out_dir.c_str()), "train");
    if (!rc) std::printf("checkpoint written to %s/model.ckpt\n", common.out_dir.c_str());
  });

  auto* cv = app.add_subcommand("cv", "Repeated k-fold cross-validation");
  add_common(cv, common);
  cv->callback([&] {
    Config cfg;
    if ((rc = report(cfg.build(common), "cv"))) return;
    rc = report(padme_cv(cfg.get(), common.data_dir.c_str(), common.out_dir.c_str()), "cv");
    if (!rc) std::printf("report written to %s/cv_report.csv\n", common.out_dir.c_str());
  });

  std::string model, input, output, sequences, ad_from;
  auto* predict = app.add_subcommand("predict", "Predict pairs with a trained checkpoint");
  predict->add_option("--model", model, "Checkpoint file")->required();
  predict->add_option("--input", input, "CSV with smiles,protein_id[,task_id,value]")->required();
  predict->add_option("--output", output, "Prediction CSV")->required();
  predict->add_option("--sequences", sequences, "Protein sequence file");
  predict->add_option("--ad-from", ad_from, "Training interactions for the applicability domain");
  predict->callback([&] {
    rc = report(padme_predict(model.c_str(), input.c_str(), output.c_str(), sequences.empty() ? nullptr : sequences.c_str(),
                              ad_from.empty() ? nullptr : ad_from.c_str()),
                "predict");
  });

  std::string predictions, report_path = "report.csv";
  auto* evaluate = app.add_subcommand("evaluate", "Metrics for a prediction CSV");
  evaluate->add_option("--predictions", predictions, "Output of predict")->required();
  evaluate->add_option("--report", report_path, "Report CSV to write");
  evaluate->callback([&] {
    std::string table(1 << 16, '\0');
    rc = report(padme_evaluate(predictions.c_str(), report_path.c_str(), table.data(), table.size()), "evaluate");
    if (!rc) std::fputs(table.c_str(), stdout);
  });

  auto* smoke = app.add_subcommand("smoke", "Run every stage on a small dataset and check the artifacts");
  add_common(smoke, common);
  smoke->callback([&] {
    Config cfg;
    if ((rc = report(cfg.build(common), "smoke"))) return;
    int passed = 0;
    const auto seed = std::stoull(cfg.value("run.seed"));
    rc = report(padme_smoke(common.data_dir.c_str(), common.out_dir.c_str(), seed, &passed), "smoke");
    if (rc) return;
    if (!passed) {
      std::fprintf(stderr, "smoke failed: %s\n", padme_last_error());
      rc = 1;
      return;
    }
    std::printf("smoke passed\n");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return rc;
}
