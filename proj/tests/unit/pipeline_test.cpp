#include <doctest.h>

#include <fstream>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/pipeline.hpp"
#include "padme/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace padme;

namespace {

struct Fixture {
  testing::TempDir dir{"pipe"};
  std::filesystem::path data = dir / "data";

  explicit Fixture(std::size_t n_compounds = 40, std::size_t n_proteins = 10, std::uint64_t seed = 5) {
    std::filesystem::create_directories(data);
    SyntheticOptions o;
    o.n_compounds = n_compounds;
    o.n_proteins = n_proteins;
    o.density = 0.5;
    o.family_size = 2;
    o.min_length = 40;
    o.max_length = 80;
    o.seed = seed;
    const Dataset ds = make_synthetic(o);
    write_interactions(data / "interactions.csv", ds);
    write_sequence_file(data / "sequences.tsv", ds.proteins);
  }
};

RunConfig tiny(std::uint64_t seed = 3) {
  RunConfig c = smoke_config(seed);
  c.set("model.hidden_layers", "16");
  c.set("model.dropout", "0");
  c.set("model.ecfp_bits", "512");
  c.set("train.max_epochs", "2");
  return c;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("prepare and fold files round trip") {
    Fixture fx;
    const RunConfig cfg = tiny();
    const PreparedData data = prepare_data(cfg, fx.data);
    CHECK(data.summary.n_compounds == 40);
    CHECK(data.samples.size() == data.summary.n_pairs);
    for (SplitScheme s : {SplitScheme::Warm, SplitScheme::ColdDrug, SplitScheme::ColdTarget, SplitScheme::ColdCluster}) {
      const SplitOutcome out = make_split(cfg, data, s, 5, 1);
      CHECK(out.audit_ok);
      const std::string csv = folds_csv(data, out.folds);
      const FoldAssignment back = parse_folds_csv(csv, data, s);
      CHECK(back.fold == out.folds.fold);
      CHECK(folds_csv(data, back) == csv);
    }
  }

  TEST_CASE("run directory lock") {
    testing::TempDir dir("lock");
    {
      RunDirLock a(dir.path());
      CHECK_THROWS_AS(RunDirLock(dir.path()), IoError);
    }
    RunDirLock again(dir.path());
  }

  TEST_CASE("virtual search keys") {
    const SearchSpace space = SearchSpace::parse(
        "model.n_layers = integer 1 3\nmodel.layer_width = categorical 32|64\nmodel.dropout_rate = continuous 0 0.5\n"
        "train.learning_rate = continuous 0.001 0.01 log\n");
    const RunConfig c = apply_point(RunConfig(), space, space.point({0.99, 0.9, 0.5, 0.0}));
    CHECK(c.get("model.hidden_layers") == "64,64,64");
    CHECK(c.get("model.dropout") == "0.25");
    CHECK(c.number("train.learning_rate") == doctest::Approx(0.001));
    CHECK(c.model_config(1, {}).dropout.size() == 3);
  }

  TEST_CASE("train, predict and evaluate") {
    Fixture fx;
    const RunConfig cfg = tiny();
    const TrainOutput t = run_train(cfg, fx.data, fx.dir / "run");
    CHECK(std::filesystem::exists(t.checkpoint));
    CHECK(io::read_text(t.history).rfind("epoch,train_loss", 0) == 0);

    PredictOptions opt;
    opt.sequences = fx.data / "sequences.tsv";
    opt.ad_from = fx.data / "interactions.csv";
    const std::size_t n = run_predict(t.checkpoint, fx.data / "interactions.csv", fx.dir / "pred.csv", opt);
    const std::string pred = io::read_text(fx.dir / "pred.csv");
    CHECK(pred.rfind("smiles,protein_id,task_id,value,prediction,in_ad,ad_scope\n", 0) == 0);
    CHECK(count_lines(pred) == n + 1);

    const EvalReport r = run_evaluate(fx.dir / "pred.csv", fx.dir / "report.csv");
    CHECK(r.aggregate.n == n);
    CHECK(report_csv(parse_report_csv(io::read_text(fx.dir / "report.csv"))) == io::read_text(fx.dir / "report.csv"));
  }

  TEST_CASE("cross-validation report shape") {
    Fixture fx;
    RunConfig cfg = tiny();
    cfg.set("split.repetitions", "1");
    cfg.set("split.scheme", "warm");
    const CvOutput one = run_cv(cfg, fx.data, fx.dir / "cv1");
    CHECK(one.rows.size() == 5);
    const std::string text = io::read_text(one.report);
    CHECK(count_lines(text) == 1 + 5 + 2);
    CHECK(text.find("warm,mean,") != std::string::npos);
    CHECK(text.find("warm,std,") != std::string::npos);

    cfg.set("split.repetitions", "2");
    cfg.set("split.scheme", "cold-drug");
    const CvOutput two = run_cv(cfg, fx.data, fx.dir / "cv2");
    CHECK(two.rows.size() == 10);
    for (const auto& row : two.rows) CHECK(row.leakage_ok);
    const std::string t2 = io::read_text(two.report);
    const auto std_row = t2.substr(t2.find("cold-drug,std,"));
    const auto cells = io::split_csv(std_row.substr(0, std_row.find('\n')));
    CHECK(std::stod(cells[4]) > 0.0);
  }

  TEST_CASE("tuning writes trials and the best config") {
    Fixture fx;
    RunConfig cfg = tiny();
    cfg.set("tune.strategy", "random");
    cfg.set("tune.budget", "2");
    const SearchSpace space = SearchSpace::parse("train.learning_rate = continuous 0.001 0.01 log\n");
    const TuneOutput out = run_tune(cfg, fx.data, fx.dir / "tune", space);
    CHECK(out.result.trials.size() == 2);
    CHECK(count_lines(io::read_text(out.trials)) == 3);
    const RunConfig best = RunConfig::load(out.best_config);
    CHECK(best.get("train.learning_rate") == out.result.best_trial().point.get(0));
  }

  TEST_CASE("ingestion failures name the problem") {
    Fixture fx;
    std::ofstream(fx.data / "interactions.csv", std::ios::app) << "C1CC,P10000,0,5\n";
    CHECK_THROWS_WITH_AS(prepare_data(tiny(), fx.data), doctest::Contains("interactions.csv:"), DataError);
    Fixture missing;
    std::ofstream(missing.data / "interactions.csv", std::ios::app) << "CCO,Q404,0,5\n";
    CHECK_THROWS_WITH_AS(prepare_data(tiny(), missing.data), doctest::Contains("Q404"), DataError);
  }
}
