#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "padme/dataset.hpp"
#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/rng.hpp"
#include "padme/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace padme;

namespace {

const char* kSequences = "P1\t0\tACDEFGHIKL\nP2\t1\tMKKLLPTAAG\n";

struct Files {
  testing::TempDir dir{"ds"};
  std::filesystem::path csv = dir / "interactions.csv";
  std::filesystem::path tsv = dir / "sequences.tsv";

  Files(const std::string& rows, const char* seqs = kSequences) {
    io::write_text(csv, "smiles,protein_id,task_id,value\n" + rows);
    io::write_text(tsv, seqs);
  }
};

InteractionRecord rec(std::size_t c, std::size_t p, double v = 1.0, std::size_t t = 0) {
  InteractionRecord r;
  r.compound = c;
  r.protein = p;
  r.task = t;
  r.raw = v;
  r.value = v;
  return r;
}

// Straightforward fixed point: recount from scratch and drop until stable.
std::vector<InteractionRecord> filter_oracle(std::vector<InteractionRecord> rs, std::size_t min_obs) {
  while (true) {
    std::map<std::size_t, std::size_t> nc, np;
    for (const auto& r : rs) {
      ++nc[r.compound];
      ++np[r.protein];
    }
    std::vector<InteractionRecord> kept;
    for (const auto& r : rs)
      if (nc[r.compound] > min_obs && np[r.protein] > min_obs) kept.push_back(r);
    if (kept.size() == rs.size()) return kept;
    rs = std::move(kept);
  }
}

std::set<std::tuple<std::size_t, std::size_t, std::size_t>> keys(const std::vector<InteractionRecord>& rs) {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> out;
  for (const auto& r : rs) out.insert({r.compound, r.protein, r.task});
  return out;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("three row fixture") {
    Files f("C,P1,0,100\nC,P2,0,10\nCC,P1,0,1000\n");
    LoadReport rep;
    const Dataset ds = load_interactions(f.csv, f.tsv, {}, &rep);
    const DatasetSummary s = summarize(ds);
    CHECK(s.n_compounds == 2);
    CHECK(s.n_proteins == 2);
    CHECK(s.n_pairs == 3);
    CHECK(rep.rows == 3);
    CHECK(ds.records[0].raw == 100.0);
    CHECK(ds.proteins[1].phosphorylated);
  }

  TEST_CASE("imprecise values are discarded") {
    Files f("C,P1,0,>10000\nC,P2,0,10\nCC,P1,0,<5\nCC,P2,0,~3\n");
    LoadReport rep;
    const Dataset ds = load_interactions(f.csv, f.tsv, {}, &rep);
    CHECK(rep.discarded_imprecise == 3);
    CHECK(ds.records.size() == 1);
    Files one("C,P1,0,>10000\nC,P2,0,10\n");
    LoadReport r1;
    load_interactions(one.csv, one.tsv, {}, &r1);
    CHECK(r1.discarded_imprecise == 1);
  }

  TEST_CASE("malformed rows respect the tolerance") {
    Files f("C,P1,0,100\nC1CC,P2,0,10\nCC,P1,0,1000\n");
    CHECK_THROWS_WITH_AS(load_interactions(f.csv, f.tsv), doctest::Contains("interactions.csv:3"), DataError);
    LoadOptions opt;
    opt.malformed_tolerance = 1;
    LoadReport rep;
    const Dataset ds = load_interactions(f.csv, f.tsv, opt, &rep);
    CHECK(rep.malformed == 1);
    CHECK(ds.records.size() == 2);
    REQUIRE(rep.diagnostics.size() == 1);
    CHECK(rep.diagnostics[0].find(":3:") != std::string::npos);
  }

  TEST_CASE("missing protein names the id") {
    Files f("C,P1,0,100\nC,P9,0,10\n");
    CHECK_THROWS_WITH_AS(load_interactions(f.csv, f.tsv), doctest::Contains("P9"), DataError);
  }

  TEST_CASE("bad residue names the position") {
    Files f("C,P1,0,100\n", "P1\t0\tACDXFG\n");
    CHECK_THROWS_WITH_AS(load_interactions(f.csv, f.tsv), doctest::Contains("position 4"), DataError);
  }

  TEST_CASE("header is checked") {
    Files f("");
    io::write_text(f.csv, "smiles,target,value\nC,P1,1\n");
    CHECK_THROWS_AS(load_interactions(f.csv, f.tsv), DataError);
  }

  TEST_CASE("assay map groups assays into tasks") {
    Files f("C,A1,100\n");
    io::write_text(f.csv, "smiles,protein_id,task_id,value\nC,P1,a1,100\nC,P1,a2,10\nCC,P2,a3,1\n");
    io::write_text(f.dir / "assays.tsv", "a1\t0\na2\t1\na3\t1\n");
    LoadOptions opt;
    opt.assay_map = f.dir / "assays.tsv";
    const Dataset ds = load_interactions(f.csv, f.tsv, opt);
    CHECK(ds.n_tasks == 2);
    REQUIRE(ds.records.size() == 3);
    CHECK(ds.records[1].task == 1);
    CHECK(ds.records[2].task == 1);
  }

  TEST_CASE("write and reload") {
    Files f("C,P1,0,100\nC,P2,1,10.5\nCC,P1,0,1000\n");
    const Dataset ds = load_interactions(f.csv, f.tsv);
    write_interactions(f.dir / "again.csv", ds);
    const Dataset back = load_interactions(f.dir / "again.csv", f.tsv);
    CHECK(back.records.size() == 3);
    CHECK(back.n_tasks == ds.n_tasks);
    write_interactions(f.dir / "third.csv", back);
    CHECK(io::read_text(f.dir / "again.csv") == io::read_text(f.dir / "third.csv"));
  }

  TEST_CASE("transform") {
    CHECK(transform_value(1.0) == 4.0);
    CHECK(transform_value(10000.0) == 0.0);
    CHECK_THROWS_AS(transform_value(0.0), DataError);
    CHECK_THROWS_AS(transform_value(-3.0), DataError);
    std::vector<InteractionRecord> rs = {rec(0, 0, 1e6), rec(0, 1, 50.0)};
    transform_values(rs, std::make_pair(1e6, 1e3));
    CHECK(rs[0].value == 1.0);
    CHECK(rs[0].raw == 1e6);
    CHECK(rs[1].value == doctest::Approx(4.0 - std::log10(50.0)));
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
      const double raw = std::pow(10.0, rng.uniform(-3, 9));
      CHECK(std::abs(inverse_transform(transform_value(raw)) - raw) <= 1e-9 * raw);
    }
  }

  TEST_CASE("duplicates are averaged") {
    const std::vector<InteractionRecord> rs = {rec(1, 0, 2.0), rec(0, 0, 1.0), rec(1, 0, 4.0), rec(1, 0, 6.0, 1)};
    const auto merged = merge_duplicates(rs);
    REQUIRE(merged.size() == 3);
    CHECK(merged[0].compound == 0);
    CHECK(merged[1].value == 3.0);
    CHECK(merged[2].task == 1);
  }

  TEST_CASE("sparse filtering") {
    std::vector<InteractionRecord> star;
    for (std::size_t c = 0; c < 5; ++c) star.push_back(rec(c, 0));
    CHECK(filter_sparse(star, 0).size() == 5);
    CHECK(filter_sparse(star, 1).empty());

    std::vector<InteractionRecord> hub;
    for (std::size_t p = 0; p < 7; ++p) hub.push_back(rec(0, p));
    for (std::size_t p = 0; p < 7; ++p)
      for (std::size_t c = 1; c < 8; ++c)
        if ((c + p) % 2 == 0) hub.push_back(rec(c, p));
    const auto kept = filter_sparse(hub, 6);
    CHECK(keys(kept) == keys(filter_oracle(hub, 6)));

    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<InteractionRecord> rs;
      for (std::size_t c = 0; c < 20; ++c)
        for (std::size_t p = 0; p < 8; ++p)
          if (rng.uniform() < 0.35) rs.push_back(rec(c, p));
      const std::size_t min_obs = rng.below(4);
      const auto once = filter_sparse(rs, min_obs);
      CHECK(keys(once) == keys(filter_oracle(rs, min_obs)));
      CHECK(keys(filter_sparse(once, min_obs)) == keys(once));
    }
  }

  TEST_CASE("compact renumbers") {
    Dataset ds;
    ds.compounds = {"C", "CC", "CCC"};
    ds.proteins = {{"P1", false, "ACD"}, {"P2", false, "ACD"}};
    ds.records = {rec(2, 1)};
    const Dataset c = compact(ds);
    CHECK(c.compounds == std::vector<std::string>{"CCC"});
    CHECK(c.proteins.size() == 1);
    CHECK(c.proteins[0].id == "P2");
    CHECK(c.records[0].compound == 0);
    CHECK(c.records[0].protein == 0);
  }

  TEST_CASE("pairs carry task masks") {
    const std::vector<InteractionRecord> rs = {rec(0, 0, 5.0, 1), rec(0, 0, 6.0, 0), rec(1, 0, 7.0, 1)};
    const auto pairs = assemble_pairs(rs, 2);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].target == std::vector<double>{6.0, 5.0});
    CHECK(pairs[0].mask == std::vector<double>{1.0, 1.0});
    CHECK(pairs[1].target == std::vector<double>{0.0, 7.0});
    CHECK(pairs[1].mask == std::vector<double>{0.0, 1.0});
    const std::vector<InteractionRecord> dup = {rec(0, 0), rec(0, 0)};
    CHECK_THROWS_AS(assemble_pairs(dup, 1), DataError);
  }

  TEST_CASE("oversampling replicates minority pairs") {
    std::vector<PairSample> s;
    for (int i = 0; i < 8; ++i) s.push_back({static_cast<std::size_t>(i), 0, {1.0}, {1.0}});
    s.push_back({8, 0, {3.0}, {1.0}});
    s.push_back({9, 0, {4.0}, {1.0}});
    CHECK(oversample(s, 0.0, 1).size() == 10);
    const auto out = oversample(s, 1.0, 1);
    CHECK(out.size() == 16);
    for (std::size_t i = 10; i < out.size(); ++i) CHECK(out[i].target[0] != 1.0);
    CHECK(oversample(s, 1.0, 1).size() == out.size());
  }

  TEST_CASE("synthetic data covers every entity twice") {
    SyntheticOptions o;
    o.n_compounds = 30;
    o.n_proteins = 6;
    o.density = 0.3;
    const Dataset ds = make_synthetic(o);
    std::map<std::size_t, std::size_t> nc, np;
    for (const auto& r : ds.records) {
      ++nc[r.compound];
      ++np[r.protein];
      CHECK(r.value == doctest::Approx(transform_value(r.raw)));
    }
    CHECK(nc.size() == 30);
    for (const auto& [c, n] : nc) CHECK(n >= 2);
    for (const auto& [p, n] : np) CHECK(n >= 2);
  }
}
