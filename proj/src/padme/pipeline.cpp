#include "padme/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <set>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/log.hpp"
#include "padme/rng.hpp"
#include "padme/smiles.hpp"

namespace padme {

RunDirLock::RunDirLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) throw IoError("run directory " + dir.string() + " is locked by another process (" + path_.string() + ")");
    throw IoError("cannot create " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto w = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunDirLock::~RunDirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

fs::path resolve(const fs::path& dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : dir / path;
}

std::optional<std::pair<double, double>> remap_of(const RunConfig& cfg) {
  const auto& r = cfg.get("data.inactive_remap");
  if (r.empty()) return std::nullopt;
  const auto parts = io::split(r, ':');
  return std::pair{std::stod(parts[0]), std::stod(parts[1])};
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<PairRef> refs_of(std::span<const PairSample> s) {
  std::vector<PairRef> r;
  r.reserve(s.size());
  for (const auto& x : s) r.push_back({x.compound, x.protein});
  return r;
}

std::vector<PairSample> pick(const std::vector<PairSample>& all, std::span<const std::size_t> idx) {
  std::vector<PairSample> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all.at(i));
  return out;
}

// Seeded split of indices into (train, validation) with a 10% validation part.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> inner_split(std::vector<std::size_t> idx,
                                                                          std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(idx);
  std::size_t n_val = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(idx.size())));
  if (idx.size() >= 2) n_val = std::max<std::size_t>(n_val, 1);
  std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(val.begin(), val.end());
  std::sort(tr.begin(), tr.end());
  return {tr, val};
}

std::string fmt(const std::optional<double>& v) { return v ? io::format_double(*v) : "nan"; }

}  // namespace

PreparedData prepare_data(const RunConfig& cfg, const fs::path& data_dir) {
  PreparedData d;
  LoadOptions opt;
  opt.malformed_tolerance = cfg.count("data.malformed_tolerance");
  if (!cfg.get("data.assay_map").empty()) opt.assay_map = resolve(data_dir, cfg.get("data.assay_map"));
  Dataset ds = load_interactions(resolve(data_dir, cfg.get("data.interactions")),
                                 resolve(data_dir, cfg.get("data.sequences")), opt, &d.report);
  transform_values(ds.records, remap_of(cfg));
  ds.records = filter_sparse(merge_duplicates(ds.records), cfg.count("data.min_obs"));
  d.dataset = compact(std::move(ds));
  if (d.dataset.records.empty()) throw DataError("no records left after filtering");
  d.samples = assemble_pairs(d.dataset.records, d.dataset.n_tasks);
  d.summary = summarize(d.dataset);
  return d;
}

std::vector<std::string> protein_ids(const Dataset& ds) {
  std::vector<std::string> ids;
  for (const auto& p : ds.proteins) ids.push_back(p.id);
  return ids;
}

ModelConfig model_config_for(const RunConfig& cfg, const Dataset& ds) {
  return cfg.model_config(ds.n_tasks, protein_ids(ds));
}

FeatureStore feature_store_for(const ModelConfig& cfg, const Dataset& ds) {
  return FeatureStore::build(cfg, ds.compounds, ds.proteins);
}

std::vector<Fingerprint> clustering_fingerprints(const Dataset& ds, std::uint32_t n_bits) {
  std::vector<Fingerprint> fps;
  for (const auto& s : ds.compounds) fps.push_back(ecfp(parse_smiles(s), 2, n_bits));
  return fps;
}

SplitOutcome audit_split(const RunConfig& cfg, const PreparedData& data, const FoldAssignment& folds) {
  SplitOutcome out;
  out.folds = folds;
  const auto refs = refs_of(data.samples);
  std::vector<std::size_t> groups;
  switch (folds.scheme) {
    case SplitScheme::Warm: {
      const WarmAudit w = audit_warm(refs, folds);
      out.audit_ok = w.ok();
      if (!w.ok())
        out.audit_detail = std::to_string(w.compounds.size()) + " compound(s) and " +
                           std::to_string(w.proteins.size()) + " protein(s) in fewer than 2 folds";
      return out;
    }
    case SplitScheme::ColdDrug:
      for (const auto& r : refs) groups.push_back(r.compound);
      break;
    case SplitScheme::ColdTarget:
      for (const auto& r : refs) groups.push_back(r.protein);
      break;
    case SplitScheme::ColdCluster: {
      const auto clusters = cluster_compounds(clustering_fingerprints(data.dataset), cfg.number("split.cluster_threshold"));
      for (const auto& r : refs) groups.push_back(clusters[r.compound]);
      break;
    }
    case SplitScheme::Random: return out;
  }
  const auto leaks = leaking_groups(groups, folds);
  out.audit_ok = leaks.empty();
  if (!leaks.empty()) out.audit_detail = std::to_string(leaks.size()) + " group(s) span folds";
  return out;
}

SplitOutcome make_split(const RunConfig& cfg, const PreparedData& data, SplitScheme scheme, std::size_t k,
                        std::uint64_t seed) {
  const auto refs = refs_of(data.samples);
  FoldAssignment folds;
  switch (scheme) {
    case SplitScheme::Warm: folds = warm_split(refs, k, seed); break;
    case SplitScheme::ColdDrug: folds = cold_entity_split(refs, k, seed, Axis::Drug); break;
    case SplitScheme::ColdTarget: folds = cold_entity_split(refs, k, seed, Axis::Target); break;
    case SplitScheme::ColdCluster: {
      const auto clusters = cluster_compounds(clustering_fingerprints(data.dataset), cfg.number("split.cluster_threshold"));
      folds = cold_cluster_split(refs, clusters, k, seed);
      break;
    }
    case SplitScheme::Random: folds = random_split(refs.size(), k, seed); break;
  }
  return audit_split(cfg, data, folds);
}

std::string folds_csv(const PreparedData& data, const FoldAssignment& folds) {
  std::string out = "pair_index,smiles,protein_id,fold\n";
  for (std::size_t i = 0; i < folds.fold.size(); ++i) {
    const auto& s = data.samples.at(i);
    out += std::to_string(i) + "," + data.dataset.compounds[s.compound] + "," + data.dataset.proteins[s.protein].id +
           "," + std::to_string(folds.fold[i]) + "\n";
  }
  return out;
}

FoldAssignment parse_folds_csv(std::string_view text, const PreparedData& data, SplitScheme scheme) {
  const auto lines = io::split(text, '\n');
  if (lines.empty() || lines[0] != "pair_index,smiles,protein_id,fold") throw FormatError("fold file: bad header");
  FoldAssignment a;
  a.scheme = scheme;
  a.fold.assign(data.samples.size(), SIZE_MAX);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto f = io::split_csv(lines[n]);
    const auto where = "fold file line " + std::to_string(n + 1) + ": ";
    if (f.size() != 4) throw FormatError(where + "expected 4 fields");
    const std::size_t i = std::stoull(f[0]);
    if (i >= data.samples.size()) throw FormatError(where + "pair index out of range");
    const auto& s = data.samples[i];
    if (data.dataset.compounds[s.compound] != f[1] || data.dataset.proteins[s.protein].id != f[2])
      throw FormatError(where + "pair does not match the dataset");
    a.fold[i] = std::stoull(f[3]);
    a.k = std::max(a.k, a.fold[i] + 1);
  }
  for (auto f : a.fold)
    if (f == SIZE_MAX) throw FormatError("fold file does not cover every pair");
  return a;
}

FeaturizeOutput run_featurize(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
  RunDirLock lock(out_dir);
  const PreparedData data = prepare_data(cfg, data_dir);
  const ModelConfig mc = model_config_for(cfg, data.dataset);
  FeaturizeOutput out;
  out.summary = data.summary;
  if (uses_graph(mc.variant)) {
    std::vector<GraphFeatureRecord> recs;
    for (const auto& s : data.dataset.compounds) {
      const MolGraph g = parse_smiles(s);
      GraphFeatureRecord r;
      r.features = atom_features(g, mc.atom_layout);
      for (const auto& nb : g.adjacency) r.adjacency.emplace_back(nb.begin(), nb.end());
      recs.push_back(std::move(r));
    }
    out.files.push_back(out_dir / "compounds.pgft");
    write_graph_features(out.files.back(), recs);
    std::string ids = "index,smiles\n";
    for (std::size_t i = 0; i < data.dataset.compounds.size(); ++i)
      ids += std::to_string(i) + "," + data.dataset.compounds[i] + "\n";
    out.files.push_back(out_dir / "compounds_index.csv");
    io::write_text(out.files.back(), ids);
  } else {
    std::string text = "smiles,ecfp\n";
    for (const auto& s : data.dataset.compounds)
      text += s + "," + ecfp(parse_smiles(s), mc.ecfp_radius, mc.ecfp_bits).to_hex() + "\n";
    out.files.push_back(out_dir / "compounds.csv");
    io::write_text(out.files.back(), text);
  }
  DescriptorTable table;
  for (const auto& p : data.dataset.proteins) {
    table.ids.push_back(p.id);
    table.descriptors.push_back(psc(p.sequence, p.phosphorylated));
  }
  out.files.push_back(out_dir / "proteins.pscd");
  write_descriptor_table(out.files.back(), table);
  return out;
}

fs::path run_split(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir, SplitScheme scheme,
                   std::size_t k, std::uint64_t seed) {
  RunDirLock lock(out_dir);
  const PreparedData data = prepare_data(cfg, data_dir);
  const SplitOutcome s = make_split(cfg, data, scheme, k, seed);
  if (!s.audit_ok) throw DataError("split audit failed: " + s.audit_detail);
  const fs::path path = out_dir / ("folds_" + std::string(scheme_name(scheme)) + ".csv");
  io::write_text(path, folds_csv(data, s.folds));
  return path;
}

TrainOutput run_train(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
  RunDirLock lock(out_dir);
  const PreparedData data = prepare_data(cfg, data_dir);
  const ModelConfig mc = model_config_for(cfg, data.dataset);
  const FeatureStore store = feature_store_for(mc, data.dataset);
  std::vector<std::size_t> all(data.samples.size());
  std::iota(all.begin(), all.end(), 0);
  const auto [tr, val] = inner_split(all, derive_seed(cfg.seed(), 11));
  const auto train_set = oversample(pick(data.samples, tr), cfg.number("data.oversample_ratio"), derive_seed(cfg.seed(), 12));
  const auto val_set = pick(data.samples, val);
  Model model(mc);
  TrainOutput out;
  out.result = train(model, store, train_set, val_set, cfg.train_config());
  if (!val_set.empty()) out.validation = composite_score(model, store, val_set);
  out.checkpoint = out_dir / "model.ckpt";
  save_checkpoint(out.checkpoint, model, out.result.adam, cfg.to_text());
  out.history = out_dir / "history.csv";
  io::write_text(out.history, history_csv(out.result.history));
  cfg.save(out_dir / "config.cfg");
  return out;
}

namespace {

struct InputRow {
  std::string smiles;
  std::string protein;
  std::size_t task = 0;
  std::optional<double> value;  // transformed
};

std::vector<InputRow> read_pair_rows(const fs::path& path, std::optional<std::pair<double, double>> remap) {
  const auto lines = io::read_lines(path);
  if (lines.empty()) throw DataError(path.string() + ": empty file");
  const auto header = io::split_csv(lines[0]);
  const bool has_task = header.size() >= 3 && header[2] == "task_id";
  if (header.size() < 2 || header[0] != "smiles" || header[1] != "protein_id")
    throw DataError(path.string() + ": header must start with `smiles,protein_id`");
  std::vector<InputRow> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (io::trim(lines[n]).empty()) continue;
    const auto f = io::split_csv(lines[n]);
    if (f.size() < 2 || f[0].empty() || f[1].empty())
      throw DataError(path.string() + ":" + std::to_string(n + 1) + ": malformed row");
    InputRow r{f[0], f[1], 0, std::nullopt};
    if (has_task && f.size() >= 3) {
      const auto t = parse_number(f[2]);
      if (!t || *t < 0 || *t != std::floor(*t))
        throw DataError(path.string() + ":" + std::to_string(n + 1) + ": task_id must be a non-negative integer");
      r.task = static_cast<std::size_t>(*t);
    }
    if (header.size() >= 4 && header[3] == "value" && f.size() >= 4) {
      if (auto v = parse_number(f[3]); v && *v > 0.0) {
        double raw = *v;
        if (remap && raw == remap->first) raw = remap->second;
        r.value = transform_value(raw);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::size_t run_predict(const fs::path& checkpoint, const fs::path& input, const fs::path& output,
                        const PredictOptions& options) {
  Checkpoint ck = load_checkpoint(checkpoint);
  const RunConfig run_cfg = RunConfig::parse(ck.run_config);
  const auto remap = remap_of(run_cfg);
  const ModelConfig& mc = ck.model.config();
  const auto rows = read_pair_rows(input, remap);

  std::vector<std::string> smiles;
  std::map<std::string, std::size_t> cidx, pidx;
  std::vector<ProteinEntry> proteins;
  std::map<std::string, ProteinEntry> known;
  if (uses_protein(mc.variant))
    for (auto& e : read_sequence_file(options.sequences)) known.emplace(e.id, e);
  std::vector<PairRef> refs;
  for (const auto& r : rows) {
    if (r.task >= mc.n_tasks)
      throw DataError("task " + std::to_string(r.task) + " is outside the model's " + std::to_string(mc.n_tasks) + " task(s)");
    auto [ci, cnew] = cidx.emplace(r.smiles, smiles.size());
    if (cnew) smiles.push_back(r.smiles);
    auto [pi, pnew] = pidx.emplace(r.protein, proteins.size());
    if (pnew) {
      if (uses_protein(mc.variant)) {
        auto it = known.find(r.protein);
        if (it == known.end()) throw DataError("protein '" + r.protein + "' has no sequence in " + options.sequences.string());
        proteins.push_back(it->second);
      } else {
        proteins.push_back({r.protein, false, {}});
      }
    }
    refs.push_back({ci->second, pi->second});
  }
  const FeatureStore store = FeatureStore::build(mc, smiles, proteins);
  const Tensor pred = ck.model.predict(store, refs);

  std::optional<TaskAD> ad;
  if (options.ad_from) {
    std::vector<std::size_t> tasks;
    std::vector<double> values;
    for (const auto& r : read_pair_rows(*options.ad_from, remap))
      if (r.value) {
        tasks.push_back(r.task);
        values.push_back(*r.value);
      }
    for (auto t : tasks)
      if (t >= mc.n_tasks) throw DataError("applicability domain data has task ids beyond the model's tasks");
    ad = fit_task_ad(tasks, values, mc.n_tasks);
  }

  std::string out = "smiles,protein_id,task_id,value,prediction";
  if (ad) out += ",in_ad,ad_scope";
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double p = pred.at(i, r.task);
    out += r.smiles + "," + r.protein + "," + std::to_string(r.task) + "," + (r.value ? io::format_double(*r.value) : "") +
           "," + io::format_double(p);
    if (ad) {
      if (ad->fitted[r.task])
        out += std::string(",") + (ad->ranges[r.task].contains(p) ? "1" : "0") + ",task";
      else
        out += ",,none";
    }
    out += "\n";
  }
  io::write_text(output, out);
  return rows.size();
}

EvalReport run_evaluate(const fs::path& predictions, const fs::path& report_out) {
  const auto lines = io::read_lines(predictions);
  if (lines.empty()) throw DataError(predictions.string() + ": empty file");
  const auto header = io::split_csv(lines[0]);
  if (header.size() < 5 || header[2] != "task_id" || header[3] != "value" || header[4] != "prediction")
    throw DataError(predictions.string() + ": expected prediction columns smiles,protein_id,task_id,value,prediction");
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> per;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto f = io::split_csv(lines[n]);
    if (f.size() < 5) throw DataError(predictions.string() + ":" + std::to_string(n + 1) + ": malformed row");
    const auto task = parse_number(f[2]);
    const auto y = parse_number(f[3]);
    const auto p = parse_number(f[4]);
    if (!task || !p) throw DataError(predictions.string() + ":" + std::to_string(n + 1) + ": malformed row");
    if (!y) continue;
    auto& slot = per[static_cast<std::size_t>(*task)];
    slot.first.push_back(*y);
    slot.second.push_back(*p);
  }
  if (per.empty()) throw DataError(predictions.string() + ": no rows with true values");
  EvalReport r;
  const std::size_t n_tasks = per.rbegin()->first + 1;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    auto it = per.find(t);
    if (it == per.end())
      r.tasks.push_back(task_metrics("task" + std::to_string(t), {}, {}));
    else
      r.tasks.push_back(task_metrics("task" + std::to_string(t), it->second.first, it->second.second));
  }
  r.aggregate = aggregate(r.tasks);
  io::write_text(report_out, report_csv(r));
  return r;
}

std::string cv_report_csv(const std::vector<CvRow>& rows, std::size_t repetitions) {
  std::string out = "scheme,repetition,fold,n,rmse,r2,ci,leakage_ok\n";
  for (const auto& r : rows) {
    const auto& a = r.report.aggregate;
    out += r.scheme + "," + std::to_string(r.repetition) + "," + std::to_string(r.fold) + "," + std::to_string(a.n) +
           "," + fmt(a.rmse) + "," + fmt(a.r2) + "," + fmt(a.ci) + "," + (r.leakage_ok ? "1" : "0") + "\n";
  }
  if (rows.empty()) return out;
  // Mean over all folds. The spread is over repetition means when there are
  // several repetitions, otherwise over folds.
  auto metric = [&](auto field) {
    std::vector<std::pair<std::size_t, double>> v;
    for (const auto& r : rows)
      if (auto x = r.report.aggregate.*field) v.emplace_back(r.repetition, *x);
    std::optional<double> mean, sd;
    if (v.empty()) return std::pair{mean, sd};
    double s = 0;
    for (auto& [rep, x] : v) s += x;
    mean = s / static_cast<double>(v.size());
    std::vector<double> units;
    if (repetitions > 1) {
      std::map<std::size_t, std::pair<double, std::size_t>> by_rep;
      for (auto& [rep, x] : v) {
        by_rep[rep].first += x;
        ++by_rep[rep].second;
      }
      for (auto& [rep, acc] : by_rep) units.push_back(acc.first / static_cast<double>(acc.second));
    } else {
      for (auto& [rep, x] : v) units.push_back(x);
    }
    if (units.size() > 1) {
      const double m = std::accumulate(units.begin(), units.end(), 0.0) / static_cast<double>(units.size());
      double ss = 0;
      for (double u : units) ss += (u - m) * (u - m);
      sd = std::sqrt(ss / static_cast<double>(units.size() - 1));
    }
    return std::pair{mean, sd};
  };
  const auto rm = metric(&AggregateMetrics::rmse);
  const auto r2m = metric(&AggregateMetrics::r2);
  const auto cim = metric(&AggregateMetrics::ci);
  std::size_t n = 0;
  bool leak_ok = true;
  for (const auto& r : rows) {
    n += r.report.aggregate.n;
    leak_ok = leak_ok && r.leakage_ok;
  }
  const std::string& scheme = rows.front().scheme;
  const std::string ok = leak_ok ? "1" : "0";
  out += scheme + ",mean,," + std::to_string(n) + "," + fmt(rm.first) + "," + fmt(r2m.first) + "," + fmt(cim.first) +
         "," + ok + "\n";
  out += scheme + ",std,," + std::to_string(n) + "," + fmt(rm.second) + "," + fmt(r2m.second) + "," +
         fmt(cim.second) + "," + ok + "\n";
  return out;
}

CvOutput run_cv(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
  RunDirLock lock(out_dir);
  const PreparedData data = prepare_data(cfg, data_dir);
  const ModelConfig base_mc = model_config_for(cfg, data.dataset);
  const FeatureStore store = feature_store_for(base_mc, data.dataset);
  const SplitScheme scheme = parse_scheme(cfg.get("split.scheme"));
  const std::size_t k = cfg.count("split.k");
  const std::size_t reps = cfg.count("split.repetitions");
  if (reps == 0) throw ConfigError("split.repetitions must be at least 1");
  const TrainConfig tc = cfg.train_config();
  CvOutput out;
  out.report = out_dir / "cv_report.csv";
  cfg.save(out_dir / "config.cfg");
  for (std::size_t r = 0; r < reps; ++r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed(), 100 + r);
    const SplitOutcome split = make_split(cfg, data, scheme, k, rep_seed);
    io::write_text(out_dir / ("folds_rep" + std::to_string(r) + ".csv"), folds_csv(data, split.folds));
    for (std::size_t f = 0; f < k; ++f) {
      const auto [tr, val] = inner_split(split.folds.complement(f), derive_seed(rep_seed, 200 + f));
      const auto train_set = oversample(pick(data.samples, tr), cfg.number("data.oversample_ratio"), derive_seed(rep_seed, 300 + f));
      const auto val_set = pick(data.samples, val);
      const auto test_set = pick(data.samples, split.folds.members(f));
      ModelConfig mc = base_mc;
      mc.seed = derive_seed(rep_seed, 400 + f);
      Model model(mc);
      TrainConfig fold_tc = tc;
      fold_tc.seed = derive_seed(rep_seed, 500 + f);
      const TrainResult res = train(model, store, train_set, val_set, fold_tc);
      save_checkpoint(out_dir / ("model_rep" + std::to_string(r) + "_fold" + std::to_string(f) + ".ckpt"), model,
                      res.adam, cfg.to_text());
      CvRow row;
      row.scheme = std::string(scheme_name(scheme));
      row.repetition = r;
      row.fold = f;
      row.report = evaluate(model, store, test_set, data.dataset.task_names);
      row.leakage_ok = split.audit_ok;
      out.rows.push_back(std::move(row));
      io::write_text(out.report, cv_report_csv(out.rows, reps));
      log_info("cv " + out.rows.back().scheme + " rep " + std::to_string(r) + " fold " + std::to_string(f) +
               ": rmse " + fmt(out.rows.back().report.aggregate.rmse));
    }
  }
  return out;
}

RunConfig apply_point(const RunConfig& base, const SearchSpace& space, const Point& p) {
  RunConfig c = base;
  std::optional<std::size_t> layers, width;
  std::optional<std::string> rate;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& name = space.dims()[i].name;
    const auto& v = p.values.at(i);
    if (name == "model.n_layers")
      layers = std::stoull(v);
    else if (name == "model.layer_width")
      width = std::stoull(v);
    else if (name == "model.dropout_rate")
      rate = v;
    else
      c.set(name, v);
  }
  if (layers || width) {
    const auto current = c.counts("model.hidden_layers");
    const std::size_t n = layers.value_or(current.size());
    const std::size_t w = width.value_or(current.front());
    std::string text;
    for (std::size_t i = 0; i < n; ++i) text += (i ? "," : "") + std::to_string(w);
    c.set("model.hidden_layers", text);
    if (!rate && c.numbers("model.dropout").size() != n) rate = io::format_double(c.numbers("model.dropout").front());
  }
  if (rate) c.set("model.dropout", *rate);
  return c;
}

double composite_objective(const RunConfig& cfg, const PreparedData& data, const HoldoutSplit& holdout) {
  const ModelConfig mc = model_config_for(cfg, data.dataset);
  const FeatureStore store = feature_store_for(mc, data.dataset);
  const auto train_set =
      oversample(pick(data.samples, holdout.train), cfg.number("data.oversample_ratio"), derive_seed(cfg.seed(), 12));
  const auto val_set = pick(data.samples, holdout.validation);
  Model model(mc);
  train(model, store, train_set, val_set, cfg.train_config());
  return composite_score(model, store, val_set).value;
}

TuneOutput run_tune(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir, const SearchSpace& space) {
  RunDirLock lock(out_dir);
  const PreparedData data = prepare_data(cfg, data_dir);
  const HoldoutSplit holdout = hyperopt_holdout(data.samples.size(), cfg.count("split.k"), derive_seed(cfg.seed(), 21));
  for (const auto& d : space.dims())
    if (!cfg.has_key(d.name) && d.name != "model.n_layers" && d.name != "model.layer_width" &&
        d.name != "model.dropout_rate")
      throw ConfigError("search space dimension '" + d.name + "' is not a config key");
  const Objective objective = [&](const Point& p) { return composite_objective(apply_point(cfg, space, p), data, holdout); };
  TuneOutput out;
  const std::size_t budget = cfg.count("tune.budget");
  if (cfg.get("tune.strategy") == "random")
    out.result = random_search(space, objective, budget, cfg.seed());
  else
    out.result = gp_ei_search(space, objective, budget, cfg.seed(),
                              {cfg.count("tune.n_init"), cfg.count("tune.candidates")});
  out.trials = out_dir / "trials.csv";
  io::write_text(out.trials, trial_log_csv(space, out.result));
  if (!out.result.best) throw NumericError("every tuning trial failed; see " + out.trials.string());
  out.best_config = out_dir / "best.cfg";
  apply_point(cfg, space, out.result.best_trial().point).save(out.best_config);
  return out;
}

RunConfig smoke_config(std::uint64_t seed) {
  RunConfig c;
  c.set("model.hidden_layers", "64");
  c.set("model.dropout", "0.1");
  c.set("model.ecfp_bits", "1024");
  c.set("train.max_epochs", "40");
  c.set("train.patience", "5");
  c.set("train.batch_size", "32");
  c.set("train.learning_rate", "0.003");
  c.set("split.k", "5");
  c.set("split.repetitions", "1");
  c.set("run.seed", std::to_string(seed));
  return c;
}

SmokeOutput run_smoke(const fs::path& data_dir, const fs::path& out_dir, std::uint64_t seed) {
  SmokeOutput out;
  const RunConfig cfg = smoke_config(seed);
  fs::create_directories(out_dir);
  auto stage = [&](const std::string& name, auto&& fn) {
    if (!out.stages.empty() && !out.stages.back().ok) return;
    SmokeStage s{name, false, {}};
    try {
      s.detail = fn();
      s.ok = true;
    } catch (const std::exception& e) {
      s.detail = e.what();
    }
    log(s.ok ? LogLevel::Info : LogLevel::Error, "smoke " + name + ": " + (s.ok ? "ok" : "FAILED") +
                                                     (s.detail.empty() ? "" : " (" + s.detail + ")"));
    out.stages.push_back(std::move(s));
  };
  auto require_same = [](const std::string& a, const std::string& b, const std::string& what) {
    if (a != b) throw Error(what + " does not round-trip");
  };

  PreparedData data;
  stage("ingest", [&] {
    data = prepare_data(cfg, data_dir);
    return std::to_string(data.summary.n_compounds) + " compounds, " + std::to_string(data.summary.n_proteins) +
           " proteins, " + std::to_string(data.summary.n_pairs) + " records";
  });
  stage("featurize", [&] {
    const fs::path dir = out_dir / "features";
    const auto f = run_featurize(cfg, data_dir, dir);
    const DescriptorTable t = read_descriptor_table(dir / "proteins.pscd");
    write_descriptor_table(dir / "proteins.copy.pscd", t);
    require_same(io::read_text(dir / "proteins.pscd"), io::read_text(dir / "proteins.copy.pscd"), "descriptor table");
    for (const auto& line : io::read_lines(dir / "compounds.csv")) {
      const auto parts = io::split_csv(line);
      if (parts.size() == 2 && parts[0] != "smiles") require_same(Fingerprint::from_hex(parts[1]).to_hex(), parts[1], "fingerprint");
    }
    return std::to_string(f.files.size()) + " files";
  });
  for (auto scheme : {SplitScheme::Warm, SplitScheme::ColdDrug, SplitScheme::ColdTarget, SplitScheme::ColdCluster}) {
    stage("split:" + std::string(scheme_name(scheme)), [&] {
      const SplitOutcome s = make_split(cfg, data, scheme, cfg.count("split.k"), seed);
      if (!s.audit_ok) throw Error("audit failed: " + s.audit_detail);
      const std::string text = folds_csv(data, s.folds);
      io::write_text(out_dir / ("folds_" + std::string(scheme_name(scheme)) + ".csv"), text);
      require_same(folds_csv(data, parse_folds_csv(text, data, scheme)), text, "fold file");
      return std::string("audit ok");
    });
  }
  TrainOutput trained;
  stage("train", [&] {
    trained = run_train(cfg, data_dir, out_dir / "train");
    const auto bytes = io::read_bytes(trained.checkpoint);
    const Checkpoint ck = decode_checkpoint(bytes);
    if (encode_checkpoint(ck.model, ck.adam, ck.run_config) != bytes) throw Error("checkpoint does not round-trip");
    return std::to_string(trained.result.history.size()) + " epochs";
  });
  stage("predict", [&] {
    PredictOptions po;
    po.sequences = data_dir / cfg.get("data.sequences");
    po.ad_from = data_dir / cfg.get("data.interactions");
    const auto n = run_predict(trained.checkpoint, data_dir / cfg.get("data.interactions"), out_dir / "predictions.csv", po);
    return std::to_string(n) + " rows";
  });
  stage("evaluate", [&] {
    const EvalReport r = run_evaluate(out_dir / "predictions.csv", out_dir / "report.csv");
    const std::string text = io::read_text(out_dir / "report.csv");
    require_same(report_csv(parse_report_csv(text)), text, "report");
    return "rmse " + fmt(r.aggregate.rmse) + ", ci " + fmt(r.aggregate.ci);
  });
  for (auto scheme : {SplitScheme::Warm, SplitScheme::ColdDrug, SplitScheme::ColdTarget, SplitScheme::ColdCluster}) {
    stage("cv:" + std::string(scheme_name(scheme)), [&] {
      RunConfig c = cfg;
      c.set("split.scheme", std::string(scheme_name(scheme)));
      const CvOutput cv = run_cv(c, data_dir, out_dir / ("cv_" + std::string(scheme_name(scheme))));
      for (const auto& row : cv.rows)
        if (!row.leakage_ok) throw Error("leakage audit failed");
      require_same(io::read_text(cv.report), cv_report_csv(cv.rows, 1), "cv report");
      return std::to_string(cv.rows.size()) + " folds";
    });
  }
  out.ok = !out.stages.empty() && std::all_of(out.stages.begin(), out.stages.end(), [](auto& s) { return s.ok; });
  return out;
}

}  // namespace padme
