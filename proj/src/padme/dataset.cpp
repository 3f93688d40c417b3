#include "padme/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/log.hpp"
#include "padme/rng.hpp"
#include "padme/smiles.hpp"

namespace padme {

namespace {

std::optional<double> parse_value(std::string_view s) {
  if (s.empty() || s.front() == '>' || s.front() == '<' || s.front() == '~') return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::vector<std::pair<std::string, std::size_t>> read_assay_map(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::size_t>> out;
  const auto lines = io::read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = io::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(line, '\t');
    const auto task = fields.size() == 2 ? parse_index(io::trim(fields[1])) : std::nullopt;
    if (!task) throw DataError(path.string() + ":" + std::to_string(n + 1) + ": expected `assay_id<TAB>task_id`");
    out.emplace_back(std::string(io::trim(fields[0])), *task);
  }
  return out;
}

Dataset load_interactions(const std::filesystem::path& interactions, const std::filesystem::path& sequences,
                          const LoadOptions& options, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = {};

  std::unordered_map<std::string, std::size_t> assay_task;
  std::size_t mapped_tasks = 0;
  if (options.assay_map) {
    for (auto& [assay, task] : read_assay_map(*options.assay_map)) {
      if (!assay_task.emplace(assay, task).second)
        throw DataError(options.assay_map->string() + ": duplicate assay id '" + assay + "'");
      mapped_tasks = std::max(mapped_tasks, task + 1);
    }
  }

  std::unordered_map<std::string, std::size_t> protein_row;
  const auto entries = read_sequence_file(sequences);
  for (std::size_t i = 0; i < entries.size(); ++i) protein_row.emplace(entries[i].id, i);

  const auto lines = io::read_lines(interactions);
  if (lines.empty() || io::split_csv(lines.front()) != std::vector<std::string>{"smiles", "protein_id", "task_id", "value"})
    throw DataError(interactions.string() + ": header must be `smiles,protein_id,task_id,value`");

  Dataset ds;
  std::unordered_map<std::string, std::size_t> compound_index;
  std::unordered_map<std::string, std::size_t> protein_index;
  std::size_t max_task = 0;

  auto malformed = [&](std::size_t line_no, const std::string& why) {
    ++rep.malformed;
    rep.diagnostics.push_back(interactions.string() + ":" + std::to_string(line_no) + ": " + why);
  };

  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (io::trim(lines[n]).empty()) continue;
    ++rep.rows;
    const std::size_t line_no = n + 1;
    const auto f = io::split_csv(lines[n]);
    if (f.size() != 4) {
      malformed(line_no, "expected 4 fields, found " + std::to_string(f.size()));
      continue;
    }
    const auto& smiles = f[0];
    const auto& pid = f[1];
    if (smiles.empty() || pid.empty()) {
      malformed(line_no, "empty smiles or protein_id");
      continue;
    }
    std::size_t task = 0;
    if (options.assay_map) {
      auto it = assay_task.find(f[2]);
      if (it == assay_task.end()) {
        malformed(line_no, "assay '" + f[2] + "' is not in the assay map");
        continue;
      }
      task = it->second;
    } else if (auto t = parse_index(f[2])) {
      task = *t;
    } else {
      malformed(line_no, "task_id '" + f[2] + "' is not a non-negative integer");
      continue;
    }
    const auto value = parse_value(f[3]);
    if (!value) {
      ++rep.discarded_imprecise;
      continue;
    }
    auto cit = compound_index.find(smiles);
    if (cit == compound_index.end()) {
      try {
        parse_smiles(smiles);
      } catch (const SmilesError& e) {
        malformed(line_no, "invalid SMILES '" + smiles + "': " + e.what());
        continue;
      }
      cit = compound_index.emplace(smiles, ds.compounds.size()).first;
      ds.compounds.push_back(smiles);
    }
    auto pit = protein_index.find(pid);
    if (pit == protein_index.end()) {
      auto row = protein_row.find(pid);
      if (row == protein_row.end())
        throw DataError(interactions.string() + ":" + std::to_string(line_no) + ": protein '" + pid +
                        "' has no sequence in " + sequences.string());
      const ProteinEntry& e = entries[row->second];
      if (e.sequence.size() < 3) throw DataError("protein '" + pid + "': sequence shorter than 3 residues");
      for (std::size_t i = 0; i < e.sequence.size(); ++i)
        if (residue_index(e.sequence[i]) < 0)
          throw DataError("protein '" + pid + "': non-canonical residue '" + std::string(1, e.sequence[i]) +
                          "' at position " + std::to_string(i + 1));
      pit = protein_index.emplace(pid, ds.proteins.size()).first;
      ds.proteins.push_back(e);
    }
    max_task = std::max(max_task, task);
    ds.records.push_back({cit->second, pit->second, task, *value, *value});
  }

  if (rep.malformed > options.malformed_tolerance)
    throw DataError(std::to_string(rep.malformed) + " malformed row(s) exceed tolerance " +
                    std::to_string(options.malformed_tolerance) + "; first: " + rep.diagnostics.front());
  for (const auto& d : rep.diagnostics) log_warn("skipped " + d);
  if (rep.discarded_imprecise)
    log_info("discarded " + std::to_string(rep.discarded_imprecise) + " imprecise value(s) from " +
             interactions.string());

  ds.n_tasks = options.assay_map ? std::max<std::size_t>(mapped_tasks, 1) : (ds.records.empty() ? 1 : max_task + 1);
  ds.task_names.resize(ds.n_tasks);
  for (std::size_t t = 0; t < ds.n_tasks; ++t) ds.task_names[t] = "task" + std::to_string(t);
  if (options.assay_map) {
    std::vector<std::string> first(ds.n_tasks);
    for (auto& [assay, task] : read_assay_map(*options.assay_map))
      if (first[task].empty()) first[task] = assay;
    for (std::size_t t = 0; t < ds.n_tasks; ++t)
      if (!first[t].empty()) ds.task_names[t] = first[t];
  }
  return ds;
}

void write_interactions(const std::filesystem::path& path, const Dataset& ds) {
  std::string text = "smiles,protein_id,task_id,value\n";
  for (const auto& r : ds.records)
    text += ds.compounds.at(r.compound) + "," + ds.proteins.at(r.protein).id + "," + std::to_string(r.task) + "," +
            io::format_double(r.raw) + "\n";
  io::write_text(path, text);
}

DatasetSummary summarize(const Dataset& ds) {
  DatasetSummary s;
  s.n_tasks = ds.n_tasks;
  s.task_counts.assign(ds.n_tasks, 0);
  std::vector<char> seen_c(ds.compounds.size()), seen_p(ds.proteins.size());
  for (const auto& r : ds.records) {
    seen_c[r.compound] = 1;
    seen_p[r.protein] = 1;
    ++s.task_counts.at(r.task);
  }
  s.n_compounds = static_cast<std::size_t>(std::count(seen_c.begin(), seen_c.end(), 1));
  s.n_proteins = static_cast<std::size_t>(std::count(seen_p.begin(), seen_p.end(), 1));
  s.n_pairs = ds.records.size();
  return s;
}

double transform_value(double raw) {
  if (!(raw > 0.0) || !std::isfinite(raw))
    throw DataError("raw value " + io::format_double(raw) + " must be positive for the log transform");
  return 4.0 - std::log10(raw);
}

double inverse_transform(double transformed) { return std::pow(10.0, 4.0 - transformed); }

void transform_values(std::span<InteractionRecord> records, std::optional<std::pair<double, double>> remap) {
  for (auto& r : records) {
    r.value = transform_value(remap && r.raw == remap->first ? remap->second : r.raw);
  }
}

std::vector<InteractionRecord> merge_duplicates(std::span<const InteractionRecord> records) {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    auto& a = acc[{r.compound, r.protein, r.task}];
    a.first += r.value;
    ++a.second;
  }
  std::vector<InteractionRecord> out;
  out.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    InteractionRecord r;
    std::tie(r.compound, r.protein, r.task) = key;
    r.value = a.first / static_cast<double>(a.second);
    r.raw = inverse_transform(r.value);
    out.push_back(r);
  }
  return out;
}

std::vector<InteractionRecord> filter_sparse(std::vector<InteractionRecord> records, std::size_t min_obs) {
  if (min_obs == 0) return records;
  while (true) {
    std::unordered_map<std::size_t, std::size_t> nc, np;
    for (const auto& r : records) {
      ++nc[r.compound];
      ++np[r.protein];
    }
    const auto before = records.size();
    std::erase_if(records, [&](const InteractionRecord& r) { return nc[r.compound] <= min_obs || np[r.protein] <= min_obs; });
    if (records.size() == before) break;
  }
  if (records.empty()) log_warn("filtering removed every record");
  return records;
}

Dataset compact(Dataset ds) {
  std::vector<std::size_t> cmap(ds.compounds.size(), SIZE_MAX), pmap(ds.proteins.size(), SIZE_MAX);
  std::vector<std::string> compounds;
  std::vector<ProteinEntry> proteins;
  for (auto& r : ds.records) {
    if (cmap[r.compound] == SIZE_MAX) {
      cmap[r.compound] = compounds.size();
      compounds.push_back(ds.compounds[r.compound]);
    }
    if (pmap[r.protein] == SIZE_MAX) {
      pmap[r.protein] = proteins.size();
      proteins.push_back(ds.proteins[r.protein]);
    }
    r.compound = cmap[r.compound];
    r.protein = pmap[r.protein];
  }
  ds.compounds = std::move(compounds);
  ds.proteins = std::move(proteins);
  return ds;
}

std::vector<PairSample> assemble_pairs(std::span<const InteractionRecord> records, std::size_t n_tasks) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  std::vector<PairSample> out;
  for (const auto& r : records) index.emplace(std::pair{r.compound, r.protein}, 0);
  for (auto& [key, slot] : index) {
    slot = out.size();
    out.push_back({key.first, key.second, std::vector<double>(n_tasks, 0.0), std::vector<double>(n_tasks, 0.0)});
  }
  for (const auto& r : records) {
    if (r.task >= n_tasks) throw DataError("task id " + std::to_string(r.task) + " exceeds task count");
    auto& s = out[index[{r.compound, r.protein}]];
    if (s.mask[r.task] != 0.0) throw DataError("duplicate record for one (compound, protein, task); merge first");
    s.target[r.task] = r.value;
    s.mask[r.task] = 1.0;
  }
  return out;
}

std::vector<PairSample> oversample(std::vector<PairSample> samples, double ratio, std::uint64_t seed) {
  if (ratio <= 0.0 || samples.empty()) return samples;
  std::map<double, std::size_t> freq;
  for (const auto& s : samples)
    for (std::size_t t = 0; t < s.mask.size(); ++t)
      if (s.mask[t] != 0.0) ++freq[s.target[t]];
  if (freq.empty()) return samples;
  const double mode = std::max_element(freq.begin(), freq.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t t = 0; t < samples[i].mask.size(); ++t)
      if (samples[i].mask[t] != 0.0 && samples[i].target[t] != mode) {
        minority.push_back(i);
        break;
      }
  const std::size_t majority = samples.size() - minority.size();
  if (minority.empty() || majority == 0) return samples;
  const auto wanted = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(majority)));
  if (wanted <= minority.size()) return samples;
  Rng rng(seed);
  rng.shuffle(minority);
  const std::size_t extra = wanted - minority.size();
  samples.reserve(samples.size() + extra);
  for (std::size_t i = 0; i < extra; ++i) samples.push_back(samples[minority[i % minority.size()]]);
  return samples;
}

}  // namespace padme
