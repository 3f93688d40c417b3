#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "padme/protein.hpp"
#include "padme/sample.hpp"

namespace padme {

struct InteractionRecord {
  std::size_t compound = 0;  // index into Dataset::compounds
  std::size_t protein = 0;   // index into Dataset::proteins
  std::size_t task = 0;
  double raw = 0.0;
  double value = 0.0;  // transformed response
};

struct Dataset {
  std::vector<std::string> compounds;  // SMILES, used as the compound id
  std::vector<ProteinEntry> proteins;
  std::size_t n_tasks = 1;
  std::vector<std::string> task_names;
  std::vector<InteractionRecord> records;
};

struct DatasetSummary {
  std::size_t n_compounds = 0;
  std::size_t n_proteins = 0;
  std::size_t n_pairs = 0;
  std::size_t n_tasks = 0;
  std::vector<std::size_t> task_counts;
};

struct LoadOptions {
  std::size_t malformed_tolerance = 0;
  std::optional<std::filesystem::path> assay_map;
};

struct LoadReport {
  std::size_t rows = 0;
  std::size_t discarded_imprecise = 0;
  std::size_t malformed = 0;
  std::vector<std::string> diagnostics;
};

// Interaction CSV with header `smiles,protein_id,task_id,value`. Proteins are
// looked up in the sequence file; only referenced proteins are kept. With an
// assay map, task_id holds an assay id mapped through `assay_id <TAB> task_id`.
Dataset load_interactions(const std::filesystem::path& interactions, const std::filesystem::path& sequences,
                          const LoadOptions& options = {}, LoadReport* report = nullptr);

// Rows: (assay id, task index).
std::vector<std::pair<std::string, std::size_t>> read_assay_map(const std::filesystem::path& path);

// Writes records with their raw values in the loader's format.
void write_interactions(const std::filesystem::path& path, const Dataset& ds);

DatasetSummary summarize(const Dataset& ds);

double transform_value(double raw);
double inverse_transform(double transformed);

// Exact-match remap (from -> to) first, then 4 - log10(raw). Throws DataError
// on a non-positive raw value.
void transform_values(std::span<InteractionRecord> records, std::optional<std::pair<double, double>> remap = {});

// Averages duplicate (compound, protein, task) records. Output is sorted by
// (compound, protein, task).
std::vector<InteractionRecord> merge_duplicates(std::span<const InteractionRecord> records);

// Repeatedly drops records of compounds and proteins with at most min_obs
// observations until nothing changes.
std::vector<InteractionRecord> filter_sparse(std::vector<InteractionRecord> records, std::size_t min_obs);

// Drops unreferenced compounds and proteins and renumbers the records.
Dataset compact(Dataset ds);

// One sample per (compound, protein) pair, ordered by (compound, protein).
// Unobserved tasks have mask 0 and target 0.
std::vector<PairSample> assemble_pairs(std::span<const InteractionRecord> records, std::size_t n_tasks);

// Replicates samples carrying any observed value other than the most common
// observed value until they make up at least `ratio` times the count of the
// remaining samples. Copies are appended in seeded order. ratio <= 0 is a
// no-op.
std::vector<PairSample> oversample(std::vector<PairSample> samples, double ratio, std::uint64_t seed);

}  // namespace padme
