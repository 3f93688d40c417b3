#pragma once

#include <cstdint>
#include <string>

#include "padme/dataset.hpp"
#include "padme/rng.hpp"

namespace padme {

// Valid SMILES assembled from a fixed fragment list.
std::string random_smiles(Rng& rng);
// Analog of a SMILES: the same string with one small terminal group added.
std::string analog_smiles(const std::string& base, Rng& rng);
std::string random_protein(Rng& rng, std::size_t length);

struct SyntheticOptions {
  std::size_t n_compounds = 40;
  std::size_t n_proteins = 10;
  double density = 0.5;  // fraction of (compound, protein) pairs observed
  std::size_t n_tasks = 1;
  double task_density = 1.0;  // per observed pair, fraction of tasks observed
  std::size_t family_size = 1;  // compounds per analog family
  std::size_t min_length = 80;
  std::size_t max_length = 240;
  double noise = 0.1;
  std::uint64_t seed = 1;
};

// Records carry raw values (nM-like) and their transformed values. Every
// compound and protein gets at least two observations when density permits.
Dataset make_synthetic(const SyntheticOptions& options);

}  // namespace padme
