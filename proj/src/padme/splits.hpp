#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "padme/fingerprint.hpp"
#include "padme/sample.hpp"

namespace padme {

enum class SplitScheme { Warm, ColdDrug, ColdTarget, ColdCluster, Random };

std::string_view scheme_name(SplitScheme s);
SplitScheme parse_scheme(std::string_view name);

struct FoldAssignment {
  std::size_t k = 0;
  SplitScheme scheme = SplitScheme::Random;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold;  // per record

  std::vector<std::size_t> members(std::size_t f) const;
  std::vector<std::size_t> complement(std::size_t f) const;
  std::vector<std::size_t> sizes() const;
};

FoldAssignment random_split(std::size_t n, std::size_t k, std::uint64_t seed);

// Every compound and protein ends up in at least two folds and fold sizes stay
// within 20% of n/k. Throws DataError naming an entity with fewer than two
// observations, or when the constraints cannot be met.
FoldAssignment warm_split(std::span<const PairRef> pairs, std::size_t k, std::uint64_t seed);

enum class Axis { Drug, Target };

// Entities on the axis are shuffled and dealt round-robin to folds.
FoldAssignment cold_entity_split(std::span<const PairRef> pairs, std::size_t k, std::uint64_t seed, Axis axis);

// Connected components of the graph linking compounds with tanimoto > tau.
// Cluster ids are numbered by first member.
std::vector<std::size_t> cluster_compounds(std::span<const Fingerprint> fps, double tau = 0.7);

// Clusters (by record count, largest first, equal sizes in seeded order) go
// to the currently lightest fold.
FoldAssignment cold_cluster_split(std::span<const PairRef> pairs, std::span<const std::size_t> cluster_of_compound,
                                  std::size_t k, std::uint64_t seed);

// Groups (one id per record) that appear in more than one fold.
std::vector<std::size_t> leaking_groups(std::span<const std::size_t> group_of_record, const FoldAssignment& a);

// Compounds and proteins with records in fewer than two folds.
struct WarmAudit {
  std::vector<std::size_t> compounds;
  std::vector<std::size_t> proteins;
  bool ok() const { return compounds.empty() && proteins.empty(); }
};
WarmAudit audit_warm(std::span<const PairRef> pairs, const FoldAssignment& a);

// Random 90/10 split for hyperparameter search, plus the CV geometry in which
// validation folds leave out the holdout while training folds keep it.
struct HoldoutSplit {
  std::vector<std::size_t> train;       // 90%
  std::vector<std::size_t> validation;  // 10%
  std::vector<bool> is_holdout;
  FoldAssignment folds;

  std::vector<std::size_t> train_view(std::size_t f) const;
  std::vector<std::size_t> validation_view(std::size_t f) const;
};
HoldoutSplit hyperopt_holdout(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace padme
