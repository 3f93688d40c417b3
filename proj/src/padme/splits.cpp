#include "padme/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "padme/error.hpp"
#include "padme/parallel.hpp"
#include "padme/rng.hpp"

namespace padme {

std::string_view scheme_name(SplitScheme s) {
  switch (s) {
    case SplitScheme::Warm: return "warm";
    case SplitScheme::ColdDrug: return "cold-drug";
    case SplitScheme::ColdTarget: return "cold-target";
    case SplitScheme::ColdCluster: return "cold-cluster";
    case SplitScheme::Random: return "random";
  }
  return "unknown";
}

SplitScheme parse_scheme(std::string_view name) {
  for (auto s : {SplitScheme::Warm, SplitScheme::ColdDrug, SplitScheme::ColdTarget, SplitScheme::ColdCluster,
                 SplitScheme::Random})
    if (scheme_name(s) == name) return s;
  throw ConfigError("unknown split scheme '" + std::string(name) + "'");
}

std::vector<std::size_t> FoldAssignment::members(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] == f) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] != f) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (auto f : fold) ++out.at(f);
  return out;
}

namespace {

void check_k(std::size_t n, std::size_t k) {
  if (k < 2) throw DataError("cross-validation needs k >= 2");
  if (n < k) throw DataError("cannot split " + std::to_string(n) + " records into " + std::to_string(k) + " folds");
}

}  // namespace

FoldAssignment random_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_k(n, k);
  FoldAssignment a{k, SplitScheme::Random, seed, std::vector<std::size_t>(n)};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  for (std::size_t i = 0; i < n; ++i) a.fold[order[i]] = i % k;
  return a;
}

namespace {

// Fold occupancy counts per entity for the warm split.
struct Occupancy {
  std::vector<std::vector<std::size_t>> count;  // entity -> per-fold records

  Occupancy(std::size_t n, std::size_t k) : count(n, std::vector<std::size_t>(k, 0)) {}
  std::size_t distinct(std::size_t e) const {
    return static_cast<std::size_t>(std::count_if(count[e].begin(), count[e].end(), [](auto c) { return c > 0; }));
  }
  // Distinct folds of e after moving one record from `from` to `to`.
  std::size_t distinct_after(std::size_t e, std::size_t from, std::size_t to) const {
    std::size_t d = distinct(e);
    if (count[e][from] == 1) --d;
    if (count[e][to] == 0) ++d;
    return d;
  }
};

std::optional<FoldAssignment> warm_attempt(std::span<const PairRef> pairs, std::size_t k, std::uint64_t seed,
                                           std::uint64_t shuffle_seed, std::size_t nc, std::size_t np,
                                           std::string& failure);

}  // namespace

FoldAssignment warm_split(std::span<const PairRef> pairs, std::size_t k, std::uint64_t seed) {
  const std::size_t n = pairs.size();
  check_k(n, k);
  std::size_t nc = 0, np = 0;
  for (const auto& p : pairs) {
    nc = std::max(nc, p.compound + 1);
    np = std::max(np, p.protein + 1);
  }
  std::vector<std::size_t> obs_c(nc, 0), obs_p(np, 0);
  for (const auto& p : pairs) {
    ++obs_c[p.compound];
    ++obs_p[p.protein];
  }
  for (std::size_t c = 0; c < nc; ++c)
    if (obs_c[c] == 1) throw DataError("warm split: compound " + std::to_string(c) + " has a single observation");
  for (std::size_t p = 0; p < np; ++p)
    if (obs_p[p] == 1) throw DataError("warm split: protein " + std::to_string(p) + " has a single observation");

  std::string failure;
  for (std::uint64_t attempt = 0; attempt < 32; ++attempt) {
    auto a = warm_attempt(pairs, k, seed, attempt == 0 ? seed : derive_seed(seed, attempt), nc, np, failure);
    if (a) return *a;
  }
  throw DataError("warm split: " + failure);
}

namespace {

std::optional<FoldAssignment> warm_attempt(std::span<const PairRef> pairs, std::size_t k, std::uint64_t seed,
                                           std::uint64_t shuffle_seed, std::size_t nc, std::size_t np,
                                           std::string& failure) {
  const std::size_t n = pairs.size();
  Occupancy occ_c(nc, k), occ_p(np, k);
  std::vector<std::size_t> size(k, 0);
  FoldAssignment a{k, SplitScheme::Warm, seed, std::vector<std::size_t>(n, 0)};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(shuffle_seed);
  rng.shuffle(order);

  auto place = [&](std::size_t i, std::size_t f) {
    a.fold[i] = f;
    ++occ_c.count[pairs[i].compound][f];
    ++occ_p.count[pairs[i].protein][f];
    ++size[f];
  };
  auto move = [&](std::size_t i, std::size_t to) {
    const std::size_t from = a.fold[i];
    --occ_c.count[pairs[i].compound][from];
    --occ_p.count[pairs[i].protein][from];
    --size[from];
    place(i, to);
  };

  for (std::size_t i : order) {
    const auto& p = pairs[i];
    std::size_t best = 0;
    int best_gain = -1;
    for (std::size_t f = 0; f < k; ++f) {
      int gain = 0;
      if (occ_c.distinct(p.compound) < 2 && occ_c.count[p.compound][f] == 0) ++gain;
      if (occ_p.distinct(p.protein) < 2 && occ_p.count[p.protein][f] == 0) ++gain;
      if (gain > best_gain || (gain == best_gain && size[f] < size[best])) {
        best = f;
        best_gain = gain;
      }
    }
    place(i, best);
  }

  // Moving record i to fold g is safe if neither of its entities drops below
  // two folds (or below what it already had).
  auto safe = [&](std::size_t i, std::size_t g) {
    const std::size_t f = a.fold[i];
    const auto& p = pairs[i];
    const std::size_t dc = occ_c.distinct(p.compound), dp = occ_p.distinct(p.protein);
    return occ_c.distinct_after(p.compound, f, g) >= std::min<std::size_t>(dc, 2) &&
           occ_p.distinct_after(p.protein, f, g) >= std::min<std::size_t>(dp, 2);
  };

  std::vector<std::vector<std::size_t>> by_c(nc), by_p(np);
  for (std::size_t i = 0; i < n; ++i) {
    by_c[pairs[i].compound].push_back(i);
    by_p[pairs[i].protein].push_back(i);
  }

  // Repair: for each entity stuck in one fold, move one of its records to the
  // lightest fold where the partner entity stays satisfied.
  auto repair = [&](const Occupancy& occ, const std::vector<std::vector<std::size_t>>& members) {
    bool changed = false;
    for (std::size_t e = 0; e < members.size(); ++e) {
      if (members[e].size() < 2 || occ.distinct(e) >= 2) continue;
      std::size_t best_i = n, best_g = k;
      for (std::size_t i : members[e])
        for (std::size_t g = 0; g < k; ++g) {
          if (g == a.fold[i]) continue;
          if (!safe(i, g)) continue;
          if (best_g == k || size[g] < size[best_g]) {
            best_i = i;
            best_g = g;
          }
        }
      if (best_i < n) {
        move(best_i, best_g);
        changed = true;
      }
    }
    return changed;
  };
  for (int round = 0; round < 8; ++round) {
    const bool a1 = repair(occ_c, by_c);
    const bool a2 = repair(occ_p, by_p);
    if (!a1 && !a2) break;
  }

  // Balance toward n/k within 20%.
  const double target = static_cast<double>(n) / static_cast<double>(k);
  const auto lo = static_cast<std::size_t>(std::ceil(0.8 * target));
  const auto hi = static_cast<std::size_t>(std::floor(1.2 * target));
  for (std::size_t guard = 0; guard < 4 * n; ++guard) {
    const std::size_t big = static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
    const std::size_t small = static_cast<std::size_t>(std::min_element(size.begin(), size.end()) - size.begin());
    if (size[big] <= hi && size[small] >= lo) break;
    if (size[big] - size[small] < 2) break;
    bool moved = false;
    for (std::size_t i = 0; i < n && !moved; ++i)
      if (a.fold[i] == big && safe(i, small)) {
        move(i, small);
        moved = true;
      }
    if (!moved) break;
  }

  const WarmAudit audit = audit_warm(pairs, a);
  if (!audit.ok()) {
    const std::string who = audit.compounds.empty() ? "protein " + std::to_string(audit.proteins.front())
                                                    : "compound " + std::to_string(audit.compounds.front());
    failure = "could not place " + who + " in two folds";
    return std::nullopt;
  }
  for (auto s : size)
    if (s < lo || s > hi) {
      failure = "could not balance fold sizes within 20% of n/k";
      return std::nullopt;
    }
  return a;
}

}  // namespace

FoldAssignment cold_entity_split(std::span<const PairRef> pairs, std::size_t k, std::uint64_t seed, Axis axis) {
  check_k(pairs.size(), k);
  auto entity = [&](const PairRef& p) { return axis == Axis::Drug ? p.compound : p.protein; };
  std::set<std::size_t> distinct;
  for (const auto& p : pairs) distinct.insert(entity(p));
  if (distinct.size() < k)
    throw DataError("cold split: " + std::to_string(distinct.size()) + (axis == Axis::Drug ? " compounds" : " proteins") +
                    " cannot fill " + std::to_string(k) + " folds");
  std::vector<std::size_t> ents(distinct.begin(), distinct.end());
  Rng rng(seed);
  rng.shuffle(ents);
  std::map<std::size_t, std::size_t> fold_of;
  for (std::size_t i = 0; i < ents.size(); ++i) fold_of[ents[i]] = i % k;
  FoldAssignment a{k, axis == Axis::Drug ? SplitScheme::ColdDrug : SplitScheme::ColdTarget, seed, {}};
  a.fold.reserve(pairs.size());
  for (const auto& p : pairs) a.fold.push_back(fold_of[entity(p)]);
  return a;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<std::size_t> cluster_compounds(std::span<const Fingerprint> fps, double tau) {
  const std::size_t n = fps.size();
  std::vector<std::size_t> pop(n);
  for (std::size_t i = 0; i < n; ++i) pop[i] = fps[i].popcount();
  std::vector<std::vector<std::size_t>> edges(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // |a&b|/|a|b| <= min/max, so pairs that cannot exceed tau are skipped.
      const double lo = static_cast<double>(std::min(pop[i], pop[j]));
      const double hi = static_cast<double>(std::max(pop[i], pop[j]));
      if (hi > 0.0 && lo / hi <= tau) continue;
      if (tanimoto(fps[i], fps[j]) > tau) edges[i].push_back(j);
    }
  });
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : edges[i]) uf.unite(i, j);
  std::vector<std::size_t> id(n), label(n, SIZE_MAX);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (label[r] == SIZE_MAX) label[r] = next++;
    id[i] = label[r];
  }
  return id;
}

FoldAssignment cold_cluster_split(std::span<const PairRef> pairs, std::span<const std::size_t> cluster_of_compound,
                                  std::size_t k, std::uint64_t seed) {
  const std::size_t n = pairs.size();
  check_k(n, k);
  std::map<std::size_t, std::size_t> cluster_size;
  for (const auto& p : pairs) {
    if (p.compound >= cluster_of_compound.size()) throw DataError("cold-cluster split: compound without a cluster");
    ++cluster_size[cluster_of_compound[p.compound]];
  }
  if (cluster_size.size() < k)
    throw DataError("cold-cluster split: " + std::to_string(cluster_size.size()) + " clusters cannot fill " +
                    std::to_string(k) + " folds");
  for (const auto& [c, s] : cluster_size)
    if (s * k > n * (k - 1))
      throw DataError("cold-cluster split: cluster " + std::to_string(c) + " holds " + std::to_string(s) + " of " +
                      std::to_string(n) + " records, more than (k-1)/k");
  std::vector<std::size_t> clusters;
  for (const auto& [c, s] : cluster_size) clusters.push_back(c);
  Rng rng(seed);
  rng.shuffle(clusters);
  std::stable_sort(clusters.begin(), clusters.end(),
                   [&](std::size_t a, std::size_t b) { return cluster_size[a] > cluster_size[b]; });
  std::vector<std::size_t> load(k, 0);
  std::map<std::size_t, std::size_t> fold_of;
  for (auto c : clusters) {
    const std::size_t f = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    fold_of[c] = f;
    load[f] += cluster_size[c];
  }
  FoldAssignment a{k, SplitScheme::ColdCluster, seed, {}};
  a.fold.reserve(n);
  for (const auto& p : pairs) a.fold.push_back(fold_of[cluster_of_compound[p.compound]]);
  return a;
}

std::vector<std::size_t> leaking_groups(std::span<const std::size_t> group_of_record, const FoldAssignment& a) {
  if (group_of_record.size() != a.fold.size()) throw DataError("leakage audit: record counts differ");
  std::map<std::size_t, std::size_t> fold_of;
  std::set<std::size_t> leaks;
  for (std::size_t i = 0; i < a.fold.size(); ++i) {
    auto [it, fresh] = fold_of.emplace(group_of_record[i], a.fold[i]);
    if (!fresh && it->second != a.fold[i]) leaks.insert(group_of_record[i]);
  }
  return {leaks.begin(), leaks.end()};
}

WarmAudit audit_warm(std::span<const PairRef> pairs, const FoldAssignment& a) {
  std::map<std::size_t, std::set<std::size_t>> fc, fp;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    fc[pairs[i].compound].insert(a.fold[i]);
    fp[pairs[i].protein].insert(a.fold[i]);
  }
  WarmAudit w;
  for (const auto& [e, s] : fc)
    if (s.size() < 2) w.compounds.push_back(e);
  for (const auto& [e, s] : fp)
    if (s.size() < 2) w.proteins.push_back(e);
  return w;
}

HoldoutSplit hyperopt_holdout(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n < 10) throw DataError("hyperparameter holdout needs at least 10 records");
  check_k(n, k);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_hold = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
  HoldoutSplit h;
  h.is_holdout.assign(n, false);
  h.folds = {k, SplitScheme::Random, seed, std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = order[i];
    if (i < n_hold) {
      h.is_holdout[r] = true;
      h.folds.fold[r] = i % k;
    } else {
      h.folds.fold[r] = (i - n_hold) % k;
    }
  }
  for (std::size_t i = 0; i < n; ++i) (h.is_holdout[i] ? h.validation : h.train).push_back(i);
  return h;
}

std::vector<std::size_t> HoldoutSplit::train_view(std::size_t f) const { return folds.complement(f); }

std::vector<std::size_t> HoldoutSplit::validation_view(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < folds.fold.size(); ++i)
    if (folds.fold[i] == f && !is_holdout[i]) out.push_back(i);
  return out;
}

}  // namespace padme
