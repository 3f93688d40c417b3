#include "padme/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "padme/error.hpp"
#include "padme/fingerprint.hpp"
#include "padme/protein.hpp"
#include "padme/smiles.hpp"

namespace padme {

namespace {

const std::vector<std::string>& inner_fragments() {
  static const std::vector<std::string> f = {"C",        "CC",        "N",         "O",          "C(=O)",
                                             "c1ccccc1", "C1CCNCC1",  "c1ccncc1",  "S",          "C(C)C",
                                             "C(=O)N",   "c1ccc(O)cc1", "C1CCCC1",  "OC",         "C#C",
                                             "c1ccoc1",  "N(C)",      "C(F)(F)",   "c1cnc(N)nc1", "C=C"};
  return f;
}

const std::vector<std::string>& terminal_fragments() {
  static const std::vector<std::string> f = {"C", "O", "N", "F", "Cl", "Br", "C(=O)O", "C#N", "OC"};
  return f;
}

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace

std::string random_smiles(Rng& rng) {
  const auto& inner = inner_fragments();
  const std::size_t n = 2 + rng.below(5);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += inner[rng.below(inner.size())];
  return s;
}

std::string analog_smiles(const std::string& base, Rng& rng) {
  const auto& term = terminal_fragments();
  return base + term[rng.below(term.size())];
}

std::string random_protein(Rng& rng, std::size_t length) {
  std::string s(length, 'A');
  for (auto& c : s) c = kAminoAcids[rng.below(kAminoAcids.size())];
  return s;
}

Dataset make_synthetic(const SyntheticOptions& o) {
  if (o.n_compounds == 0 || o.n_proteins == 0 || o.n_tasks == 0) throw DataError("synthetic data needs entities");
  if (o.min_length < 3 || o.max_length < o.min_length) throw DataError("synthetic protein lengths are invalid");
  Rng rng(o.seed);
  Dataset ds;
  ds.n_tasks = o.n_tasks;
  for (std::size_t t = 0; t < o.n_tasks; ++t) ds.task_names.push_back("task" + std::to_string(t));

  std::set<std::string> seen;
  std::string base;
  while (ds.compounds.size() < o.n_compounds) {
    std::string s;
    if (o.family_size > 1 && ds.compounds.size() % o.family_size != 0)
      s = analog_smiles(base, rng);
    else
      s = base = random_smiles(rng);
    if (!seen.insert(s).second) continue;
    ds.compounds.push_back(s);
  }
  std::set<std::string> ids;
  for (std::size_t p = 0; p < o.n_proteins; ++p) {
    ProteinEntry e;
    e.id = "P" + std::to_string(10000 + p);
    e.phosphorylated = rng.uniform() < 0.2;
    e.sequence = random_protein(rng, o.min_length + rng.below(o.max_length - o.min_length + 1));
    ds.proteins.push_back(std::move(e));
  }

  // Latent scores: compound from its fingerprint bits, protein from its
  // composition, so the response is learnable from the features.
  std::vector<double> cscore(o.n_compounds), pscore(o.n_proteins);
  for (std::size_t c = 0; c < o.n_compounds; ++c) {
    const Fingerprint fp = ecfp(parse_smiles(ds.compounds[c]), 2, 1024);
    double s = 0.0;
    for (auto bit : fp.on_bits()) s += (static_cast<double>(hash_string(std::to_string(bit)) % 2001) / 1000.0 - 1.0);
    cscore[c] = std::tanh(s / 4.0);
  }
  for (std::size_t p = 0; p < o.n_proteins; ++p) {
    const ProteinDescriptor d = psc(ds.proteins[p].sequence, ds.proteins[p].phosphorylated);
    double s = 0.0;
    for (std::size_t a = 0; a < kAacWidth; ++a) s += d.aac()[a] * (static_cast<double>(a % 5) - 2.0);
    pscore[p] = std::tanh(8.0 * s);
  }

  auto emit = [&](std::size_t c, std::size_t p) {
    bool any = false;
    for (std::size_t t = 0; t < o.n_tasks; ++t) {
      if (o.n_tasks > 1 && rng.uniform() >= o.task_density && !(t + 1 == o.n_tasks && !any)) continue;
      any = true;
      const double shift = 0.3 * static_cast<double>(t % 3);
      const double y = 6.5 + 1.2 * cscore[c] + 0.8 * pscore[p] + 1.0 * cscore[c] * pscore[p] + shift +
                       o.noise * rng.normal();
      InteractionRecord r;
      r.compound = c;
      r.protein = p;
      r.task = t;
      r.value = y;
      r.raw = std::pow(10.0, 4.0 - y);
      ds.records.push_back(r);
    }
  };

  // Guarantee two observations per entity, then fill to density.
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t c = 0; c < o.n_compounds; ++c)
    for (std::size_t j = 0; j < std::min<std::size_t>(2, o.n_proteins); ++j) pairs.insert({c, (c + j) % o.n_proteins});
  for (std::size_t p = 0; p < o.n_proteins; ++p)
    for (std::size_t j = 0; j < std::min<std::size_t>(2, o.n_compounds); ++j)
      pairs.insert({(p * 7 + j) % o.n_compounds, p});
  for (std::size_t c = 0; c < o.n_compounds; ++c)
    for (std::size_t p = 0; p < o.n_proteins; ++p)
      if (rng.uniform() < o.density) pairs.insert({c, p});
  for (const auto& [c, p] : pairs) emit(c, p);
  return ds;
}

}  // namespace padme
