#include "padme/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <sstream>

#include "padme/error.hpp"
#include "padme/io.hpp"

namespace padme {

Fingerprint::Fingerprint(std::uint32_t n_bits, std::uint32_t radius)
    : n_bits_(n_bits), radius_(radius), words_((n_bits + 63) / 64, 0) {}

std::size_t Fingerprint::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint32_t> Fingerprint::on_bits() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < n_bits_; ++i)
    if (test(i)) out.push_back(i);
  return out;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(n_bits_ / 4);
  for (std::uint32_t byte = 0; byte < n_bits_ / 8; ++byte) {
    const auto v = static_cast<std::uint8_t>(words_[byte / 8] >> (8 * (byte % 8)));
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 15]);
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, std::uint32_t radius) {
  if (hex.size() % 2 != 0) throw FormatError("fingerprint hex has odd length");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw FormatError(std::string("invalid hex digit '") + c + "'");
  };
  Fingerprint fp(static_cast<std::uint32_t>(hex.size() * 4), radius);
  for (std::size_t byte = 0; byte < hex.size() / 2; ++byte) {
    const std::uint64_t v = (nibble(hex[2 * byte]) << 4) | nibble(hex[2 * byte + 1]);
    fp.words_[byte / 8] |= v << (8 * (byte % 8));
  }
  return fp;
}

std::uint32_t hash_words(std::span<const std::uint32_t> words, std::uint32_t seed) {
  constexpr std::uint32_t c1 = 0xcc9e2d51u;
  constexpr std::uint32_t c2 = 0x1b873593u;
  std::uint32_t h = seed;
  for (std::uint32_t k : words) {
    k *= c1;
    k = std::rotl(k, 15);
    k *= c2;
    h ^= k;
    h = std::rotl(h, 13);
    h = h * 5 + 0xe6546b64u;
  }
  h ^= static_cast<std::uint32_t>(words.size() * 4);
  h ^= h >> 16;
  h *= 0x85ebca6bu;
  h ^= h >> 13;
  h *= 0xc2b2ae35u;
  h ^= h >> 16;
  return h;
}

namespace {

using AtomSet = std::vector<std::uint64_t>;

std::uint32_t bond_code(BondOrder o) { return static_cast<std::uint32_t>(o); }

}  // namespace

std::vector<std::uint32_t> ecfp_identifiers(const MolGraph& g, std::uint32_t radius) {
  const std::size_t n = g.atom_count();
  const std::size_t set_words = (n + 63) / 64;
  std::vector<std::uint32_t> ids(n);
  std::vector<AtomSet> sets(n, AtomSet(set_words, 0));
  std::set<AtomSet> seen;
  std::vector<std::uint32_t> out;

  for (std::size_t v = 0; v < n; ++v) {
    const Atom& a = g.atoms[v];
    const std::uint32_t invariant[] = {
        a.element,
        static_cast<std::uint32_t>(a.degree),
        static_cast<std::uint32_t>(a.total_h()),
        static_cast<std::uint32_t>(static_cast<std::int32_t>(a.formal_charge)),
        a.aromatic ? 1u : 0u,
        a.ring_member ? 1u : 0u,
    };
    ids[v] = hash_words(invariant);
    sets[v][v / 64] |= std::uint64_t{1} << (v % 64);
    seen.insert(sets[v]);
    out.push_back(ids[v]);
  }

  for (std::uint32_t r = 1; r <= radius; ++r) {
    std::vector<std::uint32_t> next_ids(n);
    std::vector<AtomSet> next_sets(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> nbrs;
      AtomSet s = sets[v];
      for (std::size_t i = 0; i < g.adjacency[v].size(); ++i) {
        const std::size_t u = g.adjacency[v][i];
        nbrs.emplace_back(bond_code(g.bonds[g.bond_index[v][i]].order), ids[u]);
        for (std::size_t w = 0; w < set_words; ++w) s[w] |= sets[u][w];
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::vector<std::uint32_t> words = {r, ids[v]};
      for (auto [order, id] : nbrs) {
        words.push_back(order);
        words.push_back(id);
      }
      next_ids[v] = hash_words(words);
      next_sets[v] = std::move(s);
    }
    // Environments covering an atom set already seen at a lower radius are
    // dropped; equal sets within this iteration keep the smallest identifier.
    std::map<AtomSet, std::uint32_t> fresh;
    for (std::size_t v = 0; v < n; ++v) {
      if (seen.contains(next_sets[v])) continue;
      auto [it, inserted] = fresh.emplace(next_sets[v], next_ids[v]);
      if (!inserted) it->second = std::min(it->second, next_ids[v]);
    }
    for (auto& [s, id] : fresh) {
      seen.insert(s);
      out.push_back(id);
    }
    ids = std::move(next_ids);
    sets = std::move(next_sets);
  }
  return out;
}

Fingerprint ecfp(const MolGraph& g, std::uint32_t radius, std::uint32_t n_bits) {
  if (n_bits != 512 && n_bits != 1024 && n_bits != 2048 && n_bits != 4096)
    throw std::invalid_argument("ecfp: n_bits must be 512, 1024, 2048 or 4096");
  Fingerprint fp(n_bits, radius);
  for (std::uint32_t id : ecfp_identifiers(g, radius)) fp.set(id % n_bits);
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.n_bits() != b.n_bits())
    throw std::invalid_argument("tanimoto: fingerprint lengths differ (" + std::to_string(a.n_bits()) + " vs " +
                                std::to_string(b.n_bits()) + ")");
  std::size_t both = 0, either = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    both += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
    either += static_cast<std::size_t>(std::popcount(wa[i] | wb[i]));
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

std::vector<std::string> AtomFeatureLayout::default_vocabulary() {
  return {"C", "N", "O", "S", "F", "Si", "P", "Cl", "Br", "Mg",
          "Na", "Ca", "Fe", "As", "Al", "I", "B", "K", "Se", "Zn"};
}

std::string AtomFeatureLayout::signature() const {
  std::ostringstream ss;
  ss << kAtomFeatureVersion << ";vocab=";
  for (std::size_t i = 0; i < vocabulary.size(); ++i) ss << (i ? "|" : "") << vocabulary[i];
  ss << ";max_degree=" << max_degree << ";max_h=" << max_hydrogens;
  return ss.str();
}

AtomFeatureMatrix atom_features(const MolGraph& g, const AtomFeatureLayout& layout) {
  AtomFeatureMatrix m;
  m.rows = g.atom_count();
  m.width = layout.width();
  m.values.assign(m.rows * m.width, 0.0);
  m.degree_slices.assign(layout.max_degree + 1, {});
  for (std::size_t v = 0; v < m.rows; ++v) {
    const Atom& a = g.atoms[v];
    if (a.degree > layout.max_degree) {
      throw DataError("atom " + std::to_string(v) + " (" + std::string(element_symbol(a.element)) +
                      ") has degree " + std::to_string(a.degree) + ", above max_degree " +
                      std::to_string(layout.max_degree));
    }
    double* row = m.values.data() + v * m.width;
    const auto sym = element_symbol(a.element);
    const auto it = std::find(layout.vocabulary.begin(), layout.vocabulary.end(), sym);
    row[static_cast<std::size_t>(it - layout.vocabulary.begin())] = 1.0;  // end() maps to "other"
    row[layout.degree_offset() + a.degree] = 1.0;
    const auto h = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, a.total_h())), layout.max_hydrogens);
    row[layout.hydrogen_offset() + h] = 1.0;
    row[layout.charge_offset()] = a.formal_charge;
    row[layout.charge_offset() + 1] = a.aromatic ? 1.0 : 0.0;
    row[layout.charge_offset() + 2] = a.ring_member ? 1.0 : 0.0;
    m.degree_slices[a.degree].push_back(v);
  }
  return m;
}

namespace {
constexpr std::string_view kGraphMagic = "PGFT";
constexpr std::uint32_t kGraphVersion = 1;
}  // namespace

void write_graph_features(const std::filesystem::path& path, std::span<const GraphFeatureRecord> records) {
  io::BinaryWriter w;
  w.raw(kGraphMagic);
  w.u32(kGraphVersion);
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    w.u32(static_cast<std::uint32_t>(r.features.rows));
    w.u32(static_cast<std::uint32_t>(r.features.width));
    for (double v : r.features.values) w.f32(static_cast<float>(v));
    for (const auto& nbrs : r.adjacency) {
      w.u32(static_cast<std::uint32_t>(nbrs.size()));
      for (auto u : nbrs) w.u32(u);
    }
  }
  io::write_bytes(path, w.bytes());
}

std::vector<GraphFeatureRecord> read_graph_features(const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  io::BinaryReader r(bytes);
  if (r.raw(4) != kGraphMagic) throw FormatError(path.string() + ": not a graph feature file");
  if (const auto v = r.u32(); v != kGraphVersion)
    throw FormatError(path.string() + ": unsupported graph feature version " + std::to_string(v));
  std::vector<GraphFeatureRecord> out(r.u32());
  for (auto& rec : out) {
    rec.features.rows = r.u32();
    rec.features.width = r.u32();
    rec.features.values.resize(rec.features.rows * rec.features.width);
    for (double& v : rec.features.values) v = r.f32();
    rec.adjacency.resize(rec.features.rows);
    for (auto& nbrs : rec.adjacency) {
      nbrs.resize(r.u32());
      for (auto& u : nbrs) u = r.u32();
    }
    for (std::size_t v = 0; v < rec.adjacency.size(); ++v) {
      const std::size_t d = rec.adjacency[v].size();
      if (rec.features.degree_slices.size() <= d) rec.features.degree_slices.resize(d + 1);
      rec.features.degree_slices[d].push_back(v);
    }
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes in graph feature file");
  return out;
}

}  // namespace padme
