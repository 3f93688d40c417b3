#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "padme/smiles.hpp"

namespace padme {

// Version tags recorded in checkpoints; bump on any change that alters
// featurizer output.
inline constexpr std::string_view kEcfpVersion = "ecfp-1";
inline constexpr std::string_view kAtomFeatureVersion = "atomfeat-1";

inline constexpr std::uint32_t kEcfpHashSeed = 0x5eedecf4u;

class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(std::uint32_t n_bits, std::uint32_t radius);

  std::uint32_t n_bits() const { return n_bits_; }
  std::uint32_t radius() const { return radius_; }

  bool test(std::uint32_t bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1u; }
  void set(std::uint32_t bit) { words_[bit >> 6] |= std::uint64_t{1} << (bit & 63); }
  std::size_t popcount() const;
  std::vector<std::uint32_t> on_bits() const;
  std::span<const std::uint64_t> words() const { return words_; }

  // Byte i of the encoding holds bits 8i..8i+7, least significant bit first;
  // each byte is written as two lowercase hex digits.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex, std::uint32_t radius = 0);

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::uint32_t n_bits_ = 0;
  std::uint32_t radius_ = 0;
  std::vector<std::uint64_t> words_;
};

// Seeded 32-bit hash (MurmurHash3 x86_32 mixing) over a sequence of words,
// each consumed as its little-endian byte image.
std::uint32_t hash_words(std::span<const std::uint32_t> words, std::uint32_t seed = kEcfpHashSeed);

// Identifiers of the deduplicated circular environments, before folding.
std::vector<std::uint32_t> ecfp_identifiers(const MolGraph& g, std::uint32_t radius);

/// Extended-connectivity fingerprint folded to n_bits. n_bits must be one of
/// 512, 1024, 2048 or 4096.
Fingerprint ecfp(const MolGraph& g, std::uint32_t radius = 2, std::uint32_t n_bits = 2048);

/// |a & b| / |a | b|, with two empty fingerprints defined as identical (1).
double tanimoto(const Fingerprint& a, const Fingerprint& b);

struct AtomFeatureLayout {
  std::vector<std::string> vocabulary = default_vocabulary();
  std::size_t max_degree = 6;
  std::size_t max_hydrogens = 4;

  static std::vector<std::string> default_vocabulary();

  // one-hot element (+ other) | one-hot degree | one-hot H count | charge |
  // aromatic | ring
  std::size_t width() const { return vocabulary.size() + 1 + (max_degree + 1) + (max_hydrogens + 1) + 3; }
  std::size_t degree_offset() const { return vocabulary.size() + 1; }
  std::size_t hydrogen_offset() const { return degree_offset() + max_degree + 1; }
  std::size_t charge_offset() const { return hydrogen_offset() + max_hydrogens + 1; }
  std::string signature() const;
};

struct AtomFeatureMatrix {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<double> values;  // row-major
  std::vector<std::vector<std::size_t>> degree_slices;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * width, width}; }
};

/// Per-atom initial features for graph convolution. Throws DataError when an
/// atom's degree exceeds layout.max_degree.
AtomFeatureMatrix atom_features(const MolGraph& g, const AtomFeatureLayout& layout = {});

// Portable per-molecule graph feature file:
//   "PGFT" magic, u32 version, u32 molecule count, then per molecule
//   u32 atom count, u32 width, atom_count*width f32 row-major,
//   and per atom u32 degree followed by that many u32 neighbour indices.
// All integers and floats little-endian.
struct GraphFeatureRecord {
  AtomFeatureMatrix features;
  std::vector<std::vector<std::uint32_t>> adjacency;
};

void write_graph_features(const std::filesystem::path& path, std::span<const GraphFeatureRecord> records);
std::vector<GraphFeatureRecord> read_graph_features(const std::filesystem::path& path);

}  // namespace padme
