#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace padme {

inline constexpr std::string_view kPscVersion = "psc-1";

// Residues in alphabetical one-letter order; this fixes every index below.
inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

inline constexpr std::size_t kAacWidth = 20;
inline constexpr std::size_t kDcWidth = 400;
inline constexpr std::size_t kTcWidth = 8000;
inline constexpr std::size_t kPscWidth = kAacWidth + kDcWidth + kTcWidth + 1;  // 8421

/// Protein sequence composition: AAC | DC | TC | phosphorylation flag.
/// Frequencies are fractions in [0, 1].
class ProteinDescriptor {
 public:
  ProteinDescriptor() : values_(kPscWidth, 0.0) {}
  explicit ProteinDescriptor(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::span<const double> aac() const { return {values_.data(), kAacWidth}; }
  std::span<const double> dc() const { return {values_.data() + kAacWidth, kDcWidth}; }
  std::span<const double> tc() const { return {values_.data() + kAacWidth + kDcWidth, kTcWidth}; }
  bool phosphorylated() const { return values_.back() != 0.0; }

  friend bool operator==(const ProteinDescriptor&, const ProteinDescriptor&) = default;

 private:
  friend ProteinDescriptor psc(std::string_view, bool);
  std::vector<double> values_;
};

// Index of a residue letter in kAminoAcids, or -1.
int residue_index(char c);

/// Computes the composition descriptor. Throws DataError naming the first
/// non-canonical residue, or when the sequence is shorter than 3.
ProteinDescriptor psc(std::string_view sequence, bool phosphorylated);

struct ProteinEntry {
  std::string id;
  bool phosphorylated = false;
  std::string sequence;
};

// Sequence file: one record per line, `protein_id <TAB> phospho_flag <TAB>
// sequence`. Blank lines and lines starting with '#' are skipped.
std::vector<ProteinEntry> read_sequence_file(const std::filesystem::path& path);
void write_sequence_file(const std::filesystem::path& path, std::span<const ProteinEntry> entries);

// Descriptor matrix file: "PSCD" magic, u32 version, u32 width, u32 count,
// then per protein a u32-length-prefixed id and width f64 values.
struct DescriptorTable {
  std::vector<std::string> ids;
  std::vector<ProteinDescriptor> descriptors;
};

void write_descriptor_table(const std::filesystem::path& path, const DescriptorTable& table);
DescriptorTable read_descriptor_table(const std::filesystem::path& path);

}  // namespace padme
