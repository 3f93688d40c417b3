#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "padme/error.hpp"

namespace padme {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
  std::uint8_t element = 0;  // atomic number
  int formal_charge = 0;
  int explicit_h = 0;        // hydrogens written inside a bracket atom
  int implicit_h = 0;        // valence-derived hydrogens (organic subset only)
  std::optional<int> isotope;
  bool aromatic = false;
  bool ring_member = false;
  bool bracket = false;
  std::size_t degree = 0;

  int total_h() const { return explicit_h + implicit_h; }
};

struct Bond {
  std::size_t begin = 0;
  std::size_t end = 0;
  BondOrder order = BondOrder::Single;
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  // adjacency[v] lists neighbor atom indices; bond_index[v][i] is the bond
  // joining v and adjacency[v][i].
  std::vector<std::vector<std::size_t>> adjacency;
  std::vector<std::vector<std::size_t>> bond_index;

  std::size_t atom_count() const { return atoms.size(); }
  std::size_t bond_count() const { return bonds.size(); }
};

enum class SmilesErrorKind {
  Empty,
  UnmatchedParenthesis,
  UnmatchedRingClosure,
  UnknownElement,
  MalformedBracketAtom,
  Unsupported,
  Syntax,
};

class SmilesError : public Error {
 public:
  SmilesError(SmilesErrorKind kind, std::size_t offset, const std::string& what);

  SmilesErrorKind kind() const { return kind_; }
  // Byte offset into the input where the problem was detected.
  std::size_t offset() const { return offset_; }

 private:
  SmilesErrorKind kind_;
  std::size_t offset_;
};

/// Parses the supported SMILES subset: organic-subset and bracket atoms,
/// explicit bonds (- = # :), branches and ring closures (digits and %nn).
/// Stereo marks, wildcards and multi-fragment input are rejected.
MolGraph parse_smiles(std::string_view smiles);

/// Deterministic atom ranking by iterative neighbour refinement of
/// (degree, element, charge) classes; ties fall back to parse order.
/// Returns order[i] = index of the atom placed at position i.
std::vector<std::size_t> canonical_atom_order(const MolGraph& g);

std::string_view element_symbol(std::uint8_t atomic_number);
std::optional<std::uint8_t> element_number(std::string_view symbol);

}  // namespace padme
