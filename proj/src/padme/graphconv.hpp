#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "padme/fingerprint.hpp"
#include "padme/rng.hpp"
#include "padme/smiles.hpp"
#include "padme/tensor.hpp"

namespace padme {

/// Several molecules merged into one disjoint graph so a whole batch runs
/// through the convolution stack at once.
struct MolBatch {
  std::size_t n_atoms = 0;
  std::size_t n_molecules = 0;
  std::size_t width = 0;
  Tensor features;                                  // n_atoms x width
  std::vector<std::vector<std::size_t>> neighbors;  // merged adjacency
  std::vector<std::size_t> molecule_of;             // atom -> molecule
  std::vector<std::vector<std::size_t>> degree_slices;
};

// Builds a batch from per-molecule graphs and their atom feature matrices.
// Every molecule must have at least one atom.
MolBatch make_mol_batch(std::span<const MolGraph* const> graphs, std::span<const AtomFeatureMatrix* const> features,
                        std::size_t max_degree);

/// Per-degree weights: W_self(d), W_nbr(d) (in x out) and b(d) for
/// d = 0..max_degree.
struct GraphConvParams {
  std::size_t in_width = 0;
  std::size_t out_width = 0;
  std::size_t max_degree = 0;
  std::vector<Parameter> self_weights;
  std::vector<Parameter> neighbor_weights;
  std::vector<Parameter> biases;

  static GraphConvParams create(std::string_view prefix, std::size_t in_width, std::size_t out_width,
                                std::size_t max_degree, Rng& rng);
  void collect(std::vector<Parameter*>& out);
};

// Row-wise sum over neighbours: out[v] = sum_{u in N(v)} x[u].
Var neighbor_sum(Tape& tape, Var x, const std::vector<std::vector<std::size_t>>& neighbors);
// Row selection: out[i] = x[rows[i]].
Var gather_rows(Tape& tape, Var x, std::vector<std::size_t> rows);
// Inverse of gather_rows over a partition: out[rows_p[i]] = parts[p][i].
Var scatter_rows(Tape& tape, std::vector<Var> parts, std::vector<std::vector<std::size_t>> rows, std::size_t n_rows,
                 std::size_t width);
// Per-segment row sums (mean when average is set).
Var segment_sum(Tape& tape, Var x, std::vector<std::size_t> segment_of_row, std::size_t n_segments,
                bool average = false);

/// h'_v = relu(W_self(deg v) h_v + W_nbr(deg v) sum_{u in N(v)} h_u + b(deg v))
Var graph_conv(Tape& tape, Var h, const MolBatch& batch, GraphConvParams& params);
// Same layer with parameters read as constants (evaluation).
Var graph_conv_frozen(Tape& tape, Var h, const MolBatch& batch, const GraphConvParams& params);

/// h'_v = elementwise max over {h_v} and the neighbours of v. Gradient flows to
/// the arg-max entry; ties go to the lowest atom index.
Var graph_pool(Tape& tape, Var h, const MolBatch& batch);

/// Per-molecule readout: sum (or mean) of atom rows.
Var graph_gather(Tape& tape, Var h, const MolBatch& batch, bool average = false);

}  // namespace padme
