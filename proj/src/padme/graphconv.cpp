#include "padme/graphconv.hpp"

#include <cmath>
#include <string>

#include "padme/error.hpp"

namespace padme {

MolBatch make_mol_batch(std::span<const MolGraph* const> graphs, std::span<const AtomFeatureMatrix* const> features,
                        std::size_t max_degree) {
  if (graphs.size() != features.size()) throw ShapeError("make_mol_batch: graph/feature count mismatch");
  MolBatch b;
  b.n_molecules = graphs.size();
  b.width = features.empty() ? 0 : features.front()->width;
  for (std::size_t m = 0; m < graphs.size(); ++m) {
    if (graphs[m]->atom_count() == 0) throw DataError("graph readout: molecule " + std::to_string(m) + " is empty");
    if (features[m]->rows != graphs[m]->atom_count() || features[m]->width != b.width)
      throw ShapeError("make_mol_batch: feature matrix does not match molecule " + std::to_string(m));
    b.n_atoms += graphs[m]->atom_count();
  }
  b.features = Tensor::matrix(b.n_atoms, b.width);
  b.neighbors.resize(b.n_atoms);
  b.molecule_of.resize(b.n_atoms);
  b.degree_slices.assign(max_degree + 1, {});
  std::size_t offset = 0;
  for (std::size_t m = 0; m < graphs.size(); ++m) {
    const MolGraph& g = *graphs[m];
    std::copy(features[m]->values.begin(), features[m]->values.end(), b.features.data() + offset * b.width);
    for (std::size_t v = 0; v < g.atom_count(); ++v) {
      const std::size_t deg = g.adjacency[v].size();
      if (deg > max_degree)
        throw DataError("graph_conv: atom " + std::to_string(v) + " of molecule " + std::to_string(m) +
                        " has degree " + std::to_string(deg) + " above max_degree " + std::to_string(max_degree));
      for (std::size_t u : g.adjacency[v]) b.neighbors[offset + v].push_back(offset + u);
      b.molecule_of[offset + v] = m;
      b.degree_slices[deg].push_back(offset + v);
    }
    offset += g.atom_count();
  }
  return b;
}

GraphConvParams GraphConvParams::create(std::string_view prefix, std::size_t in_width, std::size_t out_width,
                                        std::size_t max_degree, Rng& rng) {
  GraphConvParams p;
  p.in_width = in_width;
  p.out_width = out_width;
  p.max_degree = max_degree;
  // He-uniform over the fan-in of the two summed projections.
  const double limit = std::sqrt(6.0 / static_cast<double>(2 * in_width));
  auto init = [&](std::string name) {
    Tensor w = Tensor::matrix(in_width, out_width);
    for (double& v : w.values()) v = rng.uniform(-limit, limit);
    return Parameter(std::move(name), std::move(w));
  };
  const std::string base(prefix);
  for (std::size_t d = 0; d <= max_degree; ++d) {
    const std::string ds = std::to_string(d);
    p.self_weights.push_back(init(base + ".self.d" + ds));
    p.neighbor_weights.push_back(init(base + ".nbr.d" + ds));
    p.biases.emplace_back(base + ".bias.d" + ds, Tensor({out_width}, 0.0));
  }
  return p;
}

void GraphConvParams::collect(std::vector<Parameter*>& out) {
  for (std::size_t d = 0; d <= max_degree; ++d) {
    out.push_back(&self_weights[d]);
    out.push_back(&neighbor_weights[d]);
    out.push_back(&biases[d]);
  }
}

namespace {

class NeighborSumOp final : public Op {
 public:
  explicit NeighborSumOp(const std::vector<std::vector<std::size_t>>& nbrs) : nbrs_(nbrs) {}
  std::string_view name() const override { return "neighbor_sum"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    const Tensor& x = *in[0];
    if (x.rows() != nbrs_.size()) throw ShapeError("neighbor_sum: row count does not match atom count");
    const std::size_t w = x.cols();
    Tensor out = Tensor::matrix(x.rows(), w);
    for (std::size_t v = 0; v < nbrs_.size(); ++v)
      for (std::size_t u : nbrs_[v])
        for (std::size_t j = 0; j < w; ++j) out[v * w + j] += x[u * w + j];
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (!gin[0]) return;
    const std::size_t w = in[0]->cols();
    for (std::size_t v = 0; v < nbrs_.size(); ++v)
      for (std::size_t u : nbrs_[v])
        for (std::size_t j = 0; j < w; ++j) (*gin[0])[u * w + j] += g[v * w + j];
  }

 private:
  const std::vector<std::vector<std::size_t>>& nbrs_;
};

class NeighborMaxOp final : public Op {
 public:
  explicit NeighborMaxOp(const std::vector<std::vector<std::size_t>>& nbrs) : nbrs_(nbrs) {}
  std::string_view name() const override { return "graph_pool"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    const Tensor& x = *in[0];
    if (x.rows() != nbrs_.size()) throw ShapeError("graph_pool: row count does not match atom count");
    const std::size_t w = x.cols();
    Tensor out = Tensor::matrix(x.rows(), w);
    argmax_.assign(x.rows() * w, 0);
    for (std::size_t v = 0; v < nbrs_.size(); ++v) {
      for (std::size_t j = 0; j < w; ++j) {
        std::size_t best = v;
        double best_val = x[v * w + j];
        for (std::size_t u : nbrs_[v]) {
          const double val = x[u * w + j];
          if (val > best_val || (val == best_val && u < best)) {
            best = u;
            best_val = val;
          }
        }
        out[v * w + j] = best_val;
        argmax_[v * w + j] = best;
      }
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (!gin[0]) return;
    const std::size_t w = in[0]->cols();
    for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[argmax_[i] * w + i % w] += g[i];
  }

 private:
  const std::vector<std::vector<std::size_t>>& nbrs_;
  std::vector<std::size_t> argmax_;
};

class GatherRowsOp final : public Op {
 public:
  explicit GatherRowsOp(std::vector<std::size_t> rows) : rows_(std::move(rows)) {}
  std::string_view name() const override { return "gather_rows"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    const Tensor& x = *in[0];
    const std::size_t w = x.cols();
    Tensor out = Tensor::matrix(rows_.size(), w);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i] >= x.rows()) throw ShapeError("gather_rows: row index out of range");
      std::copy_n(x.data() + rows_[i] * w, w, out.data() + i * w);
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (!gin[0]) return;
    const std::size_t w = in[0]->cols();
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (std::size_t j = 0; j < w; ++j) (*gin[0])[rows_[i] * w + j] += g[i * w + j];
  }

 private:
  std::vector<std::size_t> rows_;
};

class ScatterRowsOp final : public Op {
 public:
  ScatterRowsOp(std::vector<std::vector<std::size_t>> rows, std::size_t n_rows, std::size_t width)
      : rows_(std::move(rows)), n_rows_(n_rows), width_(width) {}
  std::string_view name() const override { return "scatter_rows"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    Tensor out = Tensor::matrix(n_rows_, width_);
    for (std::size_t p = 0; p < in.size(); ++p) {
      const Tensor& part = *in[p];
      if (part.rows() != rows_[p].size() || (part.rows() > 0 && part.cols() != width_))
        throw ShapeError("scatter_rows: part " + std::to_string(p) + " has shape " + part.shape_string());
      for (std::size_t i = 0; i < rows_[p].size(); ++i)
        std::copy_n(part.data() + i * width_, width_, out.data() + rows_[p][i] * width_);
    }
    return out;
  }
  void backward(std::span<const Tensor* const>, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    for (std::size_t p = 0; p < gin.size(); ++p) {
      if (!gin[p]) continue;
      for (std::size_t i = 0; i < rows_[p].size(); ++i)
        for (std::size_t j = 0; j < width_; ++j) (*gin[p])[i * width_ + j] += g[rows_[p][i] * width_ + j];
    }
  }

 private:
  std::vector<std::vector<std::size_t>> rows_;
  std::size_t n_rows_;
  std::size_t width_;
};

class SegmentSumOp final : public Op {
 public:
  SegmentSumOp(std::vector<std::size_t> seg, std::size_t n, bool average)
      : seg_(std::move(seg)), n_(n), average_(average), counts_(n, 0.0) {
    for (std::size_t s : seg_) {
      if (s >= n_) throw ShapeError("segment_sum: segment id out of range");
      counts_[s] += 1.0;
    }
    for (std::size_t s = 0; s < n_; ++s)
      if (counts_[s] == 0.0) throw DataError("graph_gather: molecule " + std::to_string(s) + " has no atoms");
  }
  std::string_view name() const override { return "graph_gather"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    const Tensor& x = *in[0];
    if (x.rows() != seg_.size()) throw ShapeError("graph_gather: row count does not match segment map");
    const std::size_t w = x.cols();
    Tensor out = Tensor::matrix(n_, w);
    for (std::size_t i = 0; i < seg_.size(); ++i) {
      const double f = average_ ? 1.0 / counts_[seg_[i]] : 1.0;
      for (std::size_t j = 0; j < w; ++j) out[seg_[i] * w + j] += f * x[i * w + j];
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (!gin[0]) return;
    const std::size_t w = in[0]->cols();
    for (std::size_t i = 0; i < seg_.size(); ++i) {
      const double f = average_ ? 1.0 / counts_[seg_[i]] : 1.0;
      for (std::size_t j = 0; j < w; ++j) (*gin[0])[i * w + j] += f * g[seg_[i] * w + j];
    }
  }

 private:
  std::vector<std::size_t> seg_;
  std::size_t n_;
  bool average_;
  std::vector<double> counts_;
};

}  // namespace

Var neighbor_sum(Tape& tape, Var x, const std::vector<std::vector<std::size_t>>& neighbors) {
  return tape.apply(std::make_unique<NeighborSumOp>(neighbors), {x});
}

Var gather_rows(Tape& tape, Var x, std::vector<std::size_t> rows) {
  return tape.apply(std::make_unique<GatherRowsOp>(std::move(rows)), {x});
}

Var scatter_rows(Tape& tape, std::vector<Var> parts, std::vector<std::vector<std::size_t>> rows, std::size_t n_rows,
                 std::size_t width) {
  if (parts.size() != rows.size()) throw ShapeError("scatter_rows: part/index count mismatch");
  return tape.apply(std::make_unique<ScatterRowsOp>(std::move(rows), n_rows, width), std::move(parts));
}

Var segment_sum(Tape& tape, Var x, std::vector<std::size_t> segment_of_row, std::size_t n_segments, bool average) {
  return tape.apply(std::make_unique<SegmentSumOp>(std::move(segment_of_row), n_segments, average), {x});
}

namespace {

template <typename Params, typename Bind>
Var graph_conv_impl(Tape& tape, Var h, const MolBatch& batch, Params& params, Bind&& bind) {
  if (batch.degree_slices.size() > params.max_degree + 1) {
    for (std::size_t d = params.max_degree + 1; d < batch.degree_slices.size(); ++d)
      if (!batch.degree_slices[d].empty())
        throw DataError("graph_conv: atom " + std::to_string(batch.degree_slices[d].front()) + " has degree " +
                        std::to_string(d) + " above max_degree " + std::to_string(params.max_degree));
  }
  const Var nbr = neighbor_sum(tape, h, batch.neighbors);
  std::vector<Var> parts;
  std::vector<std::vector<std::size_t>> rows;
  for (std::size_t d = 0; d < batch.degree_slices.size() && d <= params.max_degree; ++d) {
    const auto& slice = batch.degree_slices[d];
    if (slice.empty()) continue;
    Var self_part = tape.matmul(gather_rows(tape, h, slice), bind(params.self_weights[d]));
    Var nbr_part = tape.matmul(gather_rows(tape, nbr, slice), bind(params.neighbor_weights[d]));
    parts.push_back(tape.add_bias(tape.add(self_part, nbr_part), bind(params.biases[d])));
    rows.push_back(slice);
  }
  return tape.relu(scatter_rows(tape, std::move(parts), std::move(rows), batch.n_atoms, params.out_width));
}

}  // namespace

Var graph_conv(Tape& tape, Var h, const MolBatch& batch, GraphConvParams& params) {
  return graph_conv_impl(tape, h, batch, params, [&](Parameter& p) { return tape.param(p); });
}

Var graph_conv_frozen(Tape& tape, Var h, const MolBatch& batch, const GraphConvParams& params) {
  return graph_conv_impl(tape, h, batch, params, [&](const Parameter& p) { return tape.frozen(p); });
}

Var graph_pool(Tape& tape, Var h, const MolBatch& batch) {
  return tape.apply(std::make_unique<NeighborMaxOp>(batch.neighbors), {h});
}

Var graph_gather(Tape& tape, Var h, const MolBatch& batch, bool average) {
  return segment_sum(tape, h, batch.molecule_of, batch.n_molecules, average);
}

}  // namespace padme
