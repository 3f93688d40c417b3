#include "padme/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "padme/error.hpp"
#include "padme/rng.hpp"

namespace padme {

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  data_.assign(n, fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  if (n != data_.size()) throw ShapeError("tensor data length does not match shape " + shape_string());
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> v) { return Tensor({v.size()}, std::vector<double>(v)); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_string() const {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) ss << (i ? "x" : "") << shape_[i];
  ss << ']';
  return ss.str();
}

namespace {

void require_matrix(std::string_view op, const Tensor& t, std::string_view what) {
  if (t.rank() != 2)
    throw ShapeError(std::string(op) + ": " + std::string(what) + " must be a matrix, got " + t.shape_string());
}

void require_same(std::string_view op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

class MatMulOp final : public Op {
 public:
  std::string_view name() const override { return "matmul"; }

  Tensor forward(std::span<const Tensor* const> in, bool) override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    require_matrix(name(), a, "lhs");
    require_matrix(name(), b, "rhs");
    if (a.shape()[1] != b.shape()[0])
      throw ShapeError("matmul: inner dimensions differ " + a.shape_string() + " x " + b.shape_string());
    const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
    Tensor c = Tensor::matrix(n, m);
    // Zero entries of the left operand are skipped; featurized inputs are
    // mostly zeros.
    for (std::size_t i = 0; i < n; ++i) {
      double* crow = c.data() + i * m;
      const double* arow = a.data() + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = arow[p];
        if (av == 0.0) continue;
        const double* brow = b.data() + p * m;
        for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
      }
    }
    return c;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
    if (Tensor* ga = gin[0]) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g.data() + i * m;
        double* garow = ga->data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = b.data() + p * m;
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += grow[j] * brow[j];
          garow[p] += s;
        }
      }
    }
    if (Tensor* gb = gin[1]) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g.data() + i * m;
        const double* arow = a.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = arow[p];
          if (av == 0.0) continue;
          double* gbrow = gb->data() + p * m;
          for (std::size_t j = 0; j < m; ++j) gbrow[j] += av * grow[j];
        }
      }
    }
  }
};

class AddOp final : public Op {
 public:
  std::string_view name() const override { return "add"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    require_same(name(), *in[0], *in[1]);
    Tensor out = *in[0];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*in[1])[i];
    return out;
  }
  void backward(std::span<const Tensor* const>, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    for (Tensor* gi : gin)
      if (gi)
        for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
  }
};

class AddBiasOp final : public Op {
 public:
  std::string_view name() const override { return "add_bias"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    const Tensor& x = *in[0];
    const Tensor& b = *in[1];
    require_matrix(name(), x, "input");
    if (b.size() != x.shape()[1])
      throw ShapeError("add_bias: bias " + b.shape_string() + " does not match input " + x.shape_string());
    Tensor out = x;
    const std::size_t m = x.shape()[1];
    for (std::size_t i = 0; i < x.shape()[0]; ++i)
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += b[j];
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    const std::size_t m = in[0]->shape()[1];
    if (gin[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
    if (gin[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i % m] += g[i];
  }
};

class MulOp final : public Op {
 public:
  std::string_view name() const override { return "mul"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    require_same(name(), *in[0], *in[1]);
    Tensor out = *in[0];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*in[1])[i];
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (gin[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * (*in[1])[i];
    if (gin[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i] += g[i] * (*in[0])[i];
  }
};

class ScaleOp final : public Op {
 public:
  explicit ScaleOp(double f) : factor_(f) {}
  std::string_view name() const override { return "scale"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    Tensor out = *in[0];
    for (double& v : out.values()) v *= factor_;
    return out;
  }
  void backward(std::span<const Tensor* const>, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (gin[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += factor_ * g[i];
  }

 private:
  double factor_;
};

class ReluOp final : public Op {
 public:
  std::string_view name() const override { return "relu"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    Tensor out = *in[0];
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return out;
  }
  // Subgradient at exactly zero is 0.
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (!gin[0]) return;
    for (std::size_t i = 0; i < g.size(); ++i)
      if ((*in[0])[i] > 0.0) (*gin[0])[i] += g[i];
  }
};

class SumOp final : public Op {
 public:
  std::string_view name() const override { return "sum"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    double s = 0.0;
    for (double v : in[0]->values()) s += v;
    return Tensor::scalar(s);
  }
  void backward(std::span<const Tensor* const>, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (gin[0])
      for (double& v : gin[0]->values()) v += g[0];
  }
};

class ConcatColsOp final : public Op {
 public:
  std::string_view name() const override { return "concat_cols"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    require_matrix(name(), a, "lhs");
    require_matrix(name(), b, "rhs");
    if (a.shape()[0] != b.shape()[0])
      throw ShapeError("concat_cols: row counts differ " + a.shape_string() + " vs " + b.shape_string());
    const std::size_t n = a.shape()[0], p = a.shape()[1], q = b.shape()[1];
    Tensor out = Tensor::matrix(n, p + q);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(a.data() + i * p, p, out.data() + i * (p + q));
      std::copy_n(b.data() + i * q, q, out.data() + i * (p + q) + p);
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    const std::size_t n = in[0]->shape()[0], p = in[0]->shape()[1], q = in[1]->shape()[1];
    for (std::size_t i = 0; i < n; ++i) {
      if (gin[0])
        for (std::size_t j = 0; j < p; ++j) gin[0]->data()[i * p + j] += g[i * (p + q) + j];
      if (gin[1])
        for (std::size_t j = 0; j < q; ++j) gin[1]->data()[i * q + j] += g[i * (p + q) + p + j];
    }
  }
};

class DropoutOp final : public Op {
 public:
  DropoutOp(double rate, std::uint64_t seed) : rate_(rate), seed_(seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
  }
  std::string_view name() const override { return "dropout"; }
  Tensor forward(std::span<const Tensor* const> in, bool training) override {
    Tensor out = *in[0];
    mask_.assign(out.size(), 1.0);
    if (!training || rate_ == 0.0) return out;
    Rng rng(seed_);
    const double keep_scale = 1.0 / (1.0 - rate_);
    for (std::size_t i = 0; i < out.size(); ++i) {
      mask_[i] = rng.uniform() < rate_ ? 0.0 : keep_scale;
      out[i] *= mask_[i];
    }
    return out;
  }
  void backward(std::span<const Tensor* const>, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (gin[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * mask_[i];
  }

 private:
  double rate_;
  std::uint64_t seed_;
  std::vector<double> mask_;
};

class BatchNormOp final : public Op {
 public:
  BatchNormOp(const BatchNormState* stats, BatchNormState* update, bool force_eval)
      : stats_(stats), update_(update), force_eval_(force_eval), eps_(stats ? stats->epsilon : 1e-5) {}
  std::string_view name() const override { return "batch_norm"; }

  Tensor forward(std::span<const Tensor* const> in, bool training) override {
    const Tensor& x = *in[0];
    const Tensor& gamma = *in[1];
    const Tensor& beta = *in[2];
    require_matrix(name(), x, "input");
    const std::size_t n = x.shape()[0], m = x.shape()[1];
    if (gamma.size() != m || beta.size() != m)
      throw ShapeError("batch_norm: scale/shift width does not match input " + x.shape_string());
    if (n == 0) throw ShapeError("batch_norm: empty batch");
    training_ = training && !force_eval_;
    mean_.assign(m, 0.0);
    inv_std_.assign(m, 0.0);
    if (training_) {
      std::vector<double> var(m, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) mean_[j] += x[i * m + j];
      for (double& v : mean_) v /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double d = x[i * m + j] - mean_[j];
          var[j] += d * d;
        }
      for (std::size_t j = 0; j < m; ++j) {
        var[j] /= static_cast<double>(n);
        inv_std_[j] = 1.0 / std::sqrt(var[j] + eps_);
      }
      if (update_) {
        if (update_->running_mean.size() != m) throw ShapeError("batch_norm: running statistics width mismatch");
        const double mom = update_->momentum;
        for (std::size_t j = 0; j < m; ++j) {
          update_->running_mean[j] = mom * update_->running_mean[j] + (1.0 - mom) * mean_[j];
          update_->running_var[j] = mom * update_->running_var[j] + (1.0 - mom) * var[j];
        }
      }
    } else {
      if (!stats_ || stats_->running_mean.size() != m)
        throw ShapeError("batch_norm: evaluation requires running statistics of width " + std::to_string(m));
      for (std::size_t j = 0; j < m; ++j) {
        mean_[j] = stats_->running_mean[j];
        inv_std_[j] = 1.0 / std::sqrt(stats_->running_var[j] + eps_);
      }
    }
    xhat_ = Tensor::matrix(n, m);
    Tensor out = Tensor::matrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double xh = (x[i * m + j] - mean_[j]) * inv_std_[j];
        xhat_[i * m + j] = xh;
        out[i * m + j] = gamma[j] * xh + beta[j];
      }
    return out;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    const Tensor& gamma = *in[1];
    const std::size_t n = xhat_.shape()[0], m = xhat_.shape()[1];
    std::vector<double> sum_g(m, 0.0), sum_gx(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        sum_g[j] += g[i * m + j];
        sum_gx[j] += g[i * m + j] * xhat_[i * m + j];
      }
    if (gin[1])
      for (std::size_t j = 0; j < m; ++j) (*gin[1])[j] += sum_gx[j];
    if (gin[2])
      for (std::size_t j = 0; j < m; ++j) (*gin[2])[j] += sum_g[j];
    if (Tensor* gx = gin[0]) {
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double dxhat = g[i * m + j] * gamma[j];
          if (training_) {
            // dx = inv_std/n * (n*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
            (*gx)[i * m + j] += inv_std_[j] * inv_n *
                                (static_cast<double>(n) * dxhat - gamma[j] * sum_g[j] -
                                 xhat_[i * m + j] * gamma[j] * sum_gx[j]);
          } else {
            (*gx)[i * m + j] += dxhat * inv_std_[j];
          }
        }
    }
  }

 private:
  const BatchNormState* stats_;
  BatchNormState* update_;
  bool force_eval_;
  double eps_;
  bool training_ = true;
  std::vector<double> mean_;
  std::vector<double> inv_std_;
  Tensor xhat_;
};

class WeightedMseOp final : public Op {
 public:
  std::string_view name() const override { return "weighted_mse"; }
  Tensor forward(std::span<const Tensor* const> in, bool) override {
    require_same(name(), *in[0], *in[1]);
    require_same(name(), *in[0], *in[2]);
    const Tensor& p = *in[0];
    const Tensor& t = *in[1];
    const Tensor& w = *in[2];
    double num = 0.0;
    total_weight_ = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (w[i] < 0.0) throw NumericError("weighted_mse: negative weight");
      if (w[i] == 0.0) continue;
      const double d = p[i] - t[i];
      num += w[i] * d * d;
      total_weight_ += w[i];
    }
    return Tensor::scalar(total_weight_ > 0.0 ? num / total_weight_ : 0.0);
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) override {
    if (total_weight_ == 0.0) return;
    const Tensor& p = *in[0];
    const Tensor& t = *in[1];
    const Tensor& w = *in[2];
    const double s = 2.0 * g[0] / total_weight_;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double d = s * w[i] * (p[i] - t[i]);
      if (gin[0]) (*gin[0])[i] += d;
      if (gin[1]) (*gin[1])[i] -= d;
    }
  }

 private:
  double total_weight_ = 0.0;
};

}  // namespace

Var Tape::input(std::string name) {
  Node n{Kind::Input, std::move(name), nullptr, {}, {}, {}, nullptr, nullptr, false, 0};
  nodes_.push_back(std::move(n));
  forwarded_ = false;
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node n{Kind::Constant, "constant", nullptr, {}, std::move(value), {}, nullptr, nullptr, false, 0};
  nodes_.push_back(std::move(n));
  forwarded_ = false;
  return Var{nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  if (!p.grad.same_shape(p.value)) p.grad = Tensor(p.value.shape(), 0.0);
  Node n{Kind::Param, p.name, nullptr, {}, {}, {}, &p, &p, true, 0};
  nodes_.push_back(std::move(n));
  forwarded_ = false;
  return Var{nodes_.size() - 1};
}

Var Tape::frozen(const Parameter& p) {
  Node n{Kind::Param, p.name, nullptr, {}, {}, {}, &p, nullptr, false, 0};
  nodes_.push_back(std::move(n));
  forwarded_ = false;
  return Var{nodes_.size() - 1};
}

Var Tape::apply(std::unique_ptr<Op> op, std::vector<Var> inputs) {
  Node n{Kind::Compute, std::string(op->name()), std::move(op), {}, {}, {}, nullptr, nullptr, false, 0};
  for (Var v : inputs) {
    if (v.id >= nodes_.size()) throw std::out_of_range("tape: unknown node");
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  nodes_.push_back(std::move(n));
  forwarded_ = false;
  return Var{nodes_.size() - 1};
}

Var Tape::matmul(Var a, Var b) { return apply(std::make_unique<MatMulOp>(), {a, b}); }
Var Tape::add(Var a, Var b) { return apply(std::make_unique<AddOp>(), {a, b}); }
Var Tape::add_bias(Var x, Var bias) { return apply(std::make_unique<AddBiasOp>(), {x, bias}); }
Var Tape::mul(Var a, Var b) { return apply(std::make_unique<MulOp>(), {a, b}); }
Var Tape::scale(Var x, double f) { return apply(std::make_unique<ScaleOp>(f), {x}); }
Var Tape::relu(Var x) { return apply(std::make_unique<ReluOp>(), {x}); }
Var Tape::sum(Var x) { return apply(std::make_unique<SumOp>(), {x}); }
Var Tape::concat_cols(Var a, Var b) { return apply(std::make_unique<ConcatColsOp>(), {a, b}); }
Var Tape::dropout(Var x, double rate, std::uint64_t seed) {
  return apply(std::make_unique<DropoutOp>(rate, seed), {x});
}
Var Tape::batch_norm(Var x, Var gamma, Var beta, BatchNormState* state) {
  return apply(std::make_unique<BatchNormOp>(state, state, false), {x, gamma, beta});
}
Var Tape::batch_norm_eval(Var x, Var gamma, Var beta, const BatchNormState& state) {
  return apply(std::make_unique<BatchNormOp>(&state, nullptr, true), {x, gamma, beta});
}
Var Tape::weighted_mse(Var pred, Var target, Var weight) {
  return apply(std::make_unique<WeightedMseOp>(), {pred, target, weight});
}

const Tensor& Tape::node_value(std::size_t i) const {
  const Node& n = nodes_[i];
  return n.kind == Kind::Param ? n.param->value : n.value;
}

Tensor* Tape::node_grad(std::size_t i) {
  Node& n = nodes_[i];
  if (!n.requires_grad) return nullptr;
  if (n.kind == Kind::Param) return &n.trainable->grad;
  if (!n.grad.same_shape(n.value)) n.grad = Tensor(n.value.shape(), 0.0);
  return &n.grad;
}

void Tape::forward(std::map<std::string, Tensor> inputs, bool training) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    switch (n.kind) {
      case Kind::Input: {
        auto it = inputs.find(n.name);
        if (it == inputs.end()) throw ShapeError("forward: input '" + n.name + "' is not bound");
        n.value = std::move(it->second);
        inputs.erase(it);
        break;
      }
      case Kind::Constant:
      case Kind::Param: break;
      case Kind::Compute: {
        std::vector<const Tensor*> in;
        in.reserve(n.inputs.size());
        for (std::size_t id : n.inputs) in.push_back(&node_value(id));
        n.value = n.op->forward(in, training);
        if (!n.value.all_finite()) throw NumericError(n.name + ": non-finite value in forward pass");
        break;
      }
    }
    n.grad = Tensor();
    ++n.evaluations;
  }
  forwarded_ = true;
}

void Tape::backward(Var loss) {
  if (!forwarded_) throw Error("backward called before forward");
  if (loss.id >= nodes_.size()) throw std::out_of_range("tape: unknown node");
  if (node_value(loss.id).size() != 1) throw ShapeError("backward: loss must be a scalar");
  if (!nodes_[loss.id].requires_grad) return;
  for (Node& n : nodes_)
    if (n.kind != Kind::Param) n.grad = Tensor();
  Tensor* seed = node_grad(loss.id);
  (*seed)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.kind != Kind::Compute || !n.requires_grad || n.grad.size() == 0) continue;
    std::vector<const Tensor*> in;
    std::vector<Tensor*> gin;
    for (std::size_t id : n.inputs) {
      in.push_back(&node_value(id));
      gin.push_back(node_grad(id));
    }
    n.op->backward(in, n.value, n.grad, gin);
  }
}

const Tensor& Tape::value(Var v) const { return node_value(v.id); }

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.trainable ? n.trainable->grad : n.grad;
}

void Adam::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params)
    if (!p->grad.all_finite()) throw NumericError("adam: non-finite gradient for " + p->name);
  if (state_.m.size() != params.size()) {
    state_.m.clear();
    state_.v.clear();
    for (const Parameter* p : params) {
      state_.m.emplace_back(p->value.shape(), 0.0);
      state_.v.emplace_back(p->value.shape(), 0.0);
    }
  }
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state_.m[k];
    Tensor& v = state_.v[k];
    if (!m.same_shape(p.value)) throw ShapeError("adam: state shape mismatch for " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace padme
