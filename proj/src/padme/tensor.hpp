#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace padme {

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) { return Tensor({rows, cols}, fill); }
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / shape_[0]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  void fill(double v);
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape(), 0.0) {}
  void zero_grad() { grad.fill(0.0); }
};

struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.9;
  double epsilon = 1e-5;

  explicit BatchNormState(std::size_t width = 0)
      : running_mean({width}, 0.0), running_var({width}, 1.0) {}
};

struct Var {
  std::size_t id = 0;
};

/// A differentiable operation. Gradients are accumulated (+=) into the
/// non-null entries of grad_inputs.
class Op {
 public:
  virtual ~Op() = default;
  virtual std::string_view name() const = 0;
  virtual Tensor forward(std::span<const Tensor* const> inputs, bool training) = 0;
  virtual void backward(std::span<const Tensor* const> inputs, const Tensor& output, const Tensor& grad_output,
                        std::span<Tensor* const> grad_inputs) = 0;
};

/// Computation graph recorded in construction order (which is therefore a
/// topological order). forward() evaluates every node exactly once;
/// backward() propagates from a scalar node into Parameter::grad.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var input(std::string name);
  Var constant(Tensor value);
  Var param(Parameter& p);
  // Parameter read as a constant: no gradient is tracked for it.
  Var frozen(const Parameter& p);
  Var apply(std::unique_ptr<Op> op, std::vector<Var> inputs);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var add_bias(Var x, Var bias);
  Var mul(Var a, Var b);
  Var scale(Var x, double factor);
  Var relu(Var x);
  Var sum(Var x);
  Var concat_cols(Var a, Var b);
  // Inverted dropout; the mask is a pure function of seed so repeated
  // forwards reproduce it.
  Var dropout(Var x, double rate, std::uint64_t seed);
  // Normalizes columns. In training mode batch statistics are used and, when
  // state is non-null, folded into its running averages.
  Var batch_norm(Var x, Var gamma, Var beta, BatchNormState* state);
  // Always normalizes with the given running statistics.
  Var batch_norm_eval(Var x, Var gamma, Var beta, const BatchNormState& state);
  // sum(w * (pred - target)^2) / sum(w); zero when all weights are zero.
  Var weighted_mse(Var pred, Var target, Var weight);

  void forward(std::map<std::string, Tensor> inputs = {}, bool training = true);
  void backward(Var loss);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  std::size_t evaluation_count(Var v) const { return nodes_.at(v.id).evaluations; }
  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Kind { Input, Constant, Param, Compute };
  struct Node {
    Kind kind;
    std::string name;
    std::unique_ptr<Op> op;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    const Parameter* param = nullptr;
    Parameter* trainable = nullptr;
    bool requires_grad = false;
    std::size_t evaluations = 0;
  };

  const Tensor& node_value(std::size_t i) const;
  Tensor* node_grad(std::size_t i);

  std::vector<Node> nodes_;
  bool forwarded_ = false;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// One bias-corrected update of every parameter from its grad. Throws
  /// NumericError, leaving state untouched, if any gradient is non-finite.
  void step(std::span<Parameter* const> params);

  const AdamConfig& config() const { return cfg_; }
  AdamConfig& config() { return cfg_; }
  const AdamState& state() const { return state_; }
  AdamState& state() { return state_; }

 private:
  AdamConfig cfg_;
  AdamState state_;
};

void zero_grads(std::span<Parameter* const> params);

}  // namespace padme
