#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fxcast/rng.hpp"

// Reverse-mode differentiation over dense row-major tensors of doubles.
//
// Operations record themselves on the thread's active Graph when any operand
// requires a gradient. Without an active graph every op is a plain forward
// computation, which is how inference and finite differencing run.
namespace fxcast::ad {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

struct TensorData;
class Graph;

/// Shared handle: copies alias the same storage, as parameters and graph
/// nodes need to.
class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const;
  std::size_t size() const;
  std::size_t rank() const { return shape().size(); }

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double at(std::size_t i) const { return values()[i]; }
  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool value);

  bool has_grad() const;
  std::span<const double> grad() const;
  void clear_grad();

  /// Copy of the values with no gradient tracking.
  Tensor detach() const;
  bool same_storage(const Tensor& other) const { return data_ == other.data_; }

 private:
  explicit Tensor(std::shared_ptr<TensorData> data) : data_(std::move(data)) {}
  std::shared_ptr<TensorData> data_;

  friend class Graph;
  friend struct Access;
};

/// Tape of executed operations for one forward pass. Constructing a Graph
/// makes it the active graph for the calling thread until it is destroyed.
class Graph {
 public:
  Graph();
  ~Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Populates grads of every requires_grad leaf reachable from `loss`,
  /// visiting nodes in reverse execution order. One backward per graph.
  void backward(const Tensor& loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }

  static Graph* active() noexcept;

  struct Node {
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::shared_ptr<TensorData> output;
    std::function<void()> backward;
  };

  void record(Node node);

 private:
  std::vector<Node> nodes_;
  Graph* previous_ = nullptr;
  bool consumed_ = false;
};

/// Suspends recording on this thread for its lifetime.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Graph* saved_;
};

/// backward on the active graph.
void backward(const Tensor& loss);

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

/// [M,K] x [K,N] -> [M,N].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise with broadcasting of the lower-rank (or leading-1) operand
/// over a single leading batch dimension.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& x, double value);
Tensor mul_scalar(const Tensor& x, double value);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor neg(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);
/// Half-open range [begin, end) along `axis`.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& x, Shape shape);

/// Cross-correlation over time. input [B, L, C_in] (channels last),
/// weight [K, C_in, C_out], bias [C_out] -> [B, L_out, C_out] with
/// L_out = (L + 2 * padding - K) / stride + 1. Zero padding.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t stride = 1, std::size_t padding = 0);

/// Inverted dropout: kept activations are scaled by 1 / (1 - rate) in
/// training; identity when `training` is false.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Mean of -[t log p + (1 - t) log(1 - p)]; p must lie in (0, 1).
Tensor binary_cross_entropy(const Tensor& pred, const Tensor& target);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

/// Max over coordinates of |analytic - central difference| /
/// max(|analytic|, |numeric|, 1e-6 * max(1, |f(x)|)). The floor is the
/// resolution of a double-precision central difference; smaller gradients are
/// judged on absolute error instead. `x` is perturbed in place and restored.
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double h = 1e-5);

/// Same, over every element of every tensor in `params`.
double grad_check(const std::function<Tensor()>& f, std::span<Tensor> params, double h = 1e-5);

}  // namespace fxcast::ad
