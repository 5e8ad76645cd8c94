#include "fxcast/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fxcast/error.hpp"

namespace fxcast::ad {

struct TensorData {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool has_grad = false;
  bool requires_grad = false;

  std::vector<double>& grad_buffer() {
    if (!has_grad) {
      grad.assign(values.size(), 0.0);
      has_grad = true;
    }
    return grad;
  }
};

struct Access {
  static TensorData& data(const Tensor& t) { return *t.data_; }
  static const std::shared_ptr<TensorData>& ptr(const Tensor& t) { return t.data_; }
  static Tensor wrap(std::shared_ptr<TensorData> d) { return Tensor(std::move(d)); }
};

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor::Tensor() : data_(std::make_shared<TensorData>()) { data_->values.assign(1, 0.0); }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  auto data = std::make_shared<TensorData>();
  data->values.assign(shape_size(shape), value);
  data->shape = std::move(shape);
  data->requires_grad = requires_grad;
  return Tensor(std::move(data));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape_size(shape)) {
    throw Error(ErrorKind::shape, "shape " + shape_string(shape) + " needs " +
                                      std::to_string(shape_size(shape)) + " values, got " +
                                      std::to_string(values.size()));
  }
  auto data = std::make_shared<TensorData>();
  data->shape = std::move(shape);
  data->values = std::move(values);
  data->requires_grad = requires_grad;
  return Tensor(std::move(data));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return data_->shape; }
std::size_t Tensor::size() const { return data_->values.size(); }
std::span<const double> Tensor::values() const { return data_->values; }
std::span<double> Tensor::mutable_values() { return data_->values; }

double Tensor::item() const {
  if (size() != 1) {
    throw Error(ErrorKind::rank, "item() on tensor of shape " + shape_string(shape()));
  }
  return data_->values[0];
}

bool Tensor::requires_grad() const { return data_->requires_grad; }
Tensor& Tensor::set_requires_grad(bool value) {
  data_->requires_grad = value;
  return *this;
}

bool Tensor::has_grad() const { return data_->has_grad; }
std::span<const double> Tensor::grad() const {
  if (!data_->has_grad) throw Error(ErrorKind::unready_parameter, "tensor has no gradient");
  return data_->grad;
}
void Tensor::clear_grad() {
  data_->grad.clear();
  data_->has_grad = false;
}

Tensor Tensor::detach() const { return from(shape(), data_->values, false); }

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

namespace {
thread_local Graph* g_active = nullptr;
}

Graph::Graph() : previous_(g_active) { g_active = this; }
Graph::~Graph() { g_active = previous_; }

Graph* Graph::active() noexcept { return g_active; }

void Graph::record(Node node) {
  if (consumed_) {
    throw Error(ErrorKind::consumed_graph, "cannot record onto a graph after backward()");
  }
  nodes_.push_back(std::move(node));
}

void Graph::backward(const Tensor& loss) {
  if (consumed_) throw Error(ErrorKind::consumed_graph, "backward() already ran on this graph");
  if (loss.size() != 1) {
    throw Error(ErrorKind::rank,
                "backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (nodes_.empty()) throw Error(ErrorKind::empty_data, "graph has no recorded operations");
  const auto& loss_data = Access::ptr(loss);
  const bool recorded = std::any_of(nodes_.rbegin(), nodes_.rend(),
                                    [&](const Node& n) { return n.output == loss_data; });
  if (!recorded) throw Error(ErrorKind::empty_data, "loss was not recorded on this graph");

  consumed_ = true;
  loss_data->grad_buffer()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output->has_grad) it->backward();
  }
  nodes_.clear();
  nodes_.shrink_to_fit();
}

NoGradScope::NoGradScope() : saved_(g_active) { g_active = nullptr; }
NoGradScope::~NoGradScope() { g_active = saved_; }

void backward(const Tensor& loss) {
  Graph* graph = Graph::active();
  if (!graph) throw Error(ErrorKind::empty_data, "no active graph");
  graph->backward(loss);
}

// ---------------------------------------------------------------------------
// Primitive helpers
// ---------------------------------------------------------------------------

namespace {

using DataPtr = std::shared_ptr<TensorData>;

Graph* recorder(std::initializer_list<const Tensor*> inputs) {
  Graph* graph = Graph::active();
  if (!graph) return nullptr;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return graph;
  }
  return nullptr;
}

Tensor make(Shape shape) { return Tensor::zeros(std::move(shape)); }

void record(Graph* graph, std::vector<DataPtr> inputs, const Tensor& out,
            std::function<void()> backward_fn) {
  Access::data(out).requires_grad = true;
  graph->record({std::move(inputs), Access::ptr(out), std::move(backward_fn)});
}

/// Broadcast layout for binary elementwise ops: `small` repeats every
/// small.size() elements of `big`.
struct Pairing {
  const Tensor* big;
  const Tensor* small;
};

Pairing pair_shapes(const Tensor& a, const Tensor& b, std::string_view op) {
  auto fits = [](const Shape& big, const Shape& small) {
    if (big == small) return true;
    if (small.size() + 1 == big.size() && std::equal(small.begin(), small.end(), big.begin() + 1)) {
      return true;
    }
    return small.size() == big.size() && !small.empty() && small[0] == 1 &&
           std::equal(small.begin() + 1, small.end(), big.begin() + 1);
  };
  if (fits(a.shape(), b.shape())) return {&a, &b};
  if (fits(b.shape(), a.shape())) return {&b, &a};
  throw Error(ErrorKind::shape, std::string(op) + ": shapes " + shape_string(a.shape()) +
                                    " and " + shape_string(b.shape()) + " do not conform");
}

template <class Forward, class Derivative>
Tensor unary(const Tensor& x, Forward forward, Derivative derivative) {
  Tensor out = make(x.shape());
  auto xs = x.values();
  auto ys = out.mutable_values();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = forward(xs[i]);
  if (Graph* graph = recorder({&x})) {
    DataPtr xd = Access::ptr(x);
    DataPtr od = Access::ptr(out);
    record(graph, {xd}, out, [xd, od, derivative] {
      if (!xd->requires_grad) return;
      auto& gx = xd->grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        gx[i] += od->grad[i] * derivative(xd->values[i], od->values[i]);
      }
    });
  }
  return out;
}

struct AxisLayout {
  std::size_t outer = 1;
  std::size_t inner = 1;
};

AxisLayout layout(const Shape& shape, std::size_t axis) {
  AxisLayout l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

}  // namespace

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw Error(ErrorKind::shape, "matmul: shapes " + shape_string(a.shape()) + " and " +
                                      shape_string(b.shape()) + " do not conform");
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  Tensor out = make({m, n});
  auto A = a.values();
  auto B = b.values();
  auto C = out.mutable_values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) C[i * n + j] += aip * B[p * n + j];
    }
  }
  if (Graph* graph = recorder({&a, &b})) {
    DataPtr ad = Access::ptr(a), bd = Access::ptr(b), od = Access::ptr(out);
    record(graph, {ad, bd}, out, [ad, bd, od, m, k, n] {
      const auto& G = od->grad;
      if (ad->requires_grad) {
        auto& gA = ad->grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += G[i * n + j] * bd->values[p * n + j];
            gA[i * k + p] += acc;
          }
        }
      }
      if (bd->requires_grad) {
        auto& gB = bd->grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = ad->values[i * k + p];
            for (std::size_t j = 0; j < n; ++j) gB[p * n + j] += aip * G[i * n + j];
          }
        }
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  auto [big, small] = pair_shapes(a, b, "add");
  Tensor out = make(big->shape());
  auto X = big->values();
  auto Y = small->values();
  auto Z = out.mutable_values();
  const std::size_t period = Y.size();
  for (std::size_t i = 0; i < Z.size(); ++i) Z[i] = X[i] + Y[i % period];
  if (Graph* graph = recorder({&a, &b})) {
    DataPtr xd = Access::ptr(*big), yd = Access::ptr(*small), od = Access::ptr(out);
    record(graph, {xd, yd}, out, [xd, yd, od, period] {
      const auto& G = od->grad;
      if (xd->requires_grad) {
        auto& gx = xd->grad_buffer();
        for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i];
      }
      if (yd->requires_grad) {
        auto& gy = yd->grad_buffer();
        for (std::size_t i = 0; i < G.size(); ++i) gy[i % period] += G[i];
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, neg(b)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  auto [big, small] = pair_shapes(a, b, "mul");
  Tensor out = make(big->shape());
  auto X = big->values();
  auto Y = small->values();
  auto Z = out.mutable_values();
  const std::size_t period = Y.size();
  for (std::size_t i = 0; i < Z.size(); ++i) Z[i] = X[i] * Y[i % period];
  if (Graph* graph = recorder({&a, &b})) {
    DataPtr xd = Access::ptr(*big), yd = Access::ptr(*small), od = Access::ptr(out);
    record(graph, {xd, yd}, out, [xd, yd, od, period] {
      const auto& G = od->grad;
      if (xd->requires_grad) {
        auto& gx = xd->grad_buffer();
        for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i] * yd->values[i % period];
      }
      if (yd->requires_grad) {
        auto& gy = yd->grad_buffer();
        for (std::size_t i = 0; i < G.size(); ++i) gy[i % period] += G[i] * xd->values[i];
      }
    });
  }
  return out;
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(x, [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& x, double value) {
  return unary(x, [value](double v) { return v * value; },
               [value](double, double) { return value; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor log(const Tensor& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x.at(i) > 0.0)) {
      throw Error(ErrorKind::domain, "log of non-positive value at index " + std::to_string(i));
    }
  }
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor exp(const Tensor& x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor neg(const Tensor& x) {
  return unary(x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw Error(ErrorKind::shape, "concat of zero tensors");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) {
    throw Error(ErrorKind::shape, "concat axis " + std::to_string(axis) + " out of range for " +
                                      shape_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw Error(ErrorKind::shape, "concat: shapes " + shape_string(first) + " and " +
                                        shape_string(s) + " do not conform");
    }
    out_shape[axis] += s[axis];
  }
  const auto lay = layout(out_shape, axis);
  Tensor out = make(out_shape);
  auto Z = out.mutable_values();
  std::size_t pos = 0;
  for (std::size_t o = 0; o < lay.outer; ++o) {
    for (const auto& p : parts) {
      const std::size_t chunk = p.shape()[axis] * lay.inner;
      auto src = p.values().subspan(o * chunk, chunk);
      std::copy(src.begin(), src.end(), Z.begin() + static_cast<std::ptrdiff_t>(pos));
      pos += chunk;
    }
  }

  Graph* graph = Graph::active();
  const bool any = std::any_of(parts.begin(), parts.end(),
                               [](const Tensor& t) { return t.requires_grad(); });
  if (graph && any) {
    std::vector<DataPtr> inputs;
    std::vector<std::size_t> chunks;
    for (const auto& p : parts) {
      inputs.push_back(Access::ptr(p));
      chunks.push_back(p.shape()[axis] * lay.inner);
    }
    DataPtr od = Access::ptr(out);
    const std::size_t outer = lay.outer;
    record(graph, inputs, out, [inputs, chunks, od, outer] {
      std::size_t offset = 0;
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          if (inputs[k]->requires_grad) {
            auto& g = inputs[k]->grad_buffer();
            for (std::size_t i = 0; i < chunks[k]; ++i) g[o * chunks[k] + i] += od->grad[offset + i];
          }
          offset += chunks[k];
        }
      }
    });
  }
  return out;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& in_shape = x.shape();
  if (axis >= in_shape.size() || begin > end || end > in_shape[axis]) {
    throw Error(ErrorKind::shape, "slice [" + std::to_string(begin) + "," + std::to_string(end) +
                                      ") on axis " + std::to_string(axis) + " of " +
                                      shape_string(in_shape));
  }
  Shape out_shape = in_shape;
  out_shape[axis] = end - begin;
  const auto lay = layout(in_shape, axis);
  const std::size_t in_chunk = in_shape[axis] * lay.inner;
  const std::size_t out_chunk = (end - begin) * lay.inner;
  const std::size_t skip = begin * lay.inner;
  Tensor out = make(out_shape);
  auto X = x.values();
  auto Z = out.mutable_values();
  for (std::size_t o = 0; o < lay.outer; ++o) {
    for (std::size_t i = 0; i < out_chunk; ++i) Z[o * out_chunk + i] = X[o * in_chunk + skip + i];
  }
  if (Graph* graph = recorder({&x})) {
    DataPtr xd = Access::ptr(x), od = Access::ptr(out);
    const std::size_t outer = lay.outer;
    record(graph, {xd}, out, [xd, od, outer, in_chunk, out_chunk, skip] {
      auto& g = xd->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < out_chunk; ++i) {
          g[o * in_chunk + skip + i] += od->grad[o * out_chunk + i];
        }
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw Error(ErrorKind::shape, "reshape " + shape_string(x.shape()) + " to " +
                                      shape_string(shape) + " changes element count");
  }
  Tensor out = Tensor::from(std::move(shape), std::vector<double>(x.values().begin(),
                                                                  x.values().end()));
  if (Graph* graph = recorder({&x})) {
    DataPtr xd = Access::ptr(x), od = Access::ptr(out);
    record(graph, {xd}, out, [xd, od] {
      auto& g = xd->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += od->grad[i];
    });
  }
  return out;
}

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  if (input.rank() != 3 || weight.rank() != 3 || weight.shape()[1] != input.shape()[2] ||
      bias.size() != weight.shape()[2] || stride == 0) {
    throw Error(ErrorKind::shape, "conv1d: input " + shape_string(input.shape()) + ", weight " +
                                      shape_string(weight.shape()) + ", bias " +
                                      shape_string(bias.shape()) + " do not conform");
  }
  const std::size_t batch = input.shape()[0], length = input.shape()[1],
                    c_in = input.shape()[2];
  const std::size_t kernel = weight.shape()[0], c_out = weight.shape()[2];
  if (length + 2 * padding < kernel) {
    throw Error(ErrorKind::shape, "conv1d: sequence length " + std::to_string(length) +
                                      " shorter than kernel " + std::to_string(kernel));
  }
  const std::size_t out_len = (length + 2 * padding - kernel) / stride + 1;
  Tensor out = make({batch, out_len, c_out});
  auto X = input.values();
  auto W = weight.values();
  auto Bv = bias.values();
  auto Z = out.mutable_values();

  // Visits every (output, tap) pair with its input position, skipping padding.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t t = 0; t < out_len; ++t) {
        for (std::size_t k = 0; k < kernel; ++k) {
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * stride + k) -
                                     static_cast<std::ptrdiff_t>(padding);
          if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(length)) continue;
          fn(b, t, k, static_cast<std::size_t>(pos));
        }
      }
    }
  };

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < out_len; ++t) {
      for (std::size_t co = 0; co < c_out; ++co) Z[(b * out_len + t) * c_out + co] = Bv[co];
    }
  }
  for_each_tap([&](std::size_t b, std::size_t t, std::size_t k, std::size_t pos) {
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const double xv = X[(b * length + pos) * c_in + ci];
      const double* wrow = &W[(k * c_in + ci) * c_out];
      double* zrow = &Z[(b * out_len + t) * c_out];
      for (std::size_t co = 0; co < c_out; ++co) zrow[co] += xv * wrow[co];
    }
  });

  if (Graph* graph = recorder({&input, &weight, &bias})) {
    DataPtr xd = Access::ptr(input), wd = Access::ptr(weight), bd = Access::ptr(bias),
            od = Access::ptr(out);
    record(graph, {xd, wd, bd}, out,
           [xd, wd, bd, od, for_each_tap, c_in, c_out, out_len, length, batch] {
             const auto& G = od->grad;
             if (bd->requires_grad) {
               auto& gb = bd->grad_buffer();
               for (std::size_t r = 0; r < batch * out_len; ++r) {
                 for (std::size_t co = 0; co < c_out; ++co) gb[co] += G[r * c_out + co];
               }
             }
             std::vector<double>* gx = xd->requires_grad ? &xd->grad_buffer() : nullptr;
             std::vector<double>* gw = wd->requires_grad ? &wd->grad_buffer() : nullptr;
             if (!gx && !gw) return;
             for_each_tap([&](std::size_t b, std::size_t t, std::size_t k, std::size_t pos) {
               const double* grow = &G[(b * out_len + t) * c_out];
               for (std::size_t ci = 0; ci < c_in; ++ci) {
                 const std::size_t xi = (b * length + pos) * c_in + ci;
                 const std::size_t wbase = (k * c_in + ci) * c_out;
                 if (gx) {
                   double acc = 0.0;
                   for (std::size_t co = 0; co < c_out; ++co) acc += grow[co] * wd->values[wbase + co];
                   (*gx)[xi] += acc;
                 }
                 if (gw) {
                   const double xv = xd->values[xi];
                   for (std::size_t co = 0; co < c_out; ++co) (*gw)[wbase + co] += grow[co] * xv;
                 }
               }
             });
           });
  }
  return out;
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorKind::domain, "dropout rate must lie in [0, 1)");
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.uniform() >= rate ? keep_scale : 0.0;
  Tensor out = make(x.shape());
  auto X = x.values();
  auto Z = out.mutable_values();
  for (std::size_t i = 0; i < Z.size(); ++i) Z[i] = X[i] * mask[i];
  if (Graph* graph = recorder({&x})) {
    DataPtr xd = Access::ptr(x), od = Access::ptr(out);
    record(graph, {xd}, out, [xd, od, mask = std::move(mask)] {
      auto& g = xd->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += od->grad[i] * mask[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  Tensor out = Tensor::scalar(total);
  if (Graph* graph = recorder({&x})) {
    DataPtr xd = Access::ptr(x), od = Access::ptr(out);
    record(graph, {xd}, out, [xd, od] {
      auto& g = xd->grad_buffer();
      for (double& gi : g) gi += od->grad[0];
    });
  }
  return out;
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw Error(ErrorKind::empty_data, "mean of empty tensor");
  return mul_scalar(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor binary_cross_entropy(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw Error(ErrorKind::shape, "binary_cross_entropy: shapes " + shape_string(pred.shape()) +
                                      " and " + shape_string(target.shape()) + " differ");
  }
  if (pred.size() == 0) throw Error(ErrorKind::empty_data, "binary_cross_entropy of empty input");
  auto P = pred.values();
  auto T = target.values();
  double total = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (!(P[i] > 0.0 && P[i] < 1.0)) {
      throw Error(ErrorKind::domain, "binary_cross_entropy prediction " + std::to_string(P[i]) +
                                         " outside (0, 1) at index " + std::to_string(i));
    }
    total += T[i] * std::log(P[i]) + (1.0 - T[i]) * std::log1p(-P[i]);
  }
  const double n = static_cast<double>(P.size());
  Tensor out = Tensor::scalar(-total / n);
  if (Graph* graph = recorder({&pred})) {
    DataPtr pd = Access::ptr(pred), td = Access::ptr(target), od = Access::ptr(out);
    record(graph, {pd}, out, [pd, td, od, n] {
      auto& g = pd->grad_buffer();
      const double scale = od->grad[0] / n;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double p = pd->values[i], t = td->values[i];
        g[i] += scale * (-t / p + (1.0 - t) / (1.0 - p));
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

namespace {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

// Below this, rounding in f swamps a central difference taken in doubles.
double resolution_floor(double f) { return 1e-6 * std::max(1.0, std::abs(f)); }

}  // namespace

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double h) {
  Tensor* only = &x;
  return grad_check([&] { return f(*only); }, std::span<Tensor>(only, 1), h);
}

double grad_check(const std::function<Tensor()>& f, std::span<Tensor> params, double h) {
  std::vector<bool> previous(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    previous[p] = params[p].requires_grad();
    params[p].set_requires_grad(true);
    params[p].clear_grad();
  }

  std::vector<std::vector<double>> analytic(params.size());
  double floor = 0.0;
  {
    Graph graph;
    Tensor loss = f();
    floor = resolution_floor(loss.item());
    graph.backward(loss);
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].has_grad()) {
      analytic[p].assign(params[p].grad().begin(), params[p].grad().end());
    } else {
      analytic[p].assign(params[p].size(), 0.0);
    }
    params[p].clear_grad();
  }

  double worst = 0.0;
  NoGradScope no_grad;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto values = params[p].mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      const double up = f().item();
      values[i] = original - h;
      const double down = f().item();
      values[i] = original;
      worst = std::max(worst, relative_error(analytic[p][i], (up - down) / (2.0 * h), floor));
    }
    params[p].set_requires_grad(previous[p]);
  }
  return worst;
}

}  // namespace fxcast::ad
