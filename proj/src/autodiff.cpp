// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "difflab/errors.hpp"
#include "difflab/kernels.hpp"
#include "difflab/rng.hpp"

namespace difflab::ad {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool GradMode::enabled() { return g_grad_enabled; }
void GradMode::set_enabled(bool on) { g_grad_enabled = on; }

template <typename Real>
Tensor<Real>::Tensor(NdArray<Real> value, bool requires_grad) : node_(std::make_shared<detail::Node<Real>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename Real>
NdArray<Real>& Tensor<Real>::mutable_value() {
  if (!is_leaf()) throw Error("mutable_value() on a non-leaf tensor");
  return node_->value;
}

template <typename Real>
void Tensor<Real>::zero_grad() {
  node_->grad = NdArray<Real>(node_->value.shape());
}

template <typename Real>
Tensor<Real> Tensor<Real>::from_op(NdArray<Real> value, std::vector<Tensor> inputs, detail::BackwardFn<Real> backward,
                                   const char* op) {
  Tensor out(std::move(value), false);
  const bool record =
      GradMode::enabled() && std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (record) {
    out.node_->requires_grad = true;
    out.node_->op = op;
    out.node_->inputs = std::move(inputs);
    out.node_->backward = std::move(backward);
  }
  return out;
}

namespace {

template <typename Real>
using T = Tensor<Real>;
template <typename Real>
using Inputs = std::vector<Tensor<Real>>;

template <typename Real>
void require_rank2(const T<Real>& a, const char* op) {
  if (a.shape().size() != 2) throw ShapeError(std::string(op) + " needs a rank-2 tensor, got " + shape_string(a.shape()));
}

template <typename Real>
void require_same(const T<Real>& a, const T<Real>& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
}

template <typename Real, typename F>
NdArray<Real> map_unary(const NdArray<Real>& a, F f) {
  NdArray<Real> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename Real, typename F>
NdArray<Real> map_binary(const NdArray<Real>& a, const NdArray<Real>& b, F f) {
  NdArray<Real> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

// d/dx silu(x) = s (1 + x (1 - s)), s = sigmoid(x)
template <typename Real>
Real silu_d1(Real x) {
  const Real s = sigmoid(x);
  return s * (Real(1) + x * (Real(1) - s));
}

// d^2/dx^2 silu(x) = s (1 - s) (2 + x (1 - 2 s))
template <typename Real>
Real silu_d2(Real x) {
  const Real s = sigmoid(x);
  return s * (Real(1) - s) * (Real(2) + x * (Real(1) - Real(2) * s));
}

template <typename Real>
T<Real> silu_second(const T<Real>& a) {
  return T<Real>::from_op(
      map_unary(a.value(), silu_d2<Real>), {a},
      [](const T<Real>&, const Inputs<Real>&) -> Inputs<Real> {
        throw Error("third derivative of silu is not supported");
      },
      "silu_second");
}

template <typename Real>
T<Real> silu_first(const T<Real>& a) {
  return T<Real>::from_op(
      map_unary(a.value(), silu_d1<Real>), {a},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> { return {mul(g, silu_second(in[0]))}; },
      "silu_grad");
}

}  // namespace

template <typename Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  if (b.shape()[0] != k)
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  NdArray<Real> out(Shape{n, m});
  kernels::parallel::gemm<Real>(a.value().data(), b.value().data(), out.data(), n, k, m);
  return Tensor<Real>::from_op(
      std::move(out), {a, b},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        Inputs<Real> r(2);
        if (in[0].requires_grad()) r[0] = matmul(g, transpose(in[1]));
        if (in[1].requires_grad()) r[1] = matmul(transpose(in[0]), g);
        return r;
      },
      "matmul");
}

template <typename Real>
Tensor<Real> transpose(const Tensor<Real>& a) {
  require_rank2(a, "transpose");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  NdArray<Real> out(Shape{m, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = a.value()[i * m + j];
  return Tensor<Real>::from_op(
      std::move(out), {a},
      [](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {transpose(g)}; }, "transpose");
}

template <typename Real>
Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.shape() == b.shape()) {
    return Tensor<Real>::from_op(
        map_binary(a.value(), b.value(), [](Real x, Real y) { return x + y; }), {a, b},
        [](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {g, g}; }, "add");
  }
  const bool row_broadcast = a.shape().size() == 2 && b.shape().size() == 2 && b.shape()[0] == 1 &&
                             b.shape()[1] == a.shape()[1];
  if (!row_broadcast)
    throw ShapeError("add: incompatible shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  NdArray<Real> out = a.value();
  const std::size_t m = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += b.value()[j];
  return Tensor<Real>::from_op(
      std::move(out), {a, b},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        Inputs<Real> r(2);
        if (in[0].requires_grad()) r[0] = g;
        if (in[1].requires_grad()) r[1] = sum_rows(g);
        return r;
      },
      "add_row");
}

template <typename Real>
Tensor<Real> sub(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same(a, b, "sub");
  return Tensor<Real>::from_op(
      map_binary(a.value(), b.value(), [](Real x, Real y) { return x - y; }), {a, b},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        Inputs<Real> r(2);
        if (in[0].requires_grad()) r[0] = g;
        if (in[1].requires_grad()) r[1] = neg(g);
        return r;
      },
      "sub");
}

template <typename Real>
Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same(a, b, "mul");
  return Tensor<Real>::from_op(
      map_binary(a.value(), b.value(), [](Real x, Real y) { return x * y; }), {a, b},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        Inputs<Real> r(2);
        if (in[0].requires_grad()) r[0] = mul(g, in[1]);
        if (in[1].requires_grad()) r[1] = mul(g, in[0]);
        return r;
      },
      "mul");
}

template <typename Real>
Tensor<Real> div(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same(a, b, "div");
  return Tensor<Real>::from_op(
      map_binary(a.value(), b.value(), [](Real x, Real y) { return x / y; }), {a, b},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        Inputs<Real> r(2);
        if (in[0].requires_grad()) r[0] = div(g, in[1]);
        if (in[1].requires_grad()) r[1] = neg(div(mul(g, in[0]), mul(in[1], in[1])));
        return r;
      },
      "div");
}

template <typename Real>
Tensor<Real> scale(const Tensor<Real>& a, Real s) {
  return Tensor<Real>::from_op(
      map_unary(a.value(), [s](Real x) { return s * x; }), {a},
      [s](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {scale(g, s)}; }, "scale");
}

template <typename Real>
Tensor<Real> add_scalar(const Tensor<Real>& a, Real s) {
  return Tensor<Real>::from_op(
      map_unary(a.value(), [s](Real x) { return x + s; }), {a},
      [](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {g}; }, "add_scalar");
}

template <typename Real>
Tensor<Real> sum(const Tensor<Real>& a) {
  Real s = 0;
  for (Real v : a.value().data()) s += v;
  const Shape shape = a.shape();
  return Tensor<Real>::from_op(
      NdArray<Real>::scalar(s), {a},
      [shape](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {expand_scalar(g, shape)}; }, "sum");
}

template <typename Real>
Tensor<Real> mean(const Tensor<Real>& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), Real(1) / static_cast<Real>(a.size()));
}

template <typename Real>
Tensor<Real> square(const Tensor<Real>& a) {
  return Tensor<Real>::from_op(
      map_unary(a.value(), [](Real x) { return x * x; }), {a},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> { return {mul(g, scale(in[0], Real(2)))}; },
      "square");
}

template <typename Real>
Tensor<Real> sqrt(const Tensor<Real>& a) {
  for (Real v : a.value().data())
    if (v < Real(0)) throw NumericError("sqrt of a negative entry");
  return Tensor<Real>::from_op(
      map_unary(a.value(), [](Real x) { return std::sqrt(x); }), {a},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        return {div(g, scale(sqrt(in[0]), Real(2)))};
      },
      "sqrt");
}

template <typename Real>
Tensor<Real> sum_rows(const Tensor<Real>& a) {
  require_rank2(a, "sum_rows");
  const std::size_t n = a.rows(), m = a.cols();
  NdArray<Real> out(Shape{1, m});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j] += a.value()[i * m + j];
  return Tensor<Real>::from_op(
      std::move(out), {a},
      [n](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {expand_rows(g, n)}; }, "sum_rows");
}

template <typename Real>
Tensor<Real> expand_rows(const Tensor<Real>& a, std::size_t n) {
  if (a.shape().size() != 2 || a.rows() != 1) throw ShapeError("expand_rows needs a [1, m] tensor");
  const std::size_t m = a.cols();
  NdArray<Real> out(Shape{n, m});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(a.value().data().begin(), m, out.data().begin() + i * m);
  return Tensor<Real>::from_op(
      std::move(out), {a}, [](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {sum_rows(g)}; },
      "expand_rows");
}

template <typename Real>
Tensor<Real> expand_scalar(const Tensor<Real>& a, const Shape& shape) {
  if (a.size() != 1) throw ShapeError("expand_scalar needs a single-element tensor");
  return Tensor<Real>::from_op(
      NdArray<Real>(shape, a.value()[0]), {a},
      [](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {sum(g)}; }, "expand_scalar");
}

template <typename Real>
Tensor<Real> concat_cols(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_rank2(a, "concat_cols");
  require_rank2(b, "concat_cols");
  if (a.rows() != b.rows()) throw ShapeError("concat_cols: row counts differ");
  const std::size_t n = a.rows(), p = a.cols(), q = b.cols();
  NdArray<Real> out(Shape{n, p + q});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.value().data().begin() + i * p, p, out.data().begin() + i * (p + q));
    std::copy_n(b.value().data().begin() + i * q, q, out.data().begin() + i * (p + q) + p);
  }
  return Tensor<Real>::from_op(
      std::move(out), {a, b},
      [p, q](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        Inputs<Real> r(2);
        if (in[0].requires_grad()) r[0] = slice_cols(g, 0, p);
        if (in[1].requires_grad()) r[1] = slice_cols(g, p, p + q);
        return r;
      },
      "concat_cols");
}

template <typename Real>
Tensor<Real> slice_cols(const Tensor<Real>& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_cols");
  const std::size_t n = a.rows(), m = a.cols();
  if (begin > end || end > m) throw ShapeError("slice_cols: range out of bounds");
  const std::size_t w = end - begin;
  NdArray<Real> out(Shape{n, w});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(a.value().data().begin() + i * m + begin, w, out.data().begin() + i * w);
  return Tensor<Real>::from_op(
      std::move(out), {a},
      [begin, m](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {pad_cols(g, begin, m)}; },
      "slice_cols");
}

template <typename Real>
Tensor<Real> pad_cols(const Tensor<Real>& a, std::size_t begin, std::size_t total) {
  require_rank2(a, "pad_cols");
  const std::size_t n = a.rows(), w = a.cols();
  if (begin + w > total) throw ShapeError("pad_cols: block exceeds target width");
  NdArray<Real> out(Shape{n, total});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(a.value().data().begin() + i * w, w, out.data().begin() + i * total + begin);
  return Tensor<Real>::from_op(
      std::move(out), {a},
      [begin, w](const T<Real>& g, const Inputs<Real>&) -> Inputs<Real> { return {slice_cols(g, begin, begin + w)}; },
      "pad_cols");
}

template <typename Real>
Tensor<Real> silu(const Tensor<Real>& a) {
  return Tensor<Real>::from_op(
      map_unary(a.value(), [](Real x) { return x * sigmoid(x); }), {a},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> { return {mul(g, silu_first(in[0]))}; }, "silu");
}

template <typename Real>
Tensor<Real> relu(const Tensor<Real>& a) {
  return Tensor<Real>::from_op(
      map_unary(a.value(), [](Real x) { return x > Real(0) ? x : Real(0); }), {a},
      [](const T<Real>& g, const Inputs<Real>& in) -> Inputs<Real> {
        Tensor<Real> mask(map_unary(in[0].value(), [](Real x) { return x > Real(0) ? Real(1) : Real(0); }));
        return {mul(g, mask)};
      },
      "relu");
}

template <typename Real>
NdArray<Real> timestep_embedding(std::span<const int> t, std::size_t dim, double max_period) {
  if (dim % 2 != 0) throw InvalidArgument("time embedding width must be even");
  const std::size_t half = dim / 2;
  NdArray<Real> out(Shape{t.size(), dim});
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (std::size_t j = 0; j < half; ++j) {
      const double freq = std::exp(-std::log(max_period) * static_cast<double>(j) / static_cast<double>(half));
      const double arg = static_cast<double>(t[r]) * freq;
      out[r * dim + j] = static_cast<Real>(std::cos(arg));
      out[r * dim + half + j] = static_cast<Real>(std::sin(arg));
    }
  }
  return out;
}

// ---- engine ----------------------------------------------------------------

namespace {

template <typename Real>
std::vector<detail::Node<Real>*> topo_order(detail::Node<Real>* root) {
  std::vector<detail::Node<Real>*> order;
  std::unordered_map<detail::Node<Real>*, bool> seen;
  // iterative post-order DFS: (node, next input index)
  std::vector<std::pair<detail::Node<Real>*, std::size_t>> stack{{root, 0}};
  seen[root] = true;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (node->released) throw Error("backward through a graph that was already released");
    if (next < node->inputs.size()) {
      auto* child = node->inputs[next++].node();
      if (child->requires_grad && !seen[child]) {
        seen[child] = true;
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

template <typename Real>
void accumulate(std::unordered_map<detail::Node<Real>*, Tensor<Real>>& grads, detail::Node<Real>* node,
                const Tensor<Real>& g) {
  auto it = grads.find(node);
  if (it == grads.end())
    grads.emplace(node, g);
  else
    it->second = add(it->second, g);
}

template <typename Real>
std::unordered_map<detail::Node<Real>*, Tensor<Real>> run(const Tensor<Real>& output, const Tensor<Real>& seed,
                                                          bool create_graph, std::size_t* visited) {
  std::unordered_map<detail::Node<Real>*, Tensor<Real>> grads;
  auto order = topo_order(output.node());
  grads.emplace(output.node(), seed);
  GradModeGuard mode(create_graph);
  for (auto* node : order) {
    auto it = grads.find(node);
    if (it == grads.end()) continue;
    if (visited) ++*visited;
    if (!node->backward) continue;
    const Tensor<Real> g = it->second;
    auto in_grads = node->backward(g, node->inputs);
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      if (i < in_grads.size() && in_grads[i].defined() && node->inputs[i].requires_grad()) {
        if (in_grads[i].shape() != node->inputs[i].shape())
          throw ShapeError(std::string("internal: gradient shape mismatch in ") + node->op);
        accumulate(grads, node->inputs[i].node(), in_grads[i]);
      }
    }
  }
  return grads;
}

}  // namespace

template <typename Real>
std::size_t backward(const Tensor<Real>& loss) {
  if (!loss.defined()) throw Error("backward on an undefined tensor");
  if (loss.size() != 1) throw ShapeError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  if (loss.node()->released) throw Error("backward called twice on the same graph; rebuild the loss first");
  if (!loss.requires_grad()) return 0;
  std::size_t visited = 0;
  Tensor<Real> seed(NdArray<Real>(loss.shape(), Real(1)));
  auto grads = run(loss, seed, false, &visited);
  for (auto& [node, g] : grads) {
    if (node->backward || !node->inputs.empty()) continue;
    if (node->grad)
      for (std::size_t i = 0; i < node->grad->size(); ++i) (*node->grad)[i] += g.value()[i];
    else
      node->grad = g.value();
  }
  // release the tape; inputs are parked first so no node dies while the map is walked
  std::vector<Tensor<Real>> parked;
  for (auto& [node, g] : grads) {
    if (node->backward) {
      node->backward = nullptr;
      for (auto& in : node->inputs) parked.push_back(std::move(in));
      node->inputs.clear();
      node->released = true;
    }
  }
  return visited;
}

template <typename Real>
std::vector<Tensor<Real>> grad(const Tensor<Real>& output, const std::vector<Tensor<Real>>& wrt,
                               const Tensor<Real>& grad_output, bool create_graph) {
  std::vector<Tensor<Real>> result;
  result.reserve(wrt.size());
  if (!output.requires_grad()) {
    for (const auto& w : wrt) result.emplace_back(NdArray<Real>(w.shape()));
    return result;
  }
  Tensor<Real> seed = grad_output.defined() ? grad_output : Tensor<Real>(NdArray<Real>(output.shape(), Real(1)));
  if (seed.shape() != output.shape()) throw ShapeError("grad: seed shape differs from output shape");
  auto grads = run(output, seed, create_graph, nullptr);
  for (const auto& w : wrt) {
    auto it = grads.find(w.node());
    result.push_back(it == grads.end() ? Tensor<Real>(NdArray<Real>(w.shape())) : it->second);
  }
  return result;
}

template <typename Real>
Tensor<Real> jacobian_frobenius_sq(const std::function<Tensor<Real>(const Tensor<Real>&)>& f, const NdArray<Real>& x,
                                   const JacobianOptions& options) {
  if (x.rank() != 2) throw ShapeError("jacobian_frobenius_sq expects a [batch, dim] input");
  // The input Jacobian needs a recorded graph even under no-grad; the outer
  // mode only decides whether the result stays differentiable.
  const bool outer = GradMode::enabled();
  GradModeGuard record(true);
  Tensor<Real> input(x, true);
  Tensor<Real> out = f(input);
  if (out.shape().size() != 2 || out.rows() != x.rows())
    throw ShapeError("jacobian_frobenius_sq: f must map [n, d] to [n, k]");
  const std::size_t width = out.cols();
  const Real inv_batch = Real(1) / static_cast<Real>(x.rows());
  Tensor<Real> total;
  auto add_term = [&](const Tensor<Real>& seed) {
    auto g = grad(out, {input}, seed, outer)[0];
    Tensor<Real> term = sum(square(g));
    total = total.defined() ? add(total, term) : term;
  };
  if (width <= options.exact_budget) {
    for (std::size_t k = 0; k < width; ++k) {
      NdArray<Real> e(out.shape());
      for (std::size_t r = 0; r < out.rows(); ++r) e[r * width + k] = Real(1);
      add_term(Tensor<Real>(std::move(e)));
    }
    return scale(total, inv_batch);
  }
  if (options.hutchinson_probes == 0)
    throw InvalidArgument("output width " + std::to_string(width) + " exceeds the exact Jacobian budget (" +
                          std::to_string(options.exact_budget) + "); enable Hutchinson probes");
  Rng rng(options.probe_seed);
  for (std::size_t p = 0; p < options.hutchinson_probes; ++p) {
    NdArray<Real> v(out.shape());
    for (auto& e : v.data()) e = (rng.next_u64() & 1U) ? Real(1) : Real(-1);
    add_term(Tensor<Real>(std::move(v)));
  }
  return scale(total, inv_batch / static_cast<Real>(options.hutchinson_probes));
}

template <typename Real>
bool is_healthy(const Tensor<Real>& t) {
  if (!t.value().all_finite()) return false;
  return !t.grad() || t.grad()->all_finite();
}

#define DIFFLAB_INSTANTIATE(R)                                                                                     \
  template class Tensor<R>;                                                                                        \
  template Tensor<R> matmul(const Tensor<R>&, const Tensor<R>&);                                                   \
  template Tensor<R> transpose(const Tensor<R>&);                                                                  \
  template Tensor<R> add(const Tensor<R>&, const Tensor<R>&);                                                      \
  template Tensor<R> sub(const Tensor<R>&, const Tensor<R>&);                                                      \
  template Tensor<R> mul(const Tensor<R>&, const Tensor<R>&);                                                      \
  template Tensor<R> div(const Tensor<R>&, const Tensor<R>&);                                                      \
  template Tensor<R> scale(const Tensor<R>&, R);                                                                   \
  template Tensor<R> add_scalar(const Tensor<R>&, R);                                                              \
  template Tensor<R> sum(const Tensor<R>&);                                                                        \
  template Tensor<R> mean(const Tensor<R>&);                                                                       \
  template Tensor<R> square(const Tensor<R>&);                                                                     \
  template Tensor<R> sqrt(const Tensor<R>&);                                                                       \
  template Tensor<R> sum_rows(const Tensor<R>&);                                                                   \
  template Tensor<R> expand_rows(const Tensor<R>&, std::size_t);                                                   \
  template Tensor<R> expand_scalar(const Tensor<R>&, const Shape&);                                                \
  template Tensor<R> concat_cols(const Tensor<R>&, const Tensor<R>&);                                              \
  template Tensor<R> slice_cols(const Tensor<R>&, std::size_t, std::size_t);                                       \
  template Tensor<R> pad_cols(const Tensor<R>&, std::size_t, std::size_t);                                         \
  template Tensor<R> silu(const Tensor<R>&);                                                                       \
  template Tensor<R> relu(const Tensor<R>&);                                                                       \
  template NdArray<R> timestep_embedding(std::span<const int>, std::size_t, double);                               \
  template std::size_t backward(const Tensor<R>&);                                                                 \
  template std::vector<Tensor<R>> grad(const Tensor<R>&, const std::vector<Tensor<R>>&, const Tensor<R>&, bool);   \
  template Tensor<R> jacobian_frobenius_sq(const std::function<Tensor<R>(const Tensor<R>&)>&, const NdArray<R>&,  \
                                           const JacobianOptions&);                                                \
  template bool is_healthy(const Tensor<R>&);

DIFFLAB_INSTANTIATE(float)
DIFFLAB_INSTANTIATE(double)
#undef DIFFLAB_INSTANTIATE

}  // namespace difflab::ad
