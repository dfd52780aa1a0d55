// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "difflab/ndarray.hpp"

// Reverse-mode automatic differentiation over dense tensors.
//
// Every op on tensors that require gradients appends a node to a dynamic
// graph (the tape). Each node stores its inputs and a closure that maps the
// output gradient to input gradients. The closures are themselves written
// with tensor ops, so when gradients are requested with create_graph = true
// the backward pass is recorded too and can be differentiated again. This
// is what lets a Jacobian norm appear inside a training loss.
//
// A graph is confined to the thread that built it. Ops only record while
// GradMode is enabled (the default); NoGradGuard disables recording for a
// scope.
namespace difflab::ad {

class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

class GradModeGuard {
 public:
  explicit GradModeGuard(bool on) : previous_(GradMode::enabled()) { GradMode::set_enabled(on); }
  ~GradModeGuard() { GradMode::set_enabled(previous_); }
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  bool previous_;
};

struct NoGradGuard : GradModeGuard {
  NoGradGuard() : GradModeGuard(false) {}
};

template <typename Real>
class Tensor;

namespace detail {

template <typename Real>
using BackwardFn = std::function<std::vector<Tensor<Real>>(const Tensor<Real>& grad_out,
                                                           const std::vector<Tensor<Real>>& inputs)>;

template <typename Real>
struct Node {
  NdArray<Real> value;
  bool requires_grad = false;
  bool released = false;
  const char* op = "leaf";
  std::optional<NdArray<Real>> grad;
  std::vector<Tensor<Real>> inputs;
  BackwardFn<Real> backward;
};

}  // namespace detail

/// Shared handle to a graph node. Copies alias the same node.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(NdArray<Real> value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const NdArray<Real>& value() const { return node_->value; }
  /// Direct access to a leaf's storage (optimizer updates). Throws on non-leaves.
  NdArray<Real>& mutable_value();

  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  Real item() const { return node_->value.item(); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool is_leaf() const { return !node_->backward && node_->inputs.empty() && !node_->released; }
  const char* op_name() const { return node_->op; }

  /// Accumulated gradient after backward(), or nullptr.
  const NdArray<Real>* grad() const { return node_->grad ? &*node_->grad : nullptr; }
  void zero_grad();
  void clear_grad() { node_->grad.reset(); }

  /// Same value, cut from the graph.
  Tensor detach() const { return Tensor(node_->value, false); }

  detail::Node<Real>* node() const { return node_.get(); }

  static Tensor from_op(NdArray<Real> value, std::vector<Tensor> inputs, detail::BackwardFn<Real> backward,
                        const char* op);

 private:
  std::shared_ptr<detail::Node<Real>> node_;
};

// ---- ops -------------------------------------------------------------------
// Binary elementwise ops require identical shapes, except add() which also
// broadcasts a [1, m] right operand over the rows of an [n, m] left operand.

template <typename Real> Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real> Tensor<Real> transpose(const Tensor<Real>& a);
template <typename Real> Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real> Tensor<Real> sub(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real> Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real> Tensor<Real> div(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real> Tensor<Real> scale(const Tensor<Real>& a, Real s);
template <typename Real> Tensor<Real> add_scalar(const Tensor<Real>& a, Real s);
template <typename Real> Tensor<Real> neg(const Tensor<Real>& a) { return scale(a, Real(-1)); }
/// Sum of all entries, as a rank-0 tensor.
template <typename Real> Tensor<Real> sum(const Tensor<Real>& a);
template <typename Real> Tensor<Real> mean(const Tensor<Real>& a);
template <typename Real> Tensor<Real> square(const Tensor<Real>& a);
/// Throws NumericError on negative entries.
template <typename Real> Tensor<Real> sqrt(const Tensor<Real>& a);
/// Column sums of [n, m] -> [1, m].
template <typename Real> Tensor<Real> sum_rows(const Tensor<Real>& a);
/// [1, m] -> [n, m]
template <typename Real> Tensor<Real> expand_rows(const Tensor<Real>& a, std::size_t n);
/// rank-0 -> shape
template <typename Real> Tensor<Real> expand_scalar(const Tensor<Real>& a, const Shape& shape);
template <typename Real> Tensor<Real> concat_cols(const Tensor<Real>& a, const Tensor<Real>& b);
/// Columns [begin, end) of a rank-2 tensor.
template <typename Real> Tensor<Real> slice_cols(const Tensor<Real>& a, std::size_t begin, std::size_t end);
/// Inverse of slice_cols: places a in columns [begin, begin + a.cols()) of a zero [n, total] tensor.
template <typename Real> Tensor<Real> pad_cols(const Tensor<Real>& a, std::size_t begin, std::size_t total);
template <typename Real> Tensor<Real> silu(const Tensor<Real>& a);
template <typename Real> Tensor<Real> relu(const Tensor<Real>& a);

template <typename Real> Tensor<Real> operator+(const Tensor<Real>& a, const Tensor<Real>& b) { return add(a, b); }
template <typename Real> Tensor<Real> operator-(const Tensor<Real>& a, const Tensor<Real>& b) { return sub(a, b); }
template <typename Real> Tensor<Real> operator*(const Tensor<Real>& a, const Tensor<Real>& b) { return mul(a, b); }

/// Sinusoidal embedding of integer steps: [cos(t f_j) | sin(t f_j)],
/// f_j = exp(-ln(max_period) j / (dim/2)). dim must be even.
template <typename Real>
NdArray<Real> timestep_embedding(std::span<const int> t, std::size_t dim, double max_period = 10000.0);

// ---- differentiation -------------------------------------------------------

/// Accumulates d loss / d leaf into every reachable leaf that requires
/// gradients, then releases the graph. Throws ShapeError for non-scalar loss
/// and Error when the graph was already released by an earlier call.
/// Returns the number of graph nodes visited.
template <typename Real>
std::size_t backward(const Tensor<Real>& loss);

/// Gradients of `output` with respect to each tensor in `wrt`, seeded with
/// `grad_output` (ones when undefined). The graph is retained. With
/// create_graph the returned gradients are themselves on the tape.
template <typename Real>
std::vector<Tensor<Real>> grad(const Tensor<Real>& output, const std::vector<Tensor<Real>>& wrt,
                               const Tensor<Real>& grad_output = Tensor<Real>(), bool create_graph = false);

/// Options for jacobian_frobenius_sq.
struct JacobianOptions {
  /// Largest output width handled with one exact backward pass per output.
  std::size_t exact_budget = 64;
  /// Rademacher probes for the Hutchinson estimator; 0 disables it.
  std::size_t hutchinson_probes = 0;
  std::uint64_t probe_seed = 0;
  friend bool operator==(const JacobianOptions&, const JacobianOptions&) = default;
};

/// Mean over batch rows of ||d f(x)_r / d x_r||_F^2 for a row-wise map f.
///
/// Exact: one create_graph backward pass per output column. Above
/// exact_budget the Hutchinson estimator E_v ||J^T v||^2 = ||J||_F^2 with
/// Rademacher v is used when probes > 0, otherwise InvalidArgument is
/// thrown. The result stays on the tape, so it can be trained through.
template <typename Real>
Tensor<Real> jacobian_frobenius_sq(const std::function<Tensor<Real>(const Tensor<Real>&)>& f,
                                   const NdArray<Real>& x, const JacobianOptions& options = {});

/// True when value and (if present) grad are free of NaN and Inf.
template <typename Real>
bool is_healthy(const Tensor<Real>& t);

}  // namespace difflab::ad
