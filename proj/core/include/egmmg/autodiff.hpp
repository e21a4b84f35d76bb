// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egmmg/matrix.hpp"

namespace egmmg::ad {

/// Trainable tensor living outside any tape. `grad` accumulates across
/// backward passes until zero_grad().
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Matrix v, bool train = true)
      : name(std::move(n)), value(std::move(v)), trainable(train) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(value.size()); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// lives.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Scalar value of a 1x1 var.
  double item() const;

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Eager reverse-mode tape. Every op appends one record holding its output
/// value and a closure that propagates the output gradient to its inputs.
/// backward() walks the records once in reverse order. Single-threaded.
class Tape {
 public:
  using BackwardFn =
      std::function<void(Tape&, const Matrix& out_value, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records a reference to p; p.value must stay unchanged while the tape is
  /// in use.
  Var parameter(Parameter& p);
  Var constant(Matrix value);

  const Matrix& value(Var v) const {
    const auto& r = records_[v.id()];
    return r.param ? r.param->value : r.value;
  }
  /// Gradient of the last backward() w.r.t. v (zero matrix if unreached).
  Matrix grad(Var v) const;
  bool requires_grad(Var v) const { return records_[v.id()].requires_grad; }
  std::size_t size() const noexcept { return records_.size(); }

  /// Fills d(loss)/d(.) for every recorded value and adds into the grad of
  /// every trainable Parameter on the tape. Throws unless loss is 1x1.
  void backward(Var loss);

  /// Op-author interface. Throws NumericError if `value` is not finite.
  Var record(std::string_view op, Matrix value, std::span<const Var> inputs,
             BackwardFn backward);
  Var record(std::string_view op, Matrix value, std::initializer_list<Var> inputs,
             BackwardFn backward) {
    return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }
  /// Adds `g` into the gradient slot of `v` if it requires grad.
  void accumulate(Var v, const Matrix& g);
  template <typename Fn>
  void accumulate_with(Var v, Fn&& fn) {
    if (!records_[v.id()].requires_grad) return;
    fn(grad_slot(v.id()));
  }

 private:
  struct Record {
    std::string_view op;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  Matrix& grad_slot(std::size_t id);
  Var push(Record r);

  std::vector<Record> records_;
};

// ---- ops ------------------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// a (n x d) + row (1 x d) broadcast over rows.
Var add_row(Var a, Var row);
Var mul(Var a, Var b);
/// a (n x d) scaled per row by col (n x 1).
Var mul_col(Var a, Var col);
/// a (n x d) scaled per column by row (1 x d).
Var mul_row(Var a, Var row);
Var scale(Var a, double c);
/// a scaled by the 1x1 var s.
Var scale_by(Var a, Var s);
Var sum(Var a);
/// axis 0 stacks rows, axis 1 stacks columns.
Var concat(std::span<const Var> parts, int axis);
Var row_softmax(Var a);
Var sigmoid(Var a);
Var leaky_relu(Var a, double slope = 0.2);
Var elu(Var a, double alpha = 1.0);
/// Per-segment mean of rows: result row s is the mean of rows i with
/// segment[i] == s. Empty segments give zero rows.
Var mean_rows(Var a, std::span<const std::size_t> segment, std::size_t segment_count);
/// Mean binary cross-entropy of pred (n x 1) against 0/1 labels; predictions
/// are clamped into [eps, 1 - eps].
Var bce_loss(Var pred, std::span<const double> labels, double eps = 1e-7);

// Graph ops. Column blocks of width cols/heads belong to one head.

/// Rows a[index[k]] stacked.
Var gather_rows(Var a, std::span<const std::size_t> index);
/// (n x heads*c) -> (n x heads): sum within each head block.
Var head_sum(Var a, std::size_t heads);
/// out(e, h) = < query[dst[e]] , key[src[e]] > over head block h.
Var edge_dot(Var query, Var key, std::span<const std::size_t> src,
             std::span<const std::size_t> dst, std::size_t heads);
/// Softmax of scores (E x heads) within groups of equal segment[e], per column.
Var segment_softmax(Var scores, std::span<const std::size_t> segment, std::size_t segment_count);
/// out[dst[e]] += weight(e, h) * value[src[e]] over head block h; out has
/// dst_count rows.
Var edge_aggregate(Var weight, Var value, std::span<const std::size_t> src,
                   std::span<const std::size_t> dst, std::size_t dst_count, std::size_t heads);

}  // namespace egmmg::ad
