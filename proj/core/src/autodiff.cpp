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

#include "egmmg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "egmmg/error.hpp"

namespace egmmg::ad {
namespace {

using Index = Eigen::Index;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_error(std::string_view op, const Matrix& a, const Matrix& b) {
  throw DataError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

void require_same_shape(std::string_view op, Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a.value(), b.value());
}

Index head_width(std::string_view op, Index cols, std::size_t heads) {
  if (heads == 0 || cols % static_cast<Index>(heads) != 0) {
    throw DataError(std::string(op) + ": " + std::to_string(cols) +
                    " columns do not split into " + std::to_string(heads) + " heads");
  }
  return cols / static_cast<Index>(heads);
}

void check_index(std::string_view op, std::span<const std::size_t> idx, Index bound) {
  for (auto i : idx) {
    if (static_cast<Index>(i) >= bound) {
      throw DataError(std::string(op) + ": index " + std::to_string(i) + " out of range " +
                      std::to_string(bound));
    }
  }
}

std::vector<std::size_t> to_vec(std::span<const std::size_t> s) { return {s.begin(), s.end()}; }

}  // namespace

const Matrix& Var::value() const { return tape_->value(*this); }

double Var::item() const {
  const auto& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw DataError("item() on non-scalar " + shape(v));
  return v(0, 0);
}

Var Tape::push(Record r) {
  records_.push_back(std::move(r));
  return Var(this, records_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  Record r;
  r.op = "parameter";
  r.requires_grad = p.trainable;
  r.param = &p;
  return push(std::move(r));
}

Var Tape::constant(Matrix value) {
  if (!value.allFinite()) throw NumericError("constant: non-finite input");
  Record r;
  r.op = "constant";
  r.value = std::move(value);
  return push(std::move(r));
}

Var Tape::record(std::string_view op, Matrix value, std::span<const Var> inputs,
                 BackwardFn backward) {
  if (!value.allFinite()) throw NumericError(std::string(op) + ": non-finite value");
  Record r;
  r.op = op;
  r.value = std::move(value);
  for (const Var& in : inputs) r.requires_grad = r.requires_grad || requires_grad(in);
  if (r.requires_grad) r.backward = std::move(backward);
  return push(std::move(r));
}

Matrix& Tape::grad_slot(std::size_t id) {
  auto& rec = records_[id];
  if (rec.grad.size() == 0) {
    const Matrix& v = value(Var(this, id));
    rec.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return rec.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  if (!records_[v.id()].requires_grad) return;
  grad_slot(v.id()) += g;
}

Matrix Tape::grad(Var v) const {
  const auto& rec = records_[v.id()];
  if (rec.grad.size() == 0) return Matrix::Zero(value(v).rows(), value(v).cols());
  return rec.grad;
}

void Tape::backward(Var loss) {
  const auto& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw DataError("backward: loss must be 1x1, got " + shape(lv));
  }
  for (auto& r : records_) r.grad.resize(0, 0);
  if (!records_[loss.id()].requires_grad) return;
  grad_slot(loss.id())(0, 0) = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& rec = records_[i];
    if (!rec.requires_grad || rec.grad.size() == 0) continue;
    if (!rec.grad.allFinite()) throw NumericError(std::string(rec.op) + ": non-finite gradient");
    if (rec.backward) rec.backward(*this, rec.value, rec.grad);
    if (rec.param) rec.param->grad += rec.grad;
  }
}

// ---- elementwise / linear ------------------------------------------------

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) shape_error("matmul", a.value(), b.value());
  Matrix out = a.value() * b.value();
  return a.tape().record("matmul", std::move(out), {a, b},
                         [a, b](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             ga.noalias() += g * t.value(b).transpose();
                           });
                           t.accumulate_with(b, [&](Matrix& gb) {
                             gb.noalias() += t.value(a).transpose() * g;
                           });
                         });
}

Var transpose(Var a) {
  Matrix out = a.value().transpose();
  return a.tape().record("transpose", std::move(out), {a},
                         [a](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) { ga += g.transpose(); });
                         });
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  return a.tape().record("add", a.value() + b.value(), {a, b},
                         [a, b](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate(a, g);
                           t.accumulate(b, g);
                         });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  return a.tape().record("sub", a.value() - b.value(), {a, b},
                         [a, b](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate(a, g);
                           t.accumulate_with(b, [&](Matrix& gb) { gb -= g; });
                         });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a.value(), row.value());
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape().record("add_row", std::move(out), {a, row},
                         [a, row](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate(a, g);
                           t.accumulate_with(row, [&](Matrix& gr) { gr += g.colwise().sum(); });
                         });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape().record("mul", std::move(out), {a, b},
                         [a, b](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             ga += g.cwiseProduct(t.value(b));
                           });
                           t.accumulate_with(b, [&](Matrix& gb) {
                             gb += g.cwiseProduct(t.value(a));
                           });
                         });
}

Var mul_col(Var a, Var col) {
  if (col.cols() != 1 || col.rows() != a.rows()) shape_error("mul_col", a.value(), col.value());
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return a.tape().record(
      "mul_col", std::move(out), {a, col}, [a, col](Tape& t, const Matrix&, const Matrix& g) {
        t.accumulate_with(a, [&](Matrix& ga) {
          ga.array() += g.array().colwise() * t.value(col).col(0).array();
        });
        t.accumulate_with(col, [&](Matrix& gc) {
          gc += g.cwiseProduct(t.value(a)).rowwise().sum();
        });
      });
}

Var mul_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("mul_row", a.value(), row.value());
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  return a.tape().record(
      "mul_row", std::move(out), {a, row}, [a, row](Tape& t, const Matrix&, const Matrix& g) {
        t.accumulate_with(a, [&](Matrix& ga) {
          ga.array() += g.array().rowwise() * t.value(row).row(0).array();
        });
        t.accumulate_with(row, [&](Matrix& gr) {
          gr += g.cwiseProduct(t.value(a)).colwise().sum();
        });
      });
}

Var scale(Var a, double c) {
  return a.tape().record("scale", a.value() * c, {a},
                         [a, c](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) { ga += c * g; });
                         });
}

Var scale_by(Var a, Var s) {
  if (s.rows() != 1 || s.cols() != 1) shape_error("scale_by", a.value(), s.value());
  const double c = s.value()(0, 0);
  return a.tape().record("scale_by", a.value() * c, {a, s},
                         [a, s](Tape& t, const Matrix&, const Matrix& g) {
                           const double c = t.value(s)(0, 0);
                           t.accumulate_with(a, [&](Matrix& ga) { ga += c * g; });
                           t.accumulate_with(s, [&](Matrix& gs) {
                             gs(0, 0) += g.cwiseProduct(t.value(a)).sum();
                           });
                         });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record("sum", std::move(out), {a},
                         [a](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) { ga.array() += g(0, 0); });
                         });
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw DataError("concat: no inputs");
  if (axis != 0 && axis != 1) throw DataError("concat: axis must be 0 or 1");
  Index rows = 0, cols = 0;
  for (const auto& p : parts) {
    if (axis == 0) {
      if (p.cols() != parts[0].cols()) shape_error("concat", parts[0].value(), p.value());
      rows += p.rows();
      cols = p.cols();
    } else {
      if (p.rows() != parts[0].rows()) shape_error("concat", parts[0].value(), p.value());
      cols += p.cols();
      rows = p.rows();
    }
  }
  Matrix out(rows, cols);
  Index off = 0;
  for (const auto& p : parts) {
    if (axis == 0) {
      out.middleRows(off, p.rows()) = p.value();
      off += p.rows();
    } else {
      out.middleCols(off, p.cols()) = p.value();
      off += p.cols();
    }
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record("concat", std::move(out), parts,
                     [inputs, axis](Tape& t, const Matrix&, const Matrix& g) {
                       Index off = 0;
                       for (const auto& p : inputs) {
                         const Index n = axis == 0 ? p.rows() : p.cols();
                         t.accumulate_with(p, [&](Matrix& gp) {
                           if (axis == 0) {
                             gp += g.middleRows(off, n);
                           } else {
                             gp += g.middleCols(off, n);
                           }
                         });
                         off += n;
                       }
                     });
}

// ---- nonlinearities ----------------------------------------------------------

Var row_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return a.tape().record("row_softmax", std::move(out), {a},
                         [a](Tape& t, const Matrix& y, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             const Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
                             ga.array() += y.array() * (g.colwise() - dot).array();
                           });
                         });
}

Var sigmoid(Var a) {
  Matrix out = a.value().unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return a.tape().record("sigmoid", std::move(out), {a},
                         [a](Tape& t, const Matrix& y, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             ga.array() += g.array() * y.array() * (1.0 - y.array());
                           });
                         });
}

Var leaky_relu(Var a, double slope) {
  Matrix out = a.value().unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
  return a.tape().record("leaky_relu", std::move(out), {a},
                         [a, slope](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             const Matrix& x = t.value(a);
                             ga.array() += g.array() *
                                           x.array().unaryExpr([slope](double v) {
                                             return v > 0 ? 1.0 : slope;
                                           });
                           });
                         });
}

Var elu(Var a, double alpha) {
  Matrix out =
      a.value().unaryExpr([alpha](double x) { return x > 0 ? x : alpha * std::expm1(x); });
  return a.tape().record("elu", std::move(out), {a},
                         [a, alpha](Tape& t, const Matrix& y, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             const Matrix& x = t.value(a);
                             for (Index i = 0; i < x.size(); ++i) {
                               const double d = x.data()[i] > 0 ? 1.0 : y.data()[i] + alpha;
                               ga.data()[i] += g.data()[i] * d;
                             }
                           });
                         });
}

Var mean_rows(Var a, std::span<const std::size_t> segment, std::size_t segment_count) {
  const Matrix& x = a.value();
  if (static_cast<Index>(segment.size()) != x.rows()) {
    throw DataError("mean_rows: segment ids do not match row count");
  }
  std::vector<double> count(segment_count, 0.0);
  for (auto s : segment) {
    if (s >= segment_count) throw DataError("mean_rows: segment id out of range");
    count[s] += 1.0;
  }
  Matrix out = Matrix::Zero(static_cast<Index>(segment_count), x.cols());
  for (Index r = 0; r < x.rows(); ++r) out.row(static_cast<Index>(segment[r])) += x.row(r);
  for (std::size_t s = 0; s < segment_count; ++s) {
    if (count[s] > 0) out.row(static_cast<Index>(s)) /= count[s];
  }
  return a.tape().record(
      "mean_rows", std::move(out), {a},
      [a, seg = to_vec(segment), count](Tape& t, const Matrix&, const Matrix& g) {
        t.accumulate_with(a, [&](Matrix& ga) {
          for (std::size_t r = 0; r < seg.size(); ++r) {
            ga.row(static_cast<Index>(r)) += g.row(static_cast<Index>(seg[r])) / count[seg[r]];
          }
        });
      });
}

Var bce_loss(Var pred, std::span<const double> labels, double eps) {
  const Matrix& p = pred.value();
  if (p.cols() != 1 || static_cast<std::size_t>(p.rows()) != labels.size() || labels.empty()) {
    throw DataError("bce_loss: expected " + std::to_string(labels.size()) +
                    "x1 predictions, got " + shape(p));
  }
  const double n = static_cast<double>(labels.size());
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    const double q = std::clamp(p(i, 0), eps, 1.0 - eps);
    const double y = labels[static_cast<std::size_t>(i)];
    total -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  Matrix out(1, 1);
  out(0, 0) = total / n;
  return pred.tape().record(
      "bce_loss", std::move(out), {pred},
      [pred, y = std::vector<double>(labels.begin(), labels.end()), eps, n](
          Tape& t, const Matrix&, const Matrix& g) {
        t.accumulate_with(pred, [&](Matrix& gp) {
          const Matrix& p = t.value(pred);
          for (Index i = 0; i < p.rows(); ++i) {
            const double q = p(i, 0);
            if (q < eps || q > 1.0 - eps) continue;
            const double yi = y[static_cast<std::size_t>(i)];
            gp(i, 0) += g(0, 0) * (q - yi) / (q * (1.0 - q)) / n;
          }
        });
      });
}

// ---- graph ops ---------------------------------------------------------------

Var gather_rows(Var a, std::span<const std::size_t> index) {
  const Matrix& x = a.value();
  check_index("gather_rows", index, x.rows());
  Matrix out(static_cast<Index>(index.size()), x.cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    out.row(static_cast<Index>(k)) = x.row(static_cast<Index>(index[k]));
  }
  return a.tape().record("gather_rows", std::move(out), {a},
                         [a, idx = to_vec(index)](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             for (std::size_t k = 0; k < idx.size(); ++k) {
                               ga.row(static_cast<Index>(idx[k])) += g.row(static_cast<Index>(k));
                             }
                           });
                         });
}

Var head_sum(Var a, std::size_t heads) {
  const Matrix& x = a.value();
  const Index w = head_width("head_sum", x.cols(), heads);
  Matrix out(x.rows(), static_cast<Index>(heads));
  for (Index h = 0; h < static_cast<Index>(heads); ++h) {
    out.col(h) = x.middleCols(h * w, w).rowwise().sum();
  }
  return a.tape().record("head_sum", std::move(out), {a},
                         [a, heads, w](Tape& t, const Matrix&, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             for (Index h = 0; h < static_cast<Index>(heads); ++h) {
                               ga.middleCols(h * w, w).colwise() += g.col(h);
                             }
                           });
                         });
}

Var edge_dot(Var query, Var key, std::span<const std::size_t> src,
             std::span<const std::size_t> dst, std::size_t heads) {
  const Matrix& q = query.value();
  const Matrix& k = key.value();
  if (q.cols() != k.cols()) shape_error("edge_dot", q, k);
  if (src.size() != dst.size()) throw DataError("edge_dot: src/dst length mismatch");
  check_index("edge_dot", dst, q.rows());
  check_index("edge_dot", src, k.rows());
  const Index w = head_width("edge_dot", q.cols(), heads);
  const auto E = static_cast<Index>(src.size());
  Matrix out(E, static_cast<Index>(heads));
  for (Index e = 0; e < E; ++e) {
    const auto qi = static_cast<Index>(dst[e]);
    const auto ki = static_cast<Index>(src[e]);
    for (Index h = 0; h < static_cast<Index>(heads); ++h) {
      out(e, h) = q.row(qi).segment(h * w, w).dot(k.row(ki).segment(h * w, w));
    }
  }
  return query.tape().record(
      "edge_dot", std::move(out), {query, key},
      [query, key, s = to_vec(src), d = to_vec(dst), heads, w](Tape& t, const Matrix&,
                                                               const Matrix& g) {
        const Matrix& q = t.value(query);
        const Matrix& k = t.value(key);
        t.accumulate_with(query, [&](Matrix& gq) {
          for (std::size_t e = 0; e < s.size(); ++e) {
            for (Index h = 0; h < static_cast<Index>(heads); ++h) {
              gq.row(static_cast<Index>(d[e])).segment(h * w, w) +=
                  g(static_cast<Index>(e), h) * k.row(static_cast<Index>(s[e])).segment(h * w, w);
            }
          }
        });
        t.accumulate_with(key, [&](Matrix& gk) {
          for (std::size_t e = 0; e < s.size(); ++e) {
            for (Index h = 0; h < static_cast<Index>(heads); ++h) {
              gk.row(static_cast<Index>(s[e])).segment(h * w, w) +=
                  g(static_cast<Index>(e), h) * q.row(static_cast<Index>(d[e])).segment(h * w, w);
            }
          }
        });
      });
}

Var segment_softmax(Var scores, std::span<const std::size_t> segment, std::size_t segment_count) {
  const Matrix& x = scores.value();
  if (static_cast<Index>(segment.size()) != x.rows()) {
    throw DataError("segment_softmax: segment ids do not match row count");
  }
  for (auto s : segment) {
    if (s >= segment_count) throw DataError("segment_softmax: segment id out of range");
  }
  const Index H = x.cols();
  Matrix max = Matrix::Constant(static_cast<Index>(segment_count), H,
                                -std::numeric_limits<double>::infinity());
  for (Index e = 0; e < x.rows(); ++e) {
    auto row = max.row(static_cast<Index>(segment[e]));
    row = row.cwiseMax(x.row(e));
  }
  Matrix out(x.rows(), H);
  Matrix denom = Matrix::Zero(static_cast<Index>(segment_count), H);
  for (Index e = 0; e < x.rows(); ++e) {
    const auto s = static_cast<Index>(segment[e]);
    out.row(e) = (x.row(e) - max.row(s)).array().exp();
    denom.row(s) += out.row(e);
  }
  for (Index e = 0; e < x.rows(); ++e) {
    out.row(e).array() /= denom.row(static_cast<Index>(segment[e])).array();
  }
  return scores.tape().record(
      "segment_softmax", std::move(out), {scores},
      [scores, seg = to_vec(segment), segment_count](Tape& t, const Matrix& y, const Matrix& g) {
        t.accumulate_with(scores, [&](Matrix& gs) {
          Matrix dot = Matrix::Zero(static_cast<Index>(segment_count), y.cols());
          for (std::size_t e = 0; e < seg.size(); ++e) {
            dot.row(static_cast<Index>(seg[e])) +=
                g.row(static_cast<Index>(e)).cwiseProduct(y.row(static_cast<Index>(e)));
          }
          for (std::size_t e = 0; e < seg.size(); ++e) {
            const auto r = static_cast<Index>(e);
            gs.row(r).array() += y.row(r).array() *
                                 (g.row(r) - dot.row(static_cast<Index>(seg[e]))).array();
          }
        });
      });
}

Var edge_aggregate(Var weight, Var value, std::span<const std::size_t> src,
                   std::span<const std::size_t> dst, std::size_t dst_count, std::size_t heads) {
  const Matrix& a = weight.value();
  const Matrix& v = value.value();
  if (src.size() != dst.size() || static_cast<Index>(src.size()) != a.rows() ||
      a.cols() != static_cast<Index>(heads)) {
    shape_error("edge_aggregate", a, v);
  }
  check_index("edge_aggregate", src, v.rows());
  check_index("edge_aggregate", dst, static_cast<Index>(dst_count));
  const Index w = head_width("edge_aggregate", v.cols(), heads);
  Matrix out = Matrix::Zero(static_cast<Index>(dst_count), v.cols());
  for (std::size_t e = 0; e < src.size(); ++e) {
    const auto r = static_cast<Index>(e);
    for (Index h = 0; h < static_cast<Index>(heads); ++h) {
      out.row(static_cast<Index>(dst[e])).segment(h * w, w) +=
          a(r, h) * v.row(static_cast<Index>(src[e])).segment(h * w, w);
    }
  }
  return weight.tape().record(
      "edge_aggregate", std::move(out), {weight, value},
      [weight, value, s = to_vec(src), d = to_vec(dst), heads, w](Tape& t, const Matrix&,
                                                                  const Matrix& g) {
        const Matrix& a = t.value(weight);
        const Matrix& v = t.value(value);
        t.accumulate_with(weight, [&](Matrix& ga) {
          for (std::size_t e = 0; e < s.size(); ++e) {
            for (Index h = 0; h < static_cast<Index>(heads); ++h) {
              ga(static_cast<Index>(e), h) +=
                  g.row(static_cast<Index>(d[e])).segment(h * w, w).dot(
                      v.row(static_cast<Index>(s[e])).segment(h * w, w));
            }
          }
        });
        t.accumulate_with(value, [&](Matrix& gv) {
          for (std::size_t e = 0; e < s.size(); ++e) {
            for (Index h = 0; h < static_cast<Index>(heads); ++h) {
              gv.row(static_cast<Index>(s[e])).segment(h * w, w) +=
                  a(static_cast<Index>(e), h) * g.row(static_cast<Index>(d[e])).segment(h * w, w);
            }
          }
        });
      });
}

}  // namespace egmmg::ad
