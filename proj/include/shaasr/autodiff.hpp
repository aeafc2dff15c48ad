// shaasr/autodiff.hpp

// Copyright 2026  The shaasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAASR_AUTODIFF_HPP_
#define SHAASR_AUTODIFF_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "shaasr/numeric.hpp"
#include "shaasr/tensor.hpp"

namespace shaasr {

/// Handle to a node on a Tape.  Only valid for the tape that produced it.
struct Var {
  std::uint32_t idx = 0;
};

/// Reverse-mode tape at tensor-op granularity.  One tape records one forward
/// pass (typically a minibatch); backward() runs once and the tape is then
/// discarded.  Tapes are single-threaded objects.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  const Tensor& val(Var v) const { return nodes_[v.idx].val; }
  const std::vector<double>& grad_of(Var v) const { return nodes_[v.idx].grad; }

  /// Constant input; never receives gradient flow back to the caller.
  Var leaf(Tensor value) {
    return push(std::move(value), {});
  }

  /// Trainable parameter; on backward() its gradient is accumulated into
  /// `p.grad()` (allocated on demand).
  Var param(Tensor& p) {
    Var v = push(p, {});
    sinks_.push_back({v.idx, &p});
    return v;
  }

  // --- ops ------------------------------------------------------------

  /// y = x W + b.  x may be [B x In] or [In]; W is [In x Out], b is [Out].
  Var affine(Var xv, Var wv, Var bv) {
    const Tensor& x = val(xv);
    const Tensor& w = val(wv);
    const Tensor& b = val(bv);
    SHAASR_CHECK(w.rank() == 2 && b.rank() == 1 && w.dim(1) == b.dim(0), ErrKind::kData,
                 "dimension error: affine W %s b %s", shape_str(w).c_str(), shape_str(b).c_str());
    std::size_t in = w.dim(0), out = w.dim(1);
    bool batched = x.rank() == 2;
    std::size_t rows = batched ? x.dim(0) : 1;
    SHAASR_CHECK((batched ? x.dim(1) : x.dim(0)) == in, ErrKind::kData,
                 "dimension error: affine input %s vs W %s", shape_str(x).c_str(),
                 shape_str(w).c_str());
    Tensor y(batched ? std::vector<std::size_t>{rows, out} : std::vector<std::size_t>{out});
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = x.data().data() + r * in;
      double* yr = y.data().data() + r * out;
      for (std::size_t j = 0; j < out; ++j) yr[j] = b[j];
      for (std::size_t i = 0; i < in; ++i) {
        double xi = xr[i];
        const double* wrow = w.data().data() + i * out;
        for (std::size_t j = 0; j < out; ++j) yr[j] += xi * wrow[j];
      }
    }
    return push(std::move(y), [this, xv, wv, bv, in, out, rows](Node& n) {
      const Tensor& x = val(xv);
      const Tensor& w = val(wv);
      auto& dx = nodes_[xv.idx].grad;
      auto& dw = nodes_[wv.idx].grad;
      auto& db = nodes_[bv.idx].grad;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x.data().data() + r * in;
        const double* dyr = n.grad.data() + r * out;
        double* dxr = dx.data() + r * in;
        for (std::size_t j = 0; j < out; ++j) db[j] += dyr[j];
        for (std::size_t i = 0; i < in; ++i) {
          const double* wrow = w.data().data() + i * out;
          double* dwrow = dw.data() + i * out;
          double acc = 0.0;
          for (std::size_t j = 0; j < out; ++j) {
            acc += dyr[j] * wrow[j];
            dwrow[j] += xr[i] * dyr[j];
          }
          dxr[i] += acc;
        }
      }
    });
  }

  Var relu(Var xv) {
    Tensor y = val(xv);
    for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
    return push(std::move(y), [this, xv](Node& n) {
      const Tensor& x = val(xv);
      auto& dx = nodes_[xv.idx].grad;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0) dx[i] += n.grad[i];
    });
  }

  Var add(Var av, Var bv) {
    const Tensor& a = val(av);
    const Tensor& b = val(bv);
    SHAASR_CHECK(a.same_shape(b), ErrKind::kData, "dimension error: add %s vs %s",
                 shape_str(a).c_str(), shape_str(b).c_str());
    Tensor y = a;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
    return push(std::move(y), [this, av, bv](Node& n) {
      auto& da = nodes_[av.idx].grad;
      auto& db = nodes_[bv.idx].grad;
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        da[i] += n.grad[i];
        db[i] += n.grad[i];
      }
    });
  }

  /// y = s * t with s a scalar var of shape [1].
  Var scalar_mul(Var sv, Var tv) {
    const Tensor& s = val(sv);
    const Tensor& t = val(tv);
    SHAASR_CHECK(s.size() == 1, ErrKind::kData, "dimension error: scalar_mul scale %s",
                 shape_str(s).c_str());
    Tensor y = t;
    for (double& v : y.data()) v *= s[0];
    return push(std::move(y), [this, sv, tv](Node& n) {
      const Tensor& s = val(sv);
      const Tensor& t = val(tv);
      auto& ds = nodes_[sv.idx].grad;
      auto& dt = nodes_[tv.idx].grad;
      double acc = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        acc += n.grad[i] * t[i];
        dt[i] += n.grad[i] * s[0];
      }
      ds[0] += acc;
    });
  }

  /// Extracts element i of a rank-1 var as a scalar var of shape [1].
  Var element(Var xv, std::size_t i) {
    const Tensor& x = val(xv);
    SHAASR_CHECK(x.rank() == 1 && i < x.dim(0), ErrKind::kData,
                 "index error: element %zu of %s", i, shape_str(x).c_str());
    return push(Tensor({1}, {x[i]}), [this, xv, i](Node& n) {
      nodes_[xv.idx].grad[i] += n.grad[0];
    });
  }

  /// Row r of a [N x D] var as a [D] var.
  Var row(Var mv, std::size_t r) {
    const Tensor& m = val(mv);
    SHAASR_CHECK(m.rank() == 2 && r < m.dim(0), ErrKind::kData,
                 "index error: row %zu of %s", r, shape_str(m).c_str());
    std::size_t d = m.dim(1);
    Tensor y({d});
    std::copy_n(m.data().data() + r * d, d, y.data().data());
    return push(std::move(y), [this, mv, r, d](Node& n) {
      auto& dm = nodes_[mv.idx].grad;
      for (std::size_t j = 0; j < d; ++j) dm[r * d + j] += n.grad[j];
    });
  }

  /// y_i = scale * (m[i,:] . q) for m [N x D], q [D].
  Var dot_rows(Var mv, Var qv, double scale) {
    const Tensor& m = val(mv);
    const Tensor& q = val(qv);
    SHAASR_CHECK(m.rank() == 2 && q.rank() == 1 && m.dim(1) == q.dim(0), ErrKind::kData,
                 "dimension error: dot_rows %s vs %s", shape_str(m).c_str(),
                 shape_str(q).c_str());
    std::size_t nrows = m.dim(0), d = m.dim(1);
    Tensor y({nrows});
    for (std::size_t i = 0; i < nrows; ++i) {
      double acc = 0.0;
      const double* mr = m.data().data() + i * d;
      for (std::size_t j = 0; j < d; ++j) acc += mr[j] * q[j];
      y[i] = scale * acc;
    }
    return push(std::move(y), [this, mv, qv, scale, nrows, d](Node& n) {
      const Tensor& m = val(mv);
      const Tensor& q = val(qv);
      auto& dm = nodes_[mv.idx].grad;
      auto& dq = nodes_[qv.idx].grad;
      for (std::size_t i = 0; i < nrows; ++i) {
        double g = scale * n.grad[i];
        const double* mr = m.data().data() + i * d;
        double* dmr = dm.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) {
          dmr[j] += g * q[j];
          dq[j] += g * mr[j];
        }
      }
    });
  }

  /// y = sum_i a_i * m[i,:] for a [N], m [N x D].
  Var weighted_sum_rows(Var av, Var mv) {
    const Tensor& a = val(av);
    const Tensor& m = val(mv);
    SHAASR_CHECK(a.rank() == 1 && m.rank() == 2 && a.dim(0) == m.dim(0), ErrKind::kData,
                 "dimension error: weighted_sum_rows %s vs %s", shape_str(a).c_str(),
                 shape_str(m).c_str());
    std::size_t nrows = m.dim(0), d = m.dim(1);
    Tensor y({d});
    for (std::size_t i = 0; i < nrows; ++i) {
      const double* mr = m.data().data() + i * d;
      for (std::size_t j = 0; j < d; ++j) y[j] += a[i] * mr[j];
    }
    return push(std::move(y), [this, av, mv, nrows, d](Node& n) {
      const Tensor& a = val(av);
      const Tensor& m = val(mv);
      auto& da = nodes_[av.idx].grad;
      auto& dm = nodes_[mv.idx].grad;
      for (std::size_t i = 0; i < nrows; ++i) {
        const double* mr = m.data().data() + i * d;
        double* dmr = dm.data() + i * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          acc += n.grad[j] * mr[j];
          dmr[j] += a[i] * n.grad[j];
        }
        da[i] += acc;
      }
    });
  }

  /// Softmax over the last axis (rank 1 or 2).
  Var softmax_last(Var xv) {
    Tensor y = shaasr::softmax(val(xv));
    std::size_t k = y.shape().back();
    return push(std::move(y), [this, xv, k](Node& n) {
      auto& dx = nodes_[xv.idx].grad;
      for (std::size_t off = 0; off < n.val.size(); off += k) {
        const double* yr = n.val.data().data() + off;
        const double* dyr = n.grad.data() + off;
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) dot += dyr[j] * yr[j];
        for (std::size_t j = 0; j < k; ++j) dx[off + j] += yr[j] * (dyr[j] - dot);
      }
    });
  }

  /// Log-softmax over the last axis (rank 1 or 2).
  Var log_softmax_last(Var xv) {
    Tensor y = shaasr::log_softmax(val(xv));
    std::size_t k = y.shape().back();
    return push(std::move(y), [this, xv, k](Node& n) {
      auto& dx = nodes_[xv.idx].grad;
      for (std::size_t off = 0; off < n.val.size(); off += k) {
        const double* yr = n.val.data().data() + off;
        const double* dyr = n.grad.data() + off;
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += dyr[j];
        for (std::size_t j = 0; j < k; ++j)
          dx[off + j] += dyr[j] - std::exp(yr[j]) * sum;
      }
    });
  }

  /// Stacks N rank-1 vars of equal dim D into one [N x D] var.
  Var stack_rows(const std::vector<Var>& rows) {
    SHAASR_CHECK(!rows.empty(), ErrKind::kData, "dimension error: stack_rows of nothing");
    std::size_t d = val(rows[0]).dim(0);
    Tensor y({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Tensor& r = val(rows[i]);
      SHAASR_CHECK(r.rank() == 1 && r.dim(0) == d, ErrKind::kData,
                   "dimension error: stack_rows row %zu is %s", i, shape_str(r).c_str());
      std::copy_n(r.data().data(), d, y.data().data() + i * d);
    }
    std::vector<Var> parents = rows;
    return push(std::move(y), [this, parents, d](Node& n) {
      for (std::size_t i = 0; i < parents.size(); ++i) {
        auto& dr = nodes_[parents[i].idx].grad;
        const double* g = n.grad.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) dr[j] += g[j];
      }
    });
  }

  /// Mean over the batch of -log_probs[b, labels[b]]; result shape [1].
  Var cross_entropy_loss(Var lpv, std::vector<int> labels) {
    const Tensor& lp = val(lpv);
    double v = shaasr::cross_entropy(lp, labels);
    std::size_t b = lp.dim(0), k = lp.dim(1);
    return push(Tensor({1}, {v}), [this, lpv, labels, b, k](Node& n) {
      auto& dlp = nodes_[lpv.idx].grad;
      double g = n.grad[0] / static_cast<double>(b);
      for (std::size_t i = 0; i < b; ++i)
        dlp[i * k + static_cast<std::size_t>(labels[i])] -= g;
    });
  }

  /// Mean over the batch of KL(teacher || exp(student_log_probs)); shape [1].
  /// The teacher is a constant; gradients flow into the student only.
  Var kl_loss(Tensor teacher_probs, Var slpv) {
    const Tensor& slp = val(slpv);
    double v = shaasr::kl_divergence(teacher_probs, slp);
    std::size_t b = slp.dim(0), k = slp.dim(1);
    auto teacher = std::make_shared<Tensor>(std::move(teacher_probs));
    return push(Tensor({1}, {v}), [this, slpv, teacher, b, k](Node& n) {
      auto& ds = nodes_[slpv.idx].grad;
      double g = n.grad[0] / static_cast<double>(b);
      for (std::size_t i = 0; i < b * k; ++i) ds[i] -= g * (*teacher)[i];
    });
  }

  /// y = sum_i coeffs_i * x_i with constant coefficients; result shape [1].
  Var weighted_total(Var xv, Tensor coeffs) {
    const Tensor& x = val(xv);
    SHAASR_CHECK(coeffs.size() == x.size(), ErrKind::kData,
                 "dimension error: weighted_total coeffs %zu vs %zu", coeffs.size(),
                 x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += coeffs[i] * x[i];
    auto c = std::make_shared<Tensor>(std::move(coeffs));
    return push(Tensor({1}, {acc}), [this, xv, c](Node& n) {
      auto& dx = nodes_[xv.idx].grad;
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += (*c)[i] * n.grad[0];
    });
  }

  /// y = ca*a + cb*b for scalar vars (loss mixing).
  Var add_scaled(Var av, double ca, Var bv, double cb) {
    const Tensor& a = val(av);
    const Tensor& b = val(bv);
    SHAASR_CHECK(a.size() == 1 && b.size() == 1, ErrKind::kData,
                 "dimension error: add_scaled wants scalars");
    return push(Tensor({1}, {ca * a[0] + cb * b[0]}), [this, av, bv, ca, cb](Node& n) {
      nodes_[av.idx].grad[0] += ca * n.grad[0];
      nodes_[bv.idx].grad[0] += cb * n.grad[0];
    });
  }

  /// Seeds d(loss)=1 and propagates through the tape in reverse order.
  /// Parameter gradients are accumulated into their sink tensors.
  void backward(Var loss) {
    SHAASR_CHECK(val(loss).size() == 1, ErrKind::kData,
                 "dimension error: backward from non-scalar");
    for (Node& n : nodes_) n.grad.assign(n.val.size(), 0.0);
    nodes_[loss.idx].grad[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (nodes_[i].back) nodes_[i].back(nodes_[i]);
    }
    for (const Sink& s : sinks_) {
      auto& g = s.target->grad();
      const auto& src = nodes_[s.idx].grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
    }
  }

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor val;
    std::vector<double> grad;
    std::function<void(Node&)> back;
  };
  struct Sink {
    std::uint32_t idx;
    Tensor* target;
  };

  Var push(Tensor value, std::function<void(Node&)> back) {
    value.check_finite("tape op output");
    nodes_.push_back(Node{std::move(value), {}, std::move(back)});
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
  std::vector<Sink> sinks_;
};

}  // namespace shaasr

#endif  // SHAASR_AUTODIFF_HPP_
