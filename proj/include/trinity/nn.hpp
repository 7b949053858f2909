#ifndef TRINITY_NN_HPP_
#define TRINITY_NN_HPP_

// Dense-network kernels: forward/backward pairs for the layer kinds the ranking
// model is built from, the two losses, and Adam. Everything is a free function
// over row-major Eigen matrices (rows = batch), templated on the scalar type.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "trinity/common.hpp"

namespace trinity::nn {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class LayerKind {
  kAffine,
  kElu,
  kSigmoid,
  kSoftmax,
  kEmbeddingLookup,
  kElementwiseMul,
  kConcat,
  kReduceMeanPerField,
  kExpandPerField,
  kBinaryCrossEntropy,
  kSoftmaxCrossEntropy,
};

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kAffine: return "affine";
    case LayerKind::kElu: return "elu";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kSoftmax: return "softmax";
    case LayerKind::kEmbeddingLookup: return "embedding_lookup";
    case LayerKind::kElementwiseMul: return "elementwise_mul";
    case LayerKind::kConcat: return "concat";
    case LayerKind::kReduceMeanPerField: return "reduce_mean_per_field";
    case LayerKind::kExpandPerField: return "expand_per_field";
    case LayerKind::kBinaryCrossEntropy: return "bce_loss";
    case LayerKind::kSoftmaxCrossEntropy: return "softmax_ce_loss";
  }
  return "?";
}

template <class Derived>
void check_finite(const Eigen::MatrixBase<Derived>& x, const std::string& layer) {
  // x - x is 0 for finite entries and NaN otherwise; the sum is a vectorized reduction.
  const auto a = x.derived().array();
  if ((a - a).sum() != typename Derived::Scalar(0)) {
    throw NumericError(layer, "output contains NaN or Inf");
  }
}

inline void check_shape(bool ok, const std::string& what) {
  if (!ok) throw ContractError("shape mismatch: " + what);
}

// ---- affine: Y = X W + b, W is (in x out), b is (1 x out) ----

template <class Scalar>
Matrix<Scalar> affine(const Matrix<Scalar>& x, const Matrix<Scalar>& w, const Matrix<Scalar>& b) {
  check_shape(x.cols() == w.rows() && b.rows() == 1 && b.cols() == w.cols(), "affine");
  Matrix<Scalar> y(x.rows(), w.cols());
  y.noalias() = x * w;
  y.rowwise() += b.row(0);
  return y;
}

// Accumulates into dw/db and returns dX.
template <class Scalar>
Matrix<Scalar> affine_backward(const Matrix<Scalar>& dy, const Matrix<Scalar>& x,
                               const Matrix<Scalar>& w, Matrix<Scalar>& dw, Matrix<Scalar>& db) {
  check_shape(dy.rows() == x.rows() && dy.cols() == w.cols(), "affine_backward");
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  Matrix<Scalar> dx(x.rows(), x.cols());
  dx.noalias() = dy * w.transpose();
  return dx;
}

// Same as affine_backward without the input gradient.
template <class Scalar>
void affine_param_backward(const Matrix<Scalar>& dy, const Matrix<Scalar>& x, Matrix<Scalar>& dw,
                           Matrix<Scalar>& db) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
}

// ---- ELU with alpha = 1 ----

template <class Scalar>
Matrix<Scalar> elu(const Matrix<Scalar>& x) {
  // Branch-free so it vectorizes; exp(0) - 1 is exactly 0 on the positive side.
  const auto a = x.array();
  return (a.max(Scalar(0)) + (a.min(Scalar(0)).exp() - Scalar(1))).matrix();
}

// d/dx ELU = 1 for x > 0, else e^x = y + 1. Since y > 0 exactly when x > 0,
// min(y, 0) + 1 covers both sides.
template <class Scalar>
Matrix<Scalar> elu_backward(const Matrix<Scalar>& dy, const Matrix<Scalar>& x,
                            const Matrix<Scalar>& y) {
  check_shape(x.rows() == y.rows() && x.cols() == y.cols(), "elu_backward");
  return (dy.array() * (y.array().min(Scalar(0)) + Scalar(1))).matrix();
}

// ---- sigmoid ----

template <class Scalar>
Scalar sigmoid(Scalar v) {
  if (v >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-v));
  const Scalar e = std::exp(v);
  return e / (Scalar(1) + e);
}

template <class Scalar>
Matrix<Scalar> sigmoid(const Matrix<Scalar>& x) {
  // exp(-v) overflows to inf for very negative v, which still yields 0.
  return (Scalar(1) / (Scalar(1) + (-x.array()).exp())).matrix();
}

template <class Scalar>
Matrix<Scalar> sigmoid_backward(const Matrix<Scalar>& dy, const Matrix<Scalar>& y) {
  return (dy.array() * y.array() * (Scalar(1) - y.array())).matrix();
}

// ---- row-wise softmax ----

template <class Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& x) {
  Matrix<Scalar> y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Scalar m = x.row(i).maxCoeff();
    y.row(i) = (x.row(i).array() - m).exp().matrix();
    y.row(i) /= y.row(i).sum();
  }
  return y;
}

template <class Scalar>
Matrix<Scalar> softmax_backward(const Matrix<Scalar>& dy, const Matrix<Scalar>& y) {
  Matrix<Scalar> dx(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const Scalar dot = dy.row(i).dot(y.row(i));
    dx.row(i) = (y.row(i).array() * (dy.row(i).array() - dot)).matrix();
  }
  return dx;
}

// ---- embedding lookup ----
// `ids` is (n x fields). Field f of row i reads table row ids(i,f) + f*rows_per_field
// and the gathered rows are concatenated: output is (n x fields*dim).

template <class Scalar>
Matrix<Scalar> embedding_lookup(const Matrix<Scalar>& table, const IndexMatrix& ids,
                                Eigen::Index rows_per_field) {
  const Eigen::Index dim = table.cols();
  const Eigen::Index fields = ids.cols();
  Matrix<Scalar> out(ids.rows(), fields * dim);
  for (Eigen::Index i = 0; i < ids.rows(); ++i) {
    for (Eigen::Index f = 0; f < fields; ++f) {
      const Eigen::Index id = ids(i, f);
      if (id < 0 || id >= rows_per_field || f * rows_per_field + id >= table.rows()) {
        throw ContractError("embedding_lookup: id " + std::to_string(id) + " out of range for field " +
                            std::to_string(f));
      }
      const Scalar* src = table.data() + (f * rows_per_field + id) * dim;
      std::copy(src, src + dim, out.data() + (i * fields + f) * dim);
    }
  }
  return out;
}

// Scatter-adds upstream rows into dtable; rows never looked up stay untouched.
template <class Scalar>
void embedding_lookup_backward(const Matrix<Scalar>& dy, const IndexMatrix& ids,
                               Eigen::Index rows_per_field, Matrix<Scalar>& dtable) {
  const Eigen::Index dim = dtable.cols();
  for (Eigen::Index i = 0; i < ids.rows(); ++i) {
    for (Eigen::Index f = 0; f < ids.cols(); ++f) {
      dtable.row(f * rows_per_field + ids(i, f)) += dy.block(i, f * dim, 1, dim);
    }
  }
}

// ---- elementwise product ----

template <class Scalar>
Matrix<Scalar> elementwise_mul(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "elementwise_mul");
  return a.cwiseProduct(b);
}

template <class Scalar>
void elementwise_mul_backward(const Matrix<Scalar>& dy, const Matrix<Scalar>& a,
                              const Matrix<Scalar>& b, Matrix<Scalar>& da, Matrix<Scalar>& db) {
  da = dy.cwiseProduct(b);
  db = dy.cwiseProduct(a);
}

// ---- column concatenation ----

template <class Scalar>
Matrix<Scalar> concat(std::initializer_list<const Matrix<Scalar>*> parts) {
  Eigen::Index rows = (*parts.begin())->rows();
  Eigen::Index cols = 0;
  for (const auto* p : parts) {
    check_shape(p->rows() == rows, "concat");
    cols += p->cols();
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index c = 0;
  for (const auto* p : parts) {
    out.middleCols(c, p->cols()) = *p;
    c += p->cols();
  }
  return out;
}

// Gradient of the part that starts at column `offset` with `cols` columns.
template <class Scalar>
Matrix<Scalar> concat_backward(const Matrix<Scalar>& dy, Eigen::Index offset, Eigen::Index cols) {
  return dy.middleCols(offset, cols);
}

// ---- per-field mean over embedding dims: (n x F*d) -> (n x F) ----

template <class Scalar>
Matrix<Scalar> reduce_mean_per_field(const Matrix<Scalar>& x, Eigen::Index dim) {
  check_shape(dim > 0 && x.cols() % dim == 0, "reduce_mean_per_field");
  const Eigen::Index fields = x.cols() / dim;
  // Row-major storage: each (row, field) block of `dim` values is contiguous.
  using Flat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Flat> blocks(x.data(), x.rows() * fields, dim);
  Matrix<Scalar> y(x.rows(), fields);
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(y.data(), y.size()) =
      blocks.rowwise().sum() / Scalar(dim);
  return y;
}

template <class Scalar>
Matrix<Scalar> expand_per_field(const Matrix<Scalar>& s, Eigen::Index dim);

template <class Scalar>
Matrix<Scalar> reduce_mean_per_field_backward(const Matrix<Scalar>& dy, Eigen::Index dim) {
  Matrix<Scalar> dx = expand_per_field(dy, dim);
  dx /= Scalar(dim);
  return dx;
}

// Repeats each column `dim` times: (n x F) -> (n x F*d). Used to broadcast a
// per-field scale over that field's embedding.
template <class Scalar>
Matrix<Scalar> expand_per_field(const Matrix<Scalar>& s, Eigen::Index dim) {
  using Flat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix<Scalar> out(s.rows(), s.cols() * dim);
  Eigen::Map<Flat> blocks(out.data(), s.size(), dim);
  blocks.colwise() = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(s.data(), s.size());
  return out;
}

template <class Scalar>
Matrix<Scalar> expand_per_field_backward(const Matrix<Scalar>& dy, Eigen::Index dim) {
  const Eigen::Index fields = dy.cols() / dim;
  using Flat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Flat> blocks(dy.data(), dy.rows() * fields, dim);
  Matrix<Scalar> ds(dy.rows(), fields);
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(ds.data(), ds.size()) = blocks.rowwise().sum();
  return ds;
}

// ---- losses ----

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy of probabilities clamped to [1e-7, 1 - 1e-7].
template <class Scalar>
Scalar bce_loss(std::span<const Scalar> p, std::span<const int> y) {
  check_shape(p.size() == y.size() && !p.empty(), "bce_loss");
  Scalar total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Scalar q = std::clamp<Scalar>(p[i], kProbClamp, 1 - kProbClamp);
    total -= y[i] != 0 ? std::log(q) : std::log1p(-q);
  }
  return total / static_cast<Scalar>(p.size());
}

// Gradient of mean BCE(sigmoid(z)) w.r.t. the logits z: (p - y) / n.
template <class Scalar>
Matrix<Scalar> bce_logit_grad(const Matrix<Scalar>& p, std::span<const int> y) {
  Matrix<Scalar> g(p.rows(), 1);
  const Scalar n = static_cast<Scalar>(p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) g(i, 0) = (p(i, 0) - Scalar(y[i] != 0)) / n;
  return g;
}

// Mean categorical cross-entropy of row-wise probabilities against class ids.
template <class Scalar>
Scalar softmax_ce_loss(const Matrix<Scalar>& probs, std::span<const int> labels) {
  check_shape(static_cast<std::size_t>(probs.rows()) == labels.size() && probs.rows() > 0,
              "softmax_ce_loss");
  Scalar total = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    total -= std::log(std::max<Scalar>(probs(i, labels[i]), kProbClamp));
  }
  return total / static_cast<Scalar>(probs.rows());
}

// Gradient of mean softmax cross-entropy w.r.t. the logits: (probs - onehot) / n.
template <class Scalar>
Matrix<Scalar> softmax_ce_logit_grad(const Matrix<Scalar>& probs, std::span<const int> labels) {
  Matrix<Scalar> g = probs;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) g(i, labels[i]) -= Scalar(1);
  return g / static_cast<Scalar>(probs.rows());
}

// ---- Adam ----

struct AdamConfig {
  // Desk-scale default: a few hundred steps per day need a larger step than
  // the 1e-4 used at production scale.
  double learning_rate = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  bool operator==(const AdamConfig&) const = default;
};

// One bias-corrected Adam update of `param` given its gradient and moments.
// `step` is the already-incremented step counter t >= 1.
template <class Scalar>
void adam_update(Matrix<Scalar>& param, const Matrix<Scalar>& grad, Matrix<Scalar>& m,
                 Matrix<Scalar>& v, long step, const AdamConfig& cfg) {
  check_shape(param.rows() == grad.rows() && param.cols() == grad.cols() &&
                  m.rows() == param.rows() && v.rows() == param.rows(),
              "adam_update");
  const Scalar b1 = static_cast<Scalar>(cfg.beta1);
  const Scalar b2 = static_cast<Scalar>(cfg.beta2);
  const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(step));
  const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(step));
  const Scalar lr = static_cast<Scalar>(cfg.learning_rate);
  const Scalar eps = static_cast<Scalar>(cfg.epsilon);
  m = b1 * m + (Scalar(1) - b1) * grad;
  v = b2 * v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

}  // namespace trinity::nn

#endif  // TRINITY_NN_HPP_
