#include "tgclstm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tgclstm/errors.hpp"

namespace tgclstm {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    std::ostringstream os;
    os << op << ": length mismatch " << a << " vs " << b;
    throw ShapeError(os.str());
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                     shape_string(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: " + std::to_string(values_.size()) + " values for shape " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const Matrix& m, const std::string& what) {
  require_finite(m.values(), what);
}

void require_finite(std::span<const double> v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(what + ": non-finite value at index " + std::to_string(i));
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_string(a) + " * " + shape_string(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  auto ov = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += bv[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows(), 0.0);
  matvec_accumulate(a, x, y);
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  Vector y(a.cols(), 0.0);
  matvec_transposed_accumulate(a, x, y);
  return y;
}

void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y) {
  require_same_length(a.cols(), x.size(), "matvec");
  require_same_length(a.rows(), y.size(), "matvec");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    y[i] += acc;
  }
}

void matvec_transposed_accumulate(const Matrix& a, std::span<const double> x,
                                  std::span<double> y) {
  require_same_length(a.rows(), x.size(), "matvec_transposed");
  require_same_length(a.cols(), y.size(), "matvec_transposed");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * xi;
  }
}

void outer_accumulate(std::span<const double> g, std::span<const double> x, Matrix& a) {
  require_same_length(a.rows(), g.size(), "outer");
  require_same_length(a.cols(), x.size(), "outer");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    const double gi = g[i];
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += gi * x[j];
  }
}

Vector masked_linear_forward(const Matrix& weight, const Matrix& mask,
                             std::span<const double> x) {
  Vector y(weight.rows(), 0.0);
  masked_linear_accumulate(weight, mask, x, y);
  return y;
}

void masked_linear_accumulate(const Matrix& weight, const Matrix& mask,
                              std::span<const double> x, std::span<double> y) {
  require_same_shape(weight, mask, "masked_linear");
  require_same_length(weight.cols(), x.size(), "masked_linear");
  require_same_length(weight.rows(), y.size(), "masked_linear");
  for (std::size_t i = 0; i < weight.rows(); ++i) {
    auto w = weight.row(i);
    auto m = mask.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (m[j] != 0.0) acc += w[j] * m[j] * x[j];
    }
    y[i] += acc;
  }
}

MaskedLinearGrads masked_linear_backward(const Matrix& weight, const Matrix& mask,
                                         std::span<const double> x,
                                         std::span<const double> upstream) {
  MaskedLinearGrads grads{Matrix(weight.rows(), weight.cols()), Vector(weight.cols(), 0.0)};
  masked_linear_backward_accumulate(weight, mask, x, upstream, grads.weight, grads.input);
  return grads;
}

void masked_linear_backward_accumulate(const Matrix& weight, const Matrix& mask,
                                       std::span<const double> x,
                                       std::span<const double> upstream, Matrix& weight_grad,
                                       std::span<double> input_grad) {
  require_same_shape(weight, mask, "masked_linear_backward");
  require_same_shape(weight, weight_grad, "masked_linear_backward");
  require_same_length(weight.cols(), x.size(), "masked_linear_backward");
  require_same_length(weight.rows(), upstream.size(), "masked_linear_backward");
  require_same_length(weight.cols(), input_grad.size(), "masked_linear_backward");
  for (std::size_t i = 0; i < weight.rows(); ++i) {
    auto w = weight.row(i);
    auto m = mask.row(i);
    auto gw = weight_grad.row(i);
    const double gi = upstream[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (m[j] == 0.0) continue;
      gw[j] += gi * x[j] * m[j];
      input_grad[j] += w[j] * m[j] * gi;
    }
  }
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> x) {
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  return y;
}

Vector tanh(std::span<const double> x) {
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

Vector sigmoid_backward(std::span<const double> output, std::span<const double> upstream) {
  require_same_length(output.size(), upstream.size(), "sigmoid_backward");
  Vector g(output.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = upstream[i] * sigmoid_derivative_from_output(output[i]);
  return g;
}

Vector tanh_backward(std::span<const double> output, std::span<const double> upstream) {
  require_same_length(output.size(), upstream.size(), "tanh_backward");
  Vector g(output.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = upstream[i] * tanh_derivative_from_output(output[i]);
  return g;
}

double mean_squared_error(std::span<const double> prediction, std::span<const double> target) {
  require_same_length(prediction.size(), target.size(), "mean_squared_error");
  if (prediction.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = prediction[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(prediction.size());
}

Vector mean_squared_error_grad(std::span<const double> prediction,
                               std::span<const double> target) {
  require_same_length(prediction.size(), target.size(), "mean_squared_error_grad");
  Vector g(prediction.size());
  const double n = static_cast<double>(prediction.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * (prediction[i] - target[i]) / n;
  return g;
}

}  // namespace tgclstm
