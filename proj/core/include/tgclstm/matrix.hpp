#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tgclstm {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix ones(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 1.0); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  void fill(double v);
  Matrix transposed() const;
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

std::string shape_string(const Matrix& m);

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const std::string& what);
void require_finite(std::span<const double> v, const std::string& what);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

/// y = A x
Vector matvec(const Matrix& a, std::span<const double> x);
/// y = A^T x
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
/// y += A x
void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y);
/// y += A^T x
void matvec_transposed_accumulate(const Matrix& a, std::span<const double> x,
                                  std::span<double> y);
/// A += g x^T
void outer_accumulate(std::span<const double> g, std::span<const double> x, Matrix& a);

// Masked linear map (W ⊙ M) x. Entries where M is zero never contribute, so an
// off-support weight cannot leak into the output or receive gradient.
Vector masked_linear_forward(const Matrix& weight, const Matrix& mask, std::span<const double> x);

struct MaskedLinearGrads {
  Matrix weight;  // (g x^T) ⊙ M
  Vector input;   // (W ⊙ M)^T g
};
MaskedLinearGrads masked_linear_backward(const Matrix& weight, const Matrix& mask,
                                         std::span<const double> x,
                                         std::span<const double> upstream);

/// Accumulating variants used inside the recurrent cells.
void masked_linear_accumulate(const Matrix& weight, const Matrix& mask,
                              std::span<const double> x, std::span<double> y);
void masked_linear_backward_accumulate(const Matrix& weight, const Matrix& mask,
                                       std::span<const double> x,
                                       std::span<const double> upstream, Matrix& weight_grad,
                                       std::span<double> input_grad);

double sigmoid(double x) noexcept;
inline double sigmoid_derivative_from_output(double s) noexcept { return s * (1.0 - s); }
inline double tanh_derivative_from_output(double t) noexcept { return 1.0 - t * t; }

Vector sigmoid(std::span<const double> x);
Vector tanh(std::span<const double> x);
/// Backward through σ given the forward output: g ⊙ σ(1−σ).
Vector sigmoid_backward(std::span<const double> output, std::span<const double> upstream);
/// Backward through tanh given the forward output: g ⊙ (1−tanh²).
Vector tanh_backward(std::span<const double> output, std::span<const double> upstream);

/// Mean squared error over all entries.
double mean_squared_error(std::span<const double> prediction, std::span<const double> target);
/// d MSE / d prediction.
Vector mean_squared_error_grad(std::span<const double> prediction,
                               std::span<const double> target);

}  // namespace tgclstm
